//! State descriptions read from JSON documents or short keywords.
//!
//! JSON layout:
//!
//! ```text
//! {"split": [d1, d2], "spec": {"product": [M1, M2]}}
//! {"split": [d1, d2], "spec": {"mixture": [[p, M1, M2], ...]}}
//! {"split": [d1, d2], "spec": {"general": M}}
//! {"split": [2, 2],   "spec": {"werner": p}}
//! {"split": [2, 2],   "spec": {"bell": "phi+"}}
//! ```
//!
//! Each matrix is a list of rows, each row a list of `[re, im]` pairs.
//!
//! Keywords: `bell:phi+|phi-|psi+|psi-`, `werner:<p>`, `maxmixed:<d1>x<d2>`.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::state::{bell_state, werner, BellKind, DensityOperator, MixtureTerm, Split, StateSpec};

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    split: [usize; 2],
    spec: RawSpec,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawSpec {
    Product([RawMatrix; 2]),
    Mixture(Vec<(f64, RawMatrix, RawMatrix)>),
    General(RawMatrix),
    Werner(f64),
    Bell(String),
}

fn matrix(raw: RawMatrix) -> Result<CMatrix> {
    let rows: Vec<Vec<C64>> = raw
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
        .collect();
    CMatrix::from_rows(&rows)
}

fn local(raw: RawMatrix, expected: usize) -> Result<DensityOperator> {
    let m = matrix(raw)?;
    if m.rows() != expected || m.cols() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} factor where dimension {expected} was declared",
            m.rows(),
            m.cols()
        )));
    }
    DensityOperator::local(m)
}

fn require_qubits(split: Split) -> Result<()> {
    if split != Split::QUBITS {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit state declared with split {split}"
        )));
    }
    Ok(())
}

pub fn parse_state_json(text: &str) -> Result<StateSpec> {
    let raw: RawState = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let split = Split::new(raw.split[0], raw.split[1])?;
    match raw.spec {
        RawSpec::Product([a, b]) => Ok(StateSpec::product(
            local(a, split.left)?,
            local(b, split.right)?,
        )),
        RawSpec::Mixture(terms) => StateSpec::mixture(
            terms
                .into_iter()
                .map(|(weight, a, b)| {
                    Ok(MixtureTerm {
                        weight,
                        left: local(a, split.left)?,
                        right: local(b, split.right)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        RawSpec::General(m) => Ok(StateSpec::general(DensityOperator::new(matrix(m)?, split)?)),
        RawSpec::Werner(p) => {
            require_qubits(split)?;
            werner(p)
        }
        RawSpec::Bell(kind) => {
            require_qubits(split)?;
            Ok(StateSpec::general(bell_state(kind.parse()?)))
        }
    }
}

/// Parses `bell:<kind>`, `werner:<p>` or `maxmixed:<d1>x<d2>`; `None` when
/// the text is not a keyword.
pub fn parse_state_keyword(text: &str) -> Option<Result<StateSpec>> {
    let (head, arg) = text.split_once(':')?;
    Some(match head {
        "bell" => arg
            .parse::<BellKind>()
            .map(|k| StateSpec::general(bell_state(k))),
        "werner" => arg
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("invalid Werner weight `{arg}`")))
            .and_then(werner),
        "maxmixed" => {
            let dims = arg
                .split_once('x')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)));
            match dims {
                Some((d1, d2)) => Split::new(d1, d2)
                    .map(|s| StateSpec::general(DensityOperator::maximally_mixed(s))),
                None => Err(Error::Parse(format!("invalid dimensions `{arg}`"))),
            }
        }
        _ => return None,
    })
}
