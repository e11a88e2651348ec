//! Command-line value parsing.

use qcov::bellwitness::ChshSettings;
use qcov::input::{parse_state_json, parse_state_keyword};
use qcov::linalg::{pauli, CMatrix, C64};
use qcov::{Error, StateSpec};

use crate::Failure;

pub fn read(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))
}

/// Keyword or path to a JSON state document.
pub fn state(arg: &str) -> Result<StateSpec, Failure> {
    if let Some(spec) = parse_state_keyword(arg) {
        return Ok(spec?);
    }
    Ok(parse_state_json(&read(arg)?)?)
}

fn reals(arg: &str) -> Result<Vec<f64>, Failure> {
    arg.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("`{x}` is not a number")))
        })
        .collect()
}

/// Rescales to unit length; command-line vectors are usually rounded.
fn normalize(v: [f64; 3]) -> Result<[f64; 3], Failure> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !n.is_finite() || n < 1e-6 {
        return Err(Error::NonUnitVector(n).into());
    }
    if (n - 1.0).abs() > 1e-10 {
        eprintln!("qcov: normalizing Bloch vector of norm {n}");
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

pub fn bloch(arg: &str) -> Result<[f64; 3], Failure> {
    let v = reals(arg)?;
    let v: [f64; 3] = v
        .try_into()
        .map_err(|_| Failure::Input(format!("Bloch vector `{arg}` needs three components")))?;
    normalize(v)
}

pub fn settings(arg: &str) -> Result<ChshSettings, Failure> {
    let v = reals(arg)?;
    if v.len() != 12 {
        return Err(
            Error::Parse(format!("settings need twelve components, got {}", v.len())).into(),
        );
    }
    let mut flat = Vec::with_capacity(12);
    for chunk in v.chunks(3) {
        flat.extend(normalize([chunk[0], chunk[1], chunk[2]])?);
    }
    Ok(ChshSettings::from_slice(&flat)?)
}

/// `x|y|z|i`, a Bloch vector `nx,ny,nz`, `diag:v1,v2,...`, or a file with a
/// JSON matrix of `[re, im]` pairs.
pub fn observable(arg: &str) -> Result<CMatrix, Failure> {
    match arg {
        "i" | "I" => return Ok(pauli(0)),
        "x" | "X" => return Ok(pauli(1)),
        "y" | "Y" => return Ok(pauli(2)),
        "z" | "Z" => return Ok(pauli(3)),
        _ => {}
    }
    if let Some(values) = arg.strip_prefix("diag:") {
        return Ok(CMatrix::diag_real(&reals(values)?));
    }
    if arg.contains(',') {
        return Ok(qcov::bloch_observable(bloch(arg)?)?);
    }
    let raw: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&read(arg)?).map_err(|e| Failure::Input(format!("{arg}: {e}")))?;
    let rows: Vec<Vec<C64>> = raw
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
        .collect();
    Ok(CMatrix::from_rows(&rows)?)
}
