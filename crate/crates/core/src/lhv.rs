//! Local hidden-variable models, the two-dice ensemble, and a seeded
//! coincidence sampler.
//!
//! Each die is a Bernoulli variable: a die with 1 on three of six faces
//! succeeds with probability ½, one with 1 on four faces with ⅔.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::correlation::CorrelationReport;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::report::sig15;
use crate::rng::SplitMix64;
use crate::state::{DensityOperator, MixtureTerm, StateSpec};

pub const WEIGHT_TOL: f64 = 1e-12;
/// Trials per independent random stream in the sampler.
pub const BLOCK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVariable {
    pub weight: f64,
    pub response_a: BTreeMap<String, f64>,
    pub response_b: BTreeMap<String, f64>,
}

/// Finite set of hidden variables λ with p(λ) and bounded local responses.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvModel {
    lambdas: Vec<HiddenVariable>,
}

impl LhvModel {
    pub fn new(lambdas: Vec<HiddenVariable>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidState("model has no hidden variables".into()));
        }
        let mut total = 0.0;
        for l in &lambdas {
            if !(0.0..=1.0).contains(&l.weight) {
                return Err(Error::OutOfRange {
                    name: "p(λ)",
                    value: l.weight,
                    range: "[0, 1]",
                });
            }
            total += l.weight;
            for &r in l.response_a.values().chain(l.response_b.values()) {
                if !(-1.0..=1.0).contains(&r) {
                    return Err(Error::OutOfRange {
                        name: "response",
                        value: r,
                        range: "[-1, 1]",
                    });
                }
            }
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidState(format!("p(λ) sums to {total}")));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[HiddenVariable] {
        &self.lambdas
    }
}

fn response(map: &BTreeMap<String, f64>, setting: &str) -> Result<f64> {
    map.get(setting)
        .copied()
        .ok_or_else(|| Error::UnknownSetting(setting.to_string()))
}

/// E(a, b) = Σ_λ p(λ)·A(a, λ)·B(b, λ).
pub fn lhv_expectation(m: &LhvModel, a: &str, b: &str) -> Result<f64> {
    m.lambdas.iter().try_fold(0.0, |acc, l| {
        Ok(acc + l.weight * response(&l.response_a, a)? * response(&l.response_b, b)?)
    })
}

/// |E(a,b) − E(a,b′)| + |E(a′,b) + E(a′,b′)|.
pub fn lhv_chsh(m: &LhvModel, a: &str, a_prime: &str, b: &str, b_prime: &str) -> Result<f64> {
    Ok(
        (lhv_expectation(m, a, b)? - lhv_expectation(m, a, b_prime)?).abs()
            + (lhv_expectation(m, a_prime, b)? + lhv_expectation(m, a_prime, b_prime)?).abs(),
    )
}

/// A probability given either exactly or as a double.
#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(BigRational),
    Approx(f64),
}

impl Probability {
    pub fn ratio(num: i64, den: i64) -> Self {
        Probability::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Probability::Approx(x) => *x,
        }
    }

    fn exact(&self) -> Option<&BigRational> {
        match self {
            Probability::Exact(r) => Some(r),
            Probability::Approx(_) => None,
        }
    }
}

/// Accepts `"n/d"`, integers, and plain decimals such as `"0.25"`.
impl FromStr for Probability {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid probability `{s}`"));
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Probability::Exact(BigRational::new(digits, scale)));
        }
        let r: BigRational = s.parse().map_err(|_| bad())?;
        Ok(Probability::Exact(r))
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(r) => write!(f, "{r}"),
            Probability::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Probability::Approx(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DicePair {
    /// Probability that this pair type is sent.
    pub mix: Probability,
    /// Success probability of Alice's die.
    pub p1: Probability,
    /// Success probability of Bob's die.
    pub p2: Probability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiceSpec {
    pairs: Vec<DicePair>,
}

impl DiceSpec {
    pub fn new(pairs: Vec<DicePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidState("dice spec has no pair types".into()));
        }
        for p in &pairs {
            for (name, v) in [("mix", &p.mix), ("p1", &p.p1), ("p2", &p.p2)] {
                let x = v.to_f64();
                let in_range = match v.exact() {
                    Some(r) => *r >= BigRational::zero() && *r <= BigRational::one(),
                    None => (0.0..=1.0).contains(&x),
                };
                if !in_range {
                    return Err(Error::OutOfRange {
                        name,
                        value: x,
                        range: "[0, 1]",
                    });
                }
            }
        }
        let spec = Self { pairs };
        match spec.exact_mix_total() {
            Some(total) if !total.is_one() => {
                return Err(Error::InvalidState(format!(
                    "pair probabilities sum to {total}"
                )))
            }
            Some(_) => {}
            None => {
                let total: f64 = spec.pairs.iter().map(|p| p.mix.to_f64()).sum();
                if (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::InvalidState(format!(
                        "pair probabilities sum to {total}"
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// D1 (½) pairs with probability ¼, D2 (⅔) pairs with probability ¾.
    pub fn two_dice() -> Self {
        Self::new(vec![
            DicePair {
                mix: Probability::ratio(1, 4),
                p1: Probability::ratio(1, 2),
                p2: Probability::ratio(1, 2),
            },
            DicePair {
                mix: Probability::ratio(3, 4),
                p1: Probability::ratio(2, 3),
                p2: Probability::ratio(2, 3),
            },
        ])
        .expect("valid built-in spec")
    }

    pub fn pairs(&self) -> &[DicePair] {
        &self.pairs
    }

    pub fn is_exact(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.mix.exact().is_some() && p.p1.exact().is_some() && p.p2.exact().is_some())
    }

    fn exact_mix_total(&self) -> Option<BigRational> {
        self.pairs
            .iter()
            .map(|p| p.mix.exact().cloned())
            .sum::<Option<BigRational>>()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            pairs: Vec<[Probability; 3]>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(
            raw.pairs
                .into_iter()
                .map(|[mix, p1, p2]| DicePair { mix, p1, p2 })
                .collect(),
        )
    }
}

/// Moments as exact fractions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactMoments {
    pub e_a: String,
    pub e_b: String,
    pub e_ab: String,
    pub cov: String,
    pub var_a: String,
    pub var_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiceReport {
    #[serde(flatten)]
    pub report: CorrelationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactMoments>,
}

/// E(A) = Σ mixᵢ p1ᵢ, E(B) = Σ mixᵢ p2ᵢ, E(AB) = Σ mixᵢ p1ᵢ p2ᵢ. Exact when
/// every input is a fraction.
pub fn dice_exact(spec: &DiceSpec) -> DiceReport {
    if spec.is_exact() {
        let q = |p: &Probability| p.exact().cloned().expect("exact spec");
        let mut e_a = BigRational::zero();
        let mut e_b = BigRational::zero();
        let mut e_ab = BigRational::zero();
        for p in &spec.pairs {
            let (m, a, b) = (q(&p.mix), q(&p.p1), q(&p.p2));
            e_a += &m * &a;
            e_b += &m * &b;
            e_ab += &m * &a * &b;
        }
        let cov = &e_ab - &e_a * &e_b;
        // outcomes are 0/1, so E(A²) = E(A)
        let var_a = &e_a - &e_a * &e_a;
        let var_b = &e_b - &e_b * &e_b;
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        DiceReport {
            report: CorrelationReport {
                e_a: f(&e_a),
                e_b: f(&e_b),
                e_ab: f(&e_ab),
                cov: f(&cov),
                var_a: f(&var_a),
                var_b: f(&var_b),
            },
            exact: Some(ExactMoments {
                e_a: e_a.to_string(),
                e_b: e_b.to_string(),
                e_ab: e_ab.to_string(),
                cov: cov.to_string(),
                var_a: var_a.to_string(),
                var_b: var_b.to_string(),
            }),
        }
    } else {
        let (mut e_a, mut e_b, mut e_ab) = (0.0, 0.0, 0.0);
        for p in &spec.pairs {
            let (m, a, b) = (p.mix.to_f64(), p.p1.to_f64(), p.p2.to_f64());
            e_a += m * a;
            e_b += m * b;
            e_ab += m * a * b;
        }
        DiceReport {
            report: CorrelationReport {
                e_a,
                e_b,
                e_ab,
                cov: e_ab - e_a * e_b,
                var_a: e_a - e_a * e_a,
                var_b: e_b - e_b * e_b,
            },
            exact: None,
        }
    }
}

pub const DIE_SETTING: &str = "roll";

/// One hidden variable per pair type; the responses are the dice means.
pub fn dice_to_lhv(spec: &DiceSpec) -> LhvModel {
    let lambdas = spec
        .pairs
        .iter()
        .map(|p| HiddenVariable {
            weight: p.mix.to_f64(),
            response_a: BTreeMap::from([(DIE_SETTING.to_string(), p.p1.to_f64())]),
            response_b: BTreeMap::from([(DIE_SETTING.to_string(), p.p2.to_f64())]),
        })
        .collect();
    LhvModel::new(lambdas).expect("dice spec invariants carry over")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub n: u64,
    #[serde(serialize_with = "sig15")]
    pub mean_a: f64,
    #[serde(serialize_with = "sig15")]
    pub mean_b: f64,
    #[serde(serialize_with = "sig15")]
    pub mean_ab: f64,
    #[serde(serialize_with = "sig15")]
    pub cov_hat: f64,
    #[serde(serialize_with = "sig15")]
    pub stderr_cov: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    a: u64,
    b: u64,
    ab: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            a: self.a + o.a,
            b: self.b + o.b,
            ab: self.ab + o.ab,
        }
    }
}

struct Sampler {
    cumulative: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl Sampler {
    fn new(spec: &DiceSpec) -> Self {
        let mut acc = 0.0;
        let cumulative = spec
            .pairs
            .iter()
            .map(|p| {
                acc += p.mix.to_f64();
                acc
            })
            .collect();
        Self {
            cumulative,
            p1: spec.pairs.iter().map(|p| p.p1.to_f64()).collect(),
            p2: spec.pairs.iter().map(|p| p.p2.to_f64()).collect(),
        }
    }

    fn block(&self, seed: u64, index: u64, trials: u64) -> Counts {
        let mut rng = SplitMix64::stream(seed, index);
        let mut c = Counts::default();
        for _ in 0..trials {
            let k = rng.categorical(&self.cumulative);
            let a = rng.bernoulli(self.p1[k]) as u64;
            let b = rng.bernoulli(self.p2[k]) as u64;
            c.a += a;
            c.b += b;
            c.ab += a & b;
        }
        c
    }
}

/// Simulates `n` coincidence trials: draw a pair type, then roll both dice.
///
/// Trials are grouped in blocks of [`BLOCK_TRIALS`]; block `k` draws from
/// `SplitMix64::stream(seed, k)` with one categorical draw and two Bernoulli
/// draws per trial, in that order. Only integer outcome counts are merged,
/// so the estimate does not depend on how blocks are spread over threads.
pub fn sample_coincidences(spec: &DiceSpec, n: u64, seed: u64) -> Result<SampleEstimate> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let sampler = Sampler::new(spec);
    let blocks = n.div_ceil(BLOCK_TRIALS);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let trials = BLOCK_TRIALS.min(n - k * BLOCK_TRIALS);
            sampler.block(seed, k, trials)
        })
        .reduce(Counts::default, |x, y| x + y);
    Ok(estimate(counts, n, seed))
}

fn estimate(c: Counts, n: u64, seed: u64) -> SampleEstimate {
    let nf = n as f64;
    let mean_a = c.a as f64 / nf;
    let mean_b = c.b as f64 / nf;
    let mean_ab = c.ab as f64 / nf;
    let cov_hat = mean_ab - mean_a * mean_b;
    // plug-in variance of (A − Ā)(B − B̄) from the four outcome cells
    let cells = [
        (c.ab, 1.0, 1.0),
        (c.a - c.ab, 1.0, 0.0),
        (c.b - c.ab, 0.0, 1.0),
        (n + c.ab - c.a - c.b, 0.0, 0.0),
    ];
    let fourth: f64 = cells
        .iter()
        .map(|&(count, a, b)| {
            let d = (a - mean_a) * (b - mean_b);
            count as f64 / nf * d * d
        })
        .sum();
    let stderr_cov = ((fourth - cov_hat * cov_hat).max(0.0) / nf).sqrt();
    SampleEstimate {
        n,
        mean_a,
        mean_b,
        mean_ab,
        cov_hat,
        stderr_cov,
        seed,
    }
}

/// Dice ensemble as Σ mixᵢ diag(p1ᵢ, 1−p1ᵢ) ⊗ diag(p2ᵢ, 1−p2ᵢ). Pair types
/// that are never sent are dropped.
pub fn quantum_like_embedding(spec: &DiceSpec) -> Result<StateSpec> {
    let die = |p: &Probability| {
        let x = p.to_f64();
        DensityOperator::local(CMatrix::diag_real(&[x, 1.0 - x]))
    };
    let terms = spec
        .pairs
        .iter()
        .filter(|p| p.mix.to_f64() > 0.0)
        .map(|p| {
            Ok(MixtureTerm {
                weight: p.mix.to_f64(),
                left: die(&p.p1)?,
                right: die(&p.p2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    StateSpec::mixture(terms)
}

/// Success projector diag(1, 0): the die shows 1.
pub fn success_projector() -> CMatrix {
    CMatrix::diag_real(&[1.0, 0.0])
}
