//! CHSH functional, its maximization over measurement directions, the
//! closed-form two-qubit maximum, the partial-transpose test, and the
//! separable / non-separable / entangled classification.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::expectation;
use crate::error::{Error, Result};
use crate::linalg::{kron, min_eigenvalue, pauli, symmetric_eigenvalues};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::report::{sig15, sig15_opt, sig15_slice};
use crate::state::{
    bloch_observable, is_product, partial_transpose, realize, unit_vector, DensityOperator, Side,
    Split, StateSpec,
};

pub const PPT_TOL: f64 = 1e-10;
pub const ENTANGLED_TOL: f64 = 1e-8;
pub const CLASSICAL_CHSH_BOUND: f64 = 2.0;
pub const PRODUCT_TOL: f64 = 1e-10;

/// Grid points per spherical angle in the coarse search stage.
pub const GRID_POINTS: usize = 16;
pub const MAX_ITERATIONS: usize = 10_000;
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Bloch directions for A, A′, B, B′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    #[serde(serialize_with = "sig15_slice")]
    pub a: [f64; 3],
    #[serde(serialize_with = "sig15_slice")]
    pub a_prime: [f64; 3],
    #[serde(serialize_with = "sig15_slice")]
    pub b: [f64; 3],
    #[serde(serialize_with = "sig15_slice")]
    pub b_prime: [f64; 3],
}

impl ChshSettings {
    pub fn new(a: [f64; 3], a_prime: [f64; 3], b: [f64; 3], b_prime: [f64; 3]) -> Result<Self> {
        Ok(Self {
            a: unit_vector(a)?,
            a_prime: unit_vector(a_prime)?,
            b: unit_vector(b)?,
            b_prime: unit_vector(b_prime)?,
        })
    }

    /// Twelve reals: a, a′, b, b′ in order.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 12 {
            return Err(Error::Parse(format!(
                "expected 12 components for four Bloch vectors, got {}",
                v.len()
            )));
        }
        let at = |k: usize| [v[3 * k], v[3 * k + 1], v[3 * k + 2]];
        Self::new(at(0), at(1), at(2), at(3))
    }

    fn from_angles(x: &[f64]) -> Self {
        Self {
            a: direction(x[0], x[1]),
            a_prime: direction(x[2], x[3]),
            b: direction(x[4], x[5]),
            b_prime: direction(x[6], x[7]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchReport {
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshResult {
    #[serde(serialize_with = "sig15")]
    pub value: f64,
    pub settings: ChshSettings,
    /// E(AB), E(AB′), E(A′B), E(A′B′).
    #[serde(serialize_with = "sig15_slice")]
    pub correlators: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchReport>,
}

/// |E(AB) − E(AB′)| + |E(A′B) + E(A′B′)|.
pub fn chsh_functional(c: &[f64; 4]) -> f64 {
    (c[0] - c[1]).abs() + (c[2] + c[3]).abs()
}

fn require_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.split() != Split::QUBITS {
        let s = rho.split();
        return Err(Error::UnsupportedSplit(s.left, s.right));
    }
    Ok(())
}

pub fn chsh_value(rho: &DensityOperator, s: &ChshSettings) -> Result<ChshResult> {
    require_qubits(rho)?;
    let corr = |x: [f64; 3], y: [f64; 3]| -> Result<f64> {
        expectation(rho, &kron(&bloch_observable(x)?, &bloch_observable(y)?))
    };
    let correlators = [
        corr(s.a, s.b)?,
        corr(s.a, s.b_prime)?,
        corr(s.a_prime, s.b)?,
        corr(s.a_prime, s.b_prime)?,
    ];
    Ok(ChshResult {
        value: chsh_functional(&correlators),
        settings: *s,
        correlators,
        search: None,
    })
}

/// T_ij = Tr ρ σᵢ⊗σⱼ for i, j ∈ {x, y, z}.
pub fn correlation_tensor(rho: &DensityOperator) -> Result<[[f64; 3]; 3]> {
    require_qubits(rho)?;
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, tij) in row.iter_mut().enumerate() {
            *tij = expectation(rho, &kron(&pauli(i + 1), &pauli(j + 1)))?;
        }
    }
    Ok(t)
}

/// Maximal CHSH value 2√(t₁+t₂) from the two largest eigenvalues of TᵀT.
pub fn horodecki_bound(rho: &DensityOperator) -> Result<f64> {
    let t = correlation_tensor(rho)?;
    let mut m = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            m[i * 3 + j] = (0..3).map(|k| t[k][i] * t[k][j]).sum();
        }
    }
    let e = symmetric_eigenvalues(&m, 3)?;
    Ok(2.0 * (e[1] + e[2]).max(0.0).sqrt())
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn angles(v: [f64; 3]) -> (f64, f64) {
    (v[2].clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

fn apply_transpose(t: &[[f64; 3]; 3], a: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|i| a[i] * t[i][j]).sum();
    }
    out
}

fn bilinear(t: &[[f64; 3]; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let u = apply_transpose(t, a);
    (0..3).map(|j| u[j] * b[j]).sum()
}

fn norm(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalized_or_z(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    if n < 1e-14 {
        [0.0, 0.0, 1.0]
    } else {
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

/// Best b, b′ for fixed a, a′: with u = Tᵀa and v = Tᵀa′ the functional is
/// maximized by b ∥ u+v and b′ ∥ v−u, reaching |u+v| + |u−v|.
fn best_response(t: &[[f64; 3]; 3], a: [f64; 3], a_prime: [f64; 3]) -> (f64, [f64; 3], [f64; 3]) {
    let u = apply_transpose(t, a);
    let v = apply_transpose(t, a_prime);
    let sum = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
    let diff = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
    (
        norm(sum) + norm(diff),
        normalized_or_z(sum),
        normalized_or_z(diff),
    )
}

fn grid_angle(k: usize) -> (f64, f64) {
    let theta = (k / GRID_POINTS) as f64;
    let phi = (k % GRID_POINTS) as f64;
    (
        (theta + 0.5) * PI / GRID_POINTS as f64,
        phi * 2.0 * PI / GRID_POINTS as f64,
    )
}

/// Largest CHSH value over all measurement directions.
///
/// A coarse grid of 16 polar × 16 azimuthal angles for each of a and a′ is
/// scanned with b, b′ set to their closed-form best response; the best grid
/// point then seeds a Nelder–Mead refinement over all eight angles. The grid
/// scan runs in parallel but the winner is chosen by (value, grid index), so
/// the result does not depend on scheduling.
pub fn chsh_maximize(rho: &DensityOperator) -> Result<ChshResult> {
    let t = correlation_tensor(rho)?;
    let per_vector = GRID_POINTS * GRID_POINTS;
    let (best_index, _) = (0..per_vector * per_vector)
        .into_par_iter()
        .map(|k| {
            let (ta, pa) = grid_angle(k / per_vector);
            let (tb, pb) = grid_angle(k % per_vector);
            let (value, _, _) = best_response(&t, direction(ta, pa), direction(tb, pb));
            (k, value)
        })
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |x, y| {
                if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) {
                    y
                } else {
                    x
                }
            },
        );

    let (ta, pa) = grid_angle(best_index / per_vector);
    let (tap, pap) = grid_angle(best_index % per_vector);
    let (_, b, b_prime) = best_response(&t, direction(ta, pa), direction(tap, pap));
    let (tb, pb) = angles(b);
    let (tbp, pbp) = angles(b_prime);
    let start = [ta, pa, tap, pap, tb, pb, tbp, pbp];

    let objective = |x: &[f64]| {
        let s = ChshSettings::from_angles(x);
        -chsh_functional(&[
            bilinear(&t, s.a, s.b),
            bilinear(&t, s.a, s.b_prime),
            bilinear(&t, s.a_prime, s.b),
            bilinear(&t, s.a_prime, s.b_prime),
        ])
    };
    let mut opts = NelderMeadOptions {
        initial_step: PI / GRID_POINTS as f64,
        f_tol: SIMPLEX_TOL,
        max_iterations: MAX_ITERATIONS,
    };
    let first = nelder_mead(objective, &start, &opts);
    // restart from the incumbent with a smaller simplex
    opts.initial_step = 1e-3;
    opts.max_iterations = MAX_ITERATIONS.saturating_sub(first.iterations).max(1);
    let second = nelder_mead(objective, &first.x, &opts);
    let best = if second.value <= first.value {
        &second
    } else {
        &first
    };

    let settings = ChshSettings::from_angles(&best.x);
    let mut result = chsh_value(rho, &settings)?;
    result.search = Some(SearchReport {
        converged: second.converged,
        iterations: first.iterations + second.iterations,
        evaluations: first.evaluations + second.evaluations + per_vector * per_vector,
    });
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptReport {
    pub is_ppt: bool,
    #[serde(serialize_with = "sig15")]
    pub min_eigenvalue: f64,
}

/// Splits at which positivity of the partial transpose decides separability.
pub fn ppt_is_decisive(split: Split) -> bool {
    matches!((split.left, split.right), (2, 2) | (2, 3) | (3, 2))
}

pub fn min_partial_transpose_eigenvalue(rho: &DensityOperator) -> Result<f64> {
    min_eigenvalue(&partial_transpose(rho, Side::Right))
}

pub fn ppt_test(rho: &DensityOperator) -> Result<PptReport> {
    let split = rho.split();
    if !ppt_is_decisive(split) {
        return Err(Error::UnsupportedSplit(split.left, split.right));
    }
    let min = min_partial_transpose_eigenvalue(rho)?;
    Ok(PptReport {
        is_ppt: min >= -PPT_TOL,
        min_eigenvalue: min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Separable,
    NonSeparable,
    Entangled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// `product`, `mixture` or `general`.
    pub construction: &'static str,
    pub note: String,
    #[serde(serialize_with = "sig15_opt")]
    pub min_pt_eigenvalue: Option<f64>,
    #[serde(serialize_with = "sig15_opt")]
    pub chsh_best: Option<f64>,
}

pub fn classify(spec: &StateSpec) -> Result<Classification> {
    let rho = realize(spec)?;
    let split = rho.split();
    let min_pt = min_partial_transpose_eigenvalue(&rho)?;
    let chsh = if split == Split::QUBITS {
        Some(chsh_maximize(&rho)?.value)
    } else {
        None
    };
    let evidence = |verdict, note: String| Classification {
        verdict,
        construction: spec.kind(),
        note,
        min_pt_eigenvalue: Some(min_pt),
        chsh_best: chsh,
    };

    Ok(match spec {
        StateSpec::Product { .. } => evidence(Verdict::Separable, "product construction".into()),
        StateSpec::Mixture(terms) => {
            if is_product(&rho, PRODUCT_TOL) {
                evidence(
                    Verdict::Separable,
                    format!(
                        "mixture of {} terms equals the product of its marginals",
                        terms.len()
                    ),
                )
            } else {
                evidence(
                    Verdict::NonSeparable,
                    format!("convex mixture of {} product terms", terms.len()),
                )
            }
        }
        StateSpec::General(_) => {
            let chsh_violated = chsh.is_some_and(|c| c > CLASSICAL_CHSH_BOUND + ENTANGLED_TOL);
            if min_pt < -ENTANGLED_TOL || chsh_violated {
                let mut why = Vec::new();
                if min_pt < -ENTANGLED_TOL {
                    why.push(format!("partial transpose has eigenvalue {min_pt:.6}"));
                }
                if let (true, Some(c)) = (chsh_violated, chsh) {
                    why.push(format!("CHSH value {c:.6} exceeds 2"));
                }
                evidence(Verdict::Entangled, why.join("; "))
            } else if is_product(&rho, PRODUCT_TOL) {
                evidence(
                    Verdict::Separable,
                    "equals the product of its marginals".into(),
                )
            } else if ppt_is_decisive(split) {
                evidence(
                    Verdict::NonSeparable,
                    "PPT, hence unentangled at this dimension".into(),
                )
            } else {
                evidence(
                    Verdict::NonSeparable,
                    "undecided beyond CHSH: PPT is not decisive at this dimension".into(),
                )
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{Sampler, DEFAULT_SEED};
    use crate::state::{bell_state, werner, BellKind, MixtureTerm};
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    const Z: [f64; 3] = [0.0, 0.0, 1.0];
    const X: [f64; 3] = [1.0, 0.0, 0.0];

    fn phi_plus() -> DensityOperator {
        bell_state(BellKind::PhiPlus)
    }

    fn ket00() -> DensityOperator {
        realize(&StateSpec::product(
            DensityOperator::qubit(Z).unwrap(),
            DensityOperator::qubit(Z).unwrap(),
        ))
        .unwrap()
    }

    fn werner_rho(p: f64) -> DensityOperator {
        realize(&werner(p).unwrap()).unwrap()
    }

    #[test]
    fn chsh_value_examples() {
        let h = FRAC_1_SQRT_2;
        let s = ChshSettings::new(Z, X, [h, 0.0, h], [h, 0.0, -h]).unwrap();
        let r = chsh_value(&phi_plus(), &s).unwrap();
        assert!((r.value - 2.0 * SQRT_2).abs() < 1e-12);

        let s = ChshSettings::new(Z, X, Z, X).unwrap();
        let r = chsh_value(&ket00(), &s).unwrap();
        assert_eq!(r.correlators, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.value, 1.0);

        let s = ChshSettings::new(Z, Z, Z, Z).unwrap();
        let r = chsh_value(&phi_plus(), &s).unwrap();
        assert!((r.value - 2.0).abs() < 1e-15);
        assert!((chsh_functional(&r.correlators) - r.value).abs() <= 1e-12);
    }

    #[test]
    fn chsh_rejects_non_qubits() {
        let rho = DensityOperator::maximally_mixed(Split::new(2, 3).unwrap());
        let s = ChshSettings::new(Z, Z, Z, Z).unwrap();
        assert!(matches!(
            chsh_value(&rho, &s),
            Err(Error::UnsupportedSplit(2, 3))
        ));
        assert!(chsh_maximize(&rho).is_err());
        assert!(horodecki_bound(&rho).is_err());
        assert!(ChshSettings::new([1.0, 1.0, 0.0], Z, Z, Z).is_err());
        assert!(ChshSettings::from_slice(&[0.0; 11]).is_err());
    }

    #[test]
    fn horodecki_examples() {
        let t = correlation_tensor(&phi_plus()).unwrap();
        assert_eq!(t, [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((horodecki_bound(&phi_plus()).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
        for p in [0.1, 0.5, 0.8] {
            let b = horodecki_bound(&werner_rho(p)).unwrap();
            assert!((b - 2.0 * SQRT_2 * p).abs() < 1e-12);
        }
        assert!((horodecki_bound(&ket00()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn maximize_examples() {
        let r = chsh_maximize(&phi_plus()).unwrap();
        assert!((r.value - 2.0 * SQRT_2).abs() < 1e-6);
        assert!(r.search.unwrap().converged);
        let r = chsh_maximize(&werner_rho(0.8)).unwrap();
        assert!((r.value - 2.0 * SQRT_2 * 0.8).abs() < 1e-6);
        let mut s = Sampler::new(21);
        let prod = realize(&StateSpec::product(s.pure_state(2), s.pure_state(2))).unwrap();
        assert!((chsh_maximize(&prod).unwrap().value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn maximize_is_deterministic() {
        let rho = Sampler::new(4).bipartite_state(Split::QUBITS);
        assert_eq!(chsh_maximize(&rho).unwrap(), chsh_maximize(&rho).unwrap());
    }

    #[test]
    fn maximize_agrees_with_closed_form() {
        let mut s = Sampler::new(DEFAULT_SEED);
        for _ in 0..30 {
            let rho = s.bipartite_state(Split::QUBITS);
            let found = chsh_maximize(&rho).unwrap().value;
            let exact = horodecki_bound(&rho).unwrap();
            assert!((found - exact).abs() <= 1e-6, "{found} vs {exact}");
            assert!(found <= 2.0 * SQRT_2 + 1e-6);
        }
    }

    #[test]
    fn ppt_examples() {
        let r = ppt_test(&phi_plus()).unwrap();
        assert!(!r.is_ppt);
        assert!((r.min_eigenvalue + 0.5).abs() < 1e-12);
        let r = ppt_test(&werner_rho(0.25)).unwrap();
        assert!(r.is_ppt);
        assert!((r.min_eigenvalue - 0.0625).abs() < 1e-12);
        assert!(ppt_test(&ket00()).unwrap().is_ppt);
        let big = DensityOperator::maximally_mixed(Split::new(3, 3).unwrap());
        assert!(matches!(ppt_test(&big), Err(Error::UnsupportedSplit(3, 3))));
    }

    #[test]
    fn classify_examples() {
        let plus = DensityOperator::qubit(X).unwrap();
        let c = classify(&StateSpec::product(
            DensityOperator::qubit(Z).unwrap(),
            plus,
        ))
        .unwrap();
        assert_eq!(c.verdict, Verdict::Separable);

        let diag = |p: f64| {
            DensityOperator::local(crate::linalg::CMatrix::diag_real(&[p, 1.0 - p])).unwrap()
        };
        let dice = StateSpec::mixture(vec![
            MixtureTerm {
                weight: 0.25,
                left: diag(0.5),
                right: diag(0.5),
            },
            MixtureTerm {
                weight: 0.75,
                left: diag(2.0 / 3.0),
                right: diag(2.0 / 3.0),
            },
        ])
        .unwrap();
        let c = classify(&dice).unwrap();
        assert_eq!(c.verdict, Verdict::NonSeparable);
        assert_eq!(c.construction, "mixture");

        let c = classify(&StateSpec::general(phi_plus())).unwrap();
        assert_eq!(c.verdict, Verdict::Entangled);
        assert!(c.min_pt_eigenvalue.unwrap() < -0.49);
        assert!(c.chsh_best.unwrap() > 2.8);
    }

    #[test]
    fn classify_general_states() {
        let c = classify(&werner(0.2).unwrap()).unwrap();
        assert_eq!(c.verdict, Verdict::NonSeparable);
        assert!(c.note.starts_with("PPT"));
        // entangled without CHSH violation
        let c = classify(&werner(0.5).unwrap()).unwrap();
        assert_eq!(c.verdict, Verdict::Entangled);
        assert!(c.chsh_best.unwrap() < 2.0);
        // maximally mixed state is a product state
        let c = classify(&werner(0.0).unwrap()).unwrap();
        assert_eq!(c.verdict, Verdict::Separable);
        // beyond the decisive dimensions a PPT state stays undecided
        let mut s = Sampler::new(9);
        let spec = s.mixture_spec(Split::new(3, 3).unwrap(), 4);
        let general = StateSpec::general(realize(&spec).unwrap());
        let c = classify(&general).unwrap();
        assert_eq!(c.verdict, Verdict::NonSeparable);
        assert!(c.note.starts_with("undecided"));
        assert!(c.chsh_best.is_none());
    }

    #[test]
    fn mixtures_of_products_respect_chsh() {
        let mut s = Sampler::new(DEFAULT_SEED ^ 1);
        for _ in 0..100 {
            let rho = realize(&s.mixture_spec(Split::QUBITS, 8)).unwrap();
            let settings = ChshSettings::new(
                s.unit_vector(),
                s.unit_vector(),
                s.unit_vector(),
                s.unit_vector(),
            )
            .unwrap();
            assert!(chsh_value(&rho, &settings).unwrap().value <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn serialized_result_shape() {
        let r = chsh_maximize(&phi_plus()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["value"].as_f64().is_some());
        assert_eq!(v["correlators"].as_array().unwrap().len(), 4);
        assert_eq!(v["settings"]["b_prime"].as_array().unwrap().len(), 3);
        let c = serde_json::to_value(classify(&werner(0.2).unwrap()).unwrap()).unwrap();
        assert_eq!(c["verdict"], "NonSeparable");
    }
}
