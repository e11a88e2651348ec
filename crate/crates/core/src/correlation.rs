//! Expectation values, variances and the conditional covariance
//! cov(A, B | ρ) = E(AB | ρ) − E(A | ρ)·E(B | ρ).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, CMatrix};
use crate::report::sig15;
use crate::state::{embed, realize, DensityOperator, LocalObservable, Side, StateSpec};

/// Imaginary residue beyond which the operator is reported as non-Hermitian.
pub const IMAG_ERROR_TOL: f64 = 1e-8;
pub const COMMUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    #[serde(serialize_with = "sig15")]
    pub e_a: f64,
    #[serde(serialize_with = "sig15")]
    pub e_b: f64,
    #[serde(serialize_with = "sig15")]
    pub e_ab: f64,
    #[serde(serialize_with = "sig15")]
    pub cov: f64,
    #[serde(serialize_with = "sig15")]
    pub var_a: f64,
    #[serde(serialize_with = "sig15")]
    pub var_b: f64,
}

/// Operator ordering used for the product AB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    /// Require [A, B] = 0.
    #[default]
    Commuting,
    /// Use ½(AB + BA) regardless of commutation.
    Symmetrized,
}

fn check_dims(rho: &DensityOperator, op: &CMatrix) -> Result<()> {
    if !op.is_square() || op.rows() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} observable for a {}-dimensional state",
            op.rows(),
            op.cols(),
            rho.dim()
        )));
    }
    Ok(())
}

/// E(op | ρ) = Tr ρ·op.
pub fn expectation(rho: &DensityOperator, op: &CMatrix) -> Result<f64> {
    check_dims(rho, op)?;
    let z = rho.matrix().trace_product(op)?;
    if z.im.abs() > IMAG_ERROR_TOL {
        return Err(Error::ImaginaryResidue(z.im.abs()));
    }
    Ok(z.re)
}

pub fn variance(rho: &DensityOperator, op: &CMatrix) -> Result<f64> {
    check_dims(rho, op)?;
    let mean = expectation(rho, op)?;
    let square = expectation(rho, &(op * op))?;
    Ok(square - mean * mean)
}

pub fn covariance(rho: &DensityOperator, a: &CMatrix, b: &CMatrix) -> Result<CorrelationReport> {
    covariance_with(rho, a, b, Ordering::Commuting)
}

pub fn covariance_with(
    rho: &DensityOperator,
    a: &CMatrix,
    b: &CMatrix,
    ordering: Ordering,
) -> Result<CorrelationReport> {
    check_dims(rho, a)?;
    check_dims(rho, b)?;
    let ab = a * b;
    let product = match ordering {
        Ordering::Commuting => {
            let norm = commutator(a, b)?.max_abs();
            if norm > COMMUTE_TOL {
                return Err(Error::NonCommuting(norm));
            }
            ab
        }
        Ordering::Symmetrized => (&ab + &(b * a)).scale_real(0.5),
    };
    let e_a = expectation(rho, a)?;
    let e_b = expectation(rho, b)?;
    let e_ab = expectation(rho, &product)?;
    Ok(CorrelationReport {
        e_a,
        e_b,
        e_ab,
        cov: e_ab - e_a * e_b,
        var_a: variance(rho, a)?,
        var_b: variance(rho, b)?,
    })
}

/// Covariance of local observables after embedding them as Â⊗I and I⊗B̂.
pub fn local_covariance(
    rho: &DensityOperator,
    a: &LocalObservable,
    b: &LocalObservable,
) -> Result<CorrelationReport> {
    let split = rho.split();
    covariance(rho, &embed(a, split)?, &embed(b, split)?)
}

/// E(AB | ρ) for ρ = Σ pᵢ ρᵢ⊗ρ̃ᵢ, evaluated as Σ pᵢ E(A | ρᵢ)·E(B | ρ̃ᵢ)
/// without forming the joint state.
pub fn mixture_expectation(
    spec: &StateSpec,
    a: &LocalObservable,
    b: &LocalObservable,
) -> Result<f64> {
    if a.side() != Side::Left || b.side() != Side::Right {
        return Err(Error::DimensionMismatch(
            "mixture expectation takes a left and a right observable".into(),
        ));
    }
    spec.validate()?;
    let local = |rho: &DensityOperator, obs: &LocalObservable| expectation(rho, obs.op());
    match spec {
        StateSpec::Product { left, right } => Ok(local(left, a)? * local(right, b)?),
        StateSpec::Mixture(terms) => terms.iter().try_fold(0.0, |acc, t| {
            Ok(acc + t.weight * local(&t.left, a)? * local(&t.right, b)?)
        }),
        StateSpec::General(_) => Err(Error::WrongSpecKind(
            "mixture expectation needs a product or mixture construction".into(),
        )),
    }
}

/// E(Â⊗B̂ | ρ) on the realized joint state; the direct route that
/// [`mixture_expectation`] must agree with.
pub fn joint_expectation(
    spec: &StateSpec,
    a: &LocalObservable,
    b: &LocalObservable,
) -> Result<f64> {
    let rho = realize(spec)?;
    expectation(&rho, &crate::linalg::kron(a.op(), b.op()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli, C64};
    use crate::random::{Sampler, DEFAULT_SEED};
    use crate::state::{basis_projector, bell_state, BellKind, MixtureTerm, Split};
    use proptest::prelude::*;

    fn ket(k: usize) -> DensityOperator {
        DensityOperator::local(basis_projector(2, k)).unwrap()
    }

    fn classical_pair() -> StateSpec {
        StateSpec::mixture(vec![
            MixtureTerm {
                weight: 0.5,
                left: ket(0),
                right: ket(0),
            },
            MixtureTerm {
                weight: 0.5,
                left: ket(1),
                right: ket(1),
            },
        ])
        .unwrap()
    }

    fn z_left() -> CMatrix {
        kron(&pauli(3), &CMatrix::identity(2))
    }

    fn z_right() -> CMatrix {
        kron(&CMatrix::identity(2), &pauli(3))
    }

    #[test]
    fn expectation_examples() {
        let rho = realize(&StateSpec::product(ket(0), ket(0))).unwrap();
        assert_eq!(expectation(&rho, &z_left()).unwrap(), 1.0);
        let mixed = DensityOperator::maximally_mixed(Split::QUBITS);
        assert_eq!(
            expectation(&mixed, &kron(&pauli(3), &pauli(3))).unwrap(),
            0.0
        );
        // |Φ⁺⟩ = (|00⟩+|11⟩)/√2 has σz⊗σz eigenvalue +1
        let phi = bell_state(BellKind::PhiPlus);
        assert!((expectation(&phi, &kron(&pauli(3), &pauli(3))).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_errors() {
        let rho = DensityOperator::maximally_mixed(Split::QUBITS);
        assert!(matches!(
            expectation(&rho, &pauli(3)),
            Err(Error::DimensionMismatch(_))
        ));
        // anti-Hermitian part seen by ρ = |0⟩⟨0|⊗|0⟩⟨0|
        let pure = realize(&StateSpec::product(ket(0), ket(0))).unwrap();
        let skew = CMatrix::identity(4).scale(C64::new(0.0, 1e-6));
        assert!(matches!(
            expectation(&pure, &skew),
            Err(Error::ImaginaryResidue(_))
        ));
    }

    #[test]
    fn covariance_examples() {
        let rho = realize(&classical_pair()).unwrap();
        let r = covariance(&rho, &z_left(), &z_right()).unwrap();
        assert_eq!((r.e_a, r.e_b, r.e_ab, r.cov), (0.0, 0.0, 1.0, 1.0));

        let phi = bell_state(BellKind::PhiPlus);
        let r = covariance(&phi, &z_left(), &z_right()).unwrap();
        assert!((r.cov - 1.0).abs() < 1e-15);

        let prod = realize(&StateSpec::product(
            DensityOperator::qubit([0.3, 0.4, 0.5]).unwrap(),
            DensityOperator::qubit([-0.6, 0.0, 0.8]).unwrap(),
        ))
        .unwrap();
        let a = LocalObservable::left(pauli(1)).unwrap();
        let b = LocalObservable::right(pauli(3)).unwrap();
        assert!(local_covariance(&prod, &a, &b).unwrap().cov.abs() < 1e-15);
    }

    #[test]
    fn non_commuting_pairs_need_opt_in() {
        let rho = DensityOperator::qubit([0.0, 0.0, 1.0]).unwrap();
        let err = covariance(&rho, &pauli(1), &pauli(3)).unwrap_err();
        assert!(matches!(err, Error::NonCommuting(_)));
        // ½{σx, σz} = 0
        let r = covariance_with(&rho, &pauli(1), &pauli(3), Ordering::Symmetrized).unwrap();
        assert_eq!(r.e_ab, 0.0);
        assert_eq!(r.cov, 0.0);
    }

    #[test]
    fn mixture_expectation_examples() {
        let z_a = LocalObservable::left(pauli(3)).unwrap();
        let z_b = LocalObservable::right(pauli(3)).unwrap();
        assert_eq!(
            mixture_expectation(&classical_pair(), &z_a, &z_b).unwrap(),
            1.0
        );

        let l = DensityOperator::qubit([0.0, 0.0, 0.5]).unwrap();
        let r = DensityOperator::qubit([0.0, 0.0, -0.25]).unwrap();
        let prod = StateSpec::product(l.clone(), r.clone());
        let got = mixture_expectation(&prod, &z_a, &z_b).unwrap();
        assert!((got - 0.5 * -0.25).abs() < 1e-15);

        // dice pairs as diagonal qubits with projector diag(1, 0)
        let diag = |p: f64| DensityOperator::local(CMatrix::diag_real(&[p, 1.0 - p])).unwrap();
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
        let proj = CMatrix::diag_real(&[1.0, 0.0]);
        let got = mixture_expectation(
            &dice,
            &LocalObservable::left(proj.clone()).unwrap(),
            &LocalObservable::right(proj).unwrap(),
        )
        .unwrap();
        assert!((got - 19.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_expectation_rejects_general_and_swapped_sides() {
        let z_a = LocalObservable::left(pauli(3)).unwrap();
        let z_b = LocalObservable::right(pauli(3)).unwrap();
        let general = StateSpec::general(bell_state(BellKind::PhiPlus));
        assert!(matches!(
            mixture_expectation(&general, &z_a, &z_b),
            Err(Error::WrongSpecKind(_))
        ));
        assert!(mixture_expectation(&classical_pair(), &z_b, &z_a).is_err());
    }

    #[test]
    fn variance_examples() {
        let rest = DensityOperator::qubit([0.2, 0.1, 0.0]).unwrap();
        let eigen = realize(&StateSpec::product(ket(0), rest.clone())).unwrap();
        assert_eq!(variance(&eigen, &z_left()).unwrap(), 0.0);
        let flat = realize(&StateSpec::product(
            DensityOperator::maximally_mixed(Split::local(2)),
            rest,
        ))
        .unwrap();
        assert!((variance(&flat, &z_left()).unwrap() - 1.0).abs() < 1e-15);
        assert!(variance(&flat, &CMatrix::identity(4)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn report_keys_and_precision() {
        let r = CorrelationReport {
            e_a: 1.0 / 3.0,
            e_b: 0.0,
            e_ab: 0.1,
            cov: -2.0e-17,
            var_a: 1.0,
            var_b: 0.25,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(
            text,
            r#"{"e_a":0.333333333333333,"e_b":0.0,"e_ab":0.1,"cov":-2e-17,"var_a":1.0,"var_b":0.25}"#
        );
    }

    #[test]
    fn randomized_mixtures_match_direct_trace() {
        let mut s = Sampler::new(DEFAULT_SEED);
        for _ in 0..100 {
            let split = Split::new(2, 3).unwrap();
            let spec = s.mixture_spec(split, 8);
            let a = LocalObservable::left(s.hermitian(2)).unwrap();
            let b = LocalObservable::right(s.hermitian(3)).unwrap();
            let via_terms = mixture_expectation(&spec, &a, &b).unwrap();
            let direct = joint_expectation(&spec, &a, &b).unwrap();
            assert!((via_terms - direct).abs() <= 1e-10);
        }
    }

    proptest! {
        #[test]
        fn bilinearity_on_products(seed in any::<u64>(), k in -3.0..3.0f64, n in -3.0..3.0f64,
                                   m in -3.0..3.0f64, l in -3.0..3.0f64) {
            let mut s = Sampler::new(seed);
            let split = Split::new(2, 2).unwrap();
            let rho = realize(&s.product_spec(split)).unwrap();
            let a = embed(&LocalObservable::left(s.hermitian(2)).unwrap(), split).unwrap();
            let b = embed(&LocalObservable::right(s.hermitian(2)).unwrap(), split).unwrap();
            let f = &a.scale_real(k) + &b.scale_real(n);
            let g = &a.scale_real(m) + &b.scale_real(l);
            let lhs = covariance(&rho, &f, &g).unwrap().cov;
            let rhs = k * m * variance(&rho, &a).unwrap() + n * l * variance(&rho, &b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn self_covariance_is_variance(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let rho = s.bipartite_state(Split::QUBITS);
            let a = s.hermitian(4);
            let r = covariance(&rho, &a, &a).unwrap();
            prop_assert!((r.cov - variance(&rho, &a).unwrap()).abs() <= 1e-10);
            prop_assert!(r.var_a >= -1e-10);
        }

        #[test]
        fn products_factorize(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let split = Split::new(3, 2).unwrap();
            let rho = realize(&s.product_spec(split)).unwrap();
            let a = LocalObservable::left(s.hermitian(3)).unwrap();
            let b = LocalObservable::right(s.hermitian(2)).unwrap();
            let r = local_covariance(&rho, &a, &b).unwrap();
            prop_assert!((r.e_ab - r.e_a * r.e_b).abs() <= 1e-10);
        }
    }
}
