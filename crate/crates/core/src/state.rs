//! Bipartite density operators, their algebraic construction, and local
//! observables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, CMatrix, C64, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const WEIGHT_TOL: f64 = 1e-12;
pub const MAX_FACTOR_DIM: usize = 16;

/// Dimensions (d₁, d₂) of the two factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Split {
    pub left: usize,
    pub right: usize,
}

impl Split {
    pub const QUBITS: Split = Split { left: 2, right: 2 };

    pub fn new(left: usize, right: usize) -> Result<Self> {
        if left == 0 || right == 0 || left > MAX_FACTOR_DIM || right > MAX_FACTOR_DIM {
            return Err(Error::UnsupportedSplit(left, right));
        }
        Ok(Self { left, right })
    }

    /// Split of a single-system operator, viewed as `d x 1`.
    pub fn local(d: usize) -> Self {
        Self { left: d, right: 1 }
    }

    pub fn dim(&self) -> usize {
        self.left * self.right
    }

    pub fn side_dim(&self, side: Side) -> usize {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }
}

impl From<[usize; 2]> for Split {
    fn from([left, right]: [usize; 2]) -> Self {
        Self { left, right }
    }
}

impl From<Split> for [usize; 2] {
    fn from(s: Split) -> Self {
        [s.left, s.right]
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.left, self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Hermitian, positive semidefinite, unit-trace matrix on H₁⊗H₂.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityOperator {
    matrix: CMatrix,
    split: Split,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, split: Split) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != split.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for split {split}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {defect:.3e})"
            )));
        }
        let tr = matrix.trace();
        if tr.im.abs() > TRACE_TOL || (tr.re - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = linalg::min_eigenvalue(&matrix)?;
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix, split })
    }

    /// A state of a single system of dimension `matrix.rows()`.
    pub fn local(matrix: CMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new(matrix, Split::local(d))
    }

    /// Pure state |ψ⟩⟨ψ| from an unnormalized vector.
    pub fn pure(vector: &[C64], split: Split) -> Result<Self> {
        let norm: f64 = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<C64> = vector.iter().map(|z| z / norm).collect();
        Self::new(hermitize(CMatrix::projector(&v)), split)
    }

    /// Qubit state (I + n·σ)/2 for a Bloch vector with ‖n‖ ≤ 1.
    pub fn qubit(bloch: [f64; 3]) -> Result<Self> {
        let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-10 {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {norm} exceeds 1"
            )));
        }
        let mut m = linalg::pauli(0);
        for (k, &n) in bloch.iter().enumerate() {
            m = &m + &linalg::pauli(k + 1).scale_real(n);
        }
        Self::local(m.scale_real(0.5))
    }

    pub fn maximally_mixed(split: Split) -> Self {
        let d = split.dim();
        Self {
            matrix: CMatrix::identity(d).scale_real(1.0 / d as f64),
            split,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// Average M with M† to remove rounding-level anti-Hermitian parts.
pub(crate) fn hermitize(m: CMatrix) -> CMatrix {
    (&m + &m.adjoint()).scale_real(0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureTerm {
    pub weight: f64,
    pub left: DensityOperator,
    pub right: DensityOperator,
}

/// How a bipartite state was put together.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Product {
        left: DensityOperator,
        right: DensityOperator,
    },
    Mixture(Vec<MixtureTerm>),
    General(DensityOperator),
}

impl StateSpec {
    pub fn product(left: DensityOperator, right: DensityOperator) -> Self {
        StateSpec::Product { left, right }
    }

    /// Validated convex mixture Σ pᵢ ρᵢ⊗ρ̃ᵢ. A single term of weight one is
    /// returned as a product.
    pub fn mixture(terms: Vec<MixtureTerm>) -> Result<Self> {
        let spec = StateSpec::Mixture(terms);
        spec.validate()?;
        match spec {
            StateSpec::Mixture(mut terms) if terms.len() == 1 => {
                let t = terms.pop().expect("one term");
                Ok(StateSpec::Product {
                    left: t.left,
                    right: t.right,
                })
            }
            other => Ok(other),
        }
    }

    pub fn general(rho: DensityOperator) -> Self {
        StateSpec::General(rho)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            StateSpec::Product { .. } => "product",
            StateSpec::Mixture(_) => "mixture",
            StateSpec::General(_) => "general",
        }
    }

    pub fn split(&self) -> Split {
        match self {
            StateSpec::Product { left, right } => Split {
                left: left.dim(),
                right: right.dim(),
            },
            StateSpec::Mixture(terms) => terms.first().map_or(Split::local(1), |t| Split {
                left: t.left.dim(),
                right: t.right.dim(),
            }),
            StateSpec::General(rho) => rho.split(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Product { left, right } => Split::new(left.dim(), right.dim()).map(|_| ()),
            StateSpec::General(_) => Ok(()),
            StateSpec::Mixture(terms) => {
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
                let split = Split::new(first.left.dim(), first.right.dim())?;
                let mut total = 0.0;
                for t in terms {
                    if t.left.dim() != split.left || t.right.dim() != split.right {
                        return Err(Error::DimensionMismatch(format!(
                            "mixture term {}x{} in a {split} mixture",
                            t.left.dim(),
                            t.right.dim()
                        )));
                    }
                    let ok = if terms.len() > 1 {
                        t.weight > 0.0 && t.weight < 1.0
                    } else {
                        t.weight > 0.0
                    };
                    if !ok || !t.weight.is_finite() {
                        return Err(Error::OutOfRange {
                            name: "mixture weight",
                            value: t.weight,
                            range: "(0, 1)",
                        });
                    }
                    total += t.weight;
                }
                if (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::InvalidState(format!(
                        "mixture weights sum to {total}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// The density operator a construction describes.
pub fn realize(spec: &StateSpec) -> Result<DensityOperator> {
    spec.validate()?;
    match spec {
        StateSpec::Product { left, right } => {
            let split = Split::new(left.dim(), right.dim())?;
            DensityOperator::new(kron(left.matrix(), right.matrix()), split)
        }
        StateSpec::Mixture(terms) => {
            let split = spec.split();
            let mut acc = CMatrix::zeros(split.dim(), split.dim());
            for t in terms {
                acc = &acc + &kron(t.left.matrix(), t.right.matrix()).scale_real(t.weight);
            }
            DensityOperator::new(hermitize(acc), split)
        }
        StateSpec::General(rho) => Ok(rho.clone()),
    }
}

/// Hermitian operator acting on one factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalObservable {
    op: CMatrix,
    side: Side,
}

impl LocalObservable {
    pub fn new(op: CMatrix, side: Side) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "observable is {}x{}",
                op.rows(),
                op.cols()
            )));
        }
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { op, side })
    }

    pub fn left(op: CMatrix) -> Result<Self> {
        Self::new(op, Side::Left)
    }

    pub fn right(op: CMatrix) -> Result<Self> {
        Self::new(op, Side::Right)
    }

    pub fn op(&self) -> &CMatrix {
        &self.op
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

/// Â⊗I for the left factor, I⊗B̂ for the right.
pub fn embed(obs: &LocalObservable, split: Split) -> Result<CMatrix> {
    let expected = split.side_dim(obs.side);
    if obs.op.rows() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{:?} observable of dimension {} for split {split}",
            obs.side,
            obs.op.rows()
        )));
    }
    Ok(match obs.side {
        Side::Left => kron(&obs.op, &CMatrix::identity(split.right)),
        Side::Right => kron(&CMatrix::identity(split.left), &obs.op),
    })
}

fn partial_transpose_matrix(m: &CMatrix, split: Split, side: Side) -> CMatrix {
    let (d1, d2) = (split.left, split.right);
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    for i1 in 0..d1 {
        for i2 in 0..d2 {
            for j1 in 0..d1 {
                for j2 in 0..d2 {
                    let v = m[(i1 * d2 + i2, j1 * d2 + j2)];
                    let (r, c) = match side {
                        Side::Left => (j1 * d2 + i2, i1 * d2 + j2),
                        Side::Right => (i1 * d2 + j2, j1 * d2 + i2),
                    };
                    out[(r, c)] = v;
                }
            }
        }
    }
    out
}

/// Transpose on the indices of one factor only.
pub fn partial_transpose(rho: &DensityOperator, side: Side) -> CMatrix {
    partial_transpose_matrix(rho.matrix(), rho.split(), side)
}

/// Partial transpose of an arbitrary square matrix on `split`; an involution.
pub fn partial_transpose_raw(m: &CMatrix, split: Split, side: Side) -> Result<CMatrix> {
    if !m.is_square() || m.rows() != split.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for split {split}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(partial_transpose_matrix(m, split, side))
}

/// Reduced state of the factor that is kept; `traced` is traced out.
pub fn partial_trace(rho: &DensityOperator, traced: Side) -> DensityOperator {
    let Split {
        left: d1,
        right: d2,
    } = rho.split();
    let m = rho.matrix();
    let kept = match traced {
        Side::Left => d2,
        Side::Right => d1,
    };
    let mut out = CMatrix::zeros(kept, kept);
    match traced {
        Side::Right => {
            for i in 0..d1 {
                for j in 0..d1 {
                    out[(i, j)] = (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum();
                }
            }
        }
        Side::Left => {
            for i in 0..d2 {
                for j in 0..d2 {
                    out[(i, j)] = (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum();
                }
            }
        }
    }
    DensityOperator {
        matrix: hermitize(out),
        split: Split::local(kept),
    }
}

/// Whether ρ equals the product of its marginals to within `tol`.
pub fn is_product(rho: &DensityOperator, tol: f64) -> bool {
    let a = partial_trace(rho, Side::Right);
    let b = partial_trace(rho, Side::Left);
    kron(a.matrix(), b.matrix()).approx_eq(rho.matrix(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl FromStr for BellKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" => Ok(BellKind::PhiPlus),
            "phi-" => Ok(BellKind::PhiMinus),
            "psi+" => Ok(BellKind::PsiPlus),
            "psi-" => Ok(BellKind::PsiMinus),
            other => Err(Error::Parse(format!("unknown Bell state `{other}`"))),
        }
    }
}

pub fn bell_vector(kind: BellKind) -> [C64; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match kind {
        BellKind::PhiPlus => [h, ZERO, ZERO, h],
        BellKind::PhiMinus => [h, ZERO, ZERO, -h],
        BellKind::PsiPlus => [ZERO, h, h, ZERO],
        BellKind::PsiMinus => [ZERO, h, -h, ZERO],
    }
}

pub fn bell_state(kind: BellKind) -> DensityOperator {
    // entries are exactly 0 or ±1/2
    let mut m = CMatrix::projector(&bell_vector(kind));
    for i in 0..4 {
        for j in 0..4 {
            let z = m[(i, j)];
            m[(i, j)] = C64::new((z.re * 2.0).round() / 2.0, 0.0);
        }
    }
    DensityOperator {
        matrix: m,
        split: Split::QUBITS,
    }
}

/// p|Ψ⁻⟩⟨Ψ⁻| + (1−p)I/4.
pub fn werner(p: f64) -> Result<StateSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "Werner weight p",
            value: p,
            range: "[0, 1]",
        });
    }
    let singlet = bell_state(BellKind::PsiMinus).into_matrix().scale_real(p);
    let noise = CMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    Ok(StateSpec::General(DensityOperator::new(
        &singlet + &noise,
        Split::QUBITS,
    )?))
}

/// Unit 3-vector, checked to 1e-10.
pub fn unit_vector(n: [f64; 3]) -> Result<[f64; 3]> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector(norm));
    }
    Ok(n)
}

/// n·σ for a unit Bloch direction.
pub fn bloch_observable(n: [f64; 3]) -> Result<CMatrix> {
    let n = unit_vector(n)?;
    let mut m = CMatrix::zeros(2, 2);
    for (k, &c) in n.iter().enumerate() {
        m = &m + &linalg::pauli(k + 1).scale_real(c);
    }
    Ok(m)
}

/// Basis projector |k⟩⟨k| on dimension d.
pub fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = ONE;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, min_eigenvalue, pauli};
    use proptest::prelude::*;

    fn ket0() -> DensityOperator {
        DensityOperator::local(basis_projector(2, 0)).unwrap()
    }

    fn ket1() -> DensityOperator {
        DensityOperator::local(basis_projector(2, 1)).unwrap()
    }

    #[test]
    fn embed_examples() {
        let z = LocalObservable::left(pauli(3)).unwrap();
        assert!(embed(&z, Split::QUBITS)
            .unwrap()
            .approx_eq(&CMatrix::diag_real(&[1.0, 1.0, -1.0, -1.0]), 0.0));
        let z = LocalObservable::right(pauli(3)).unwrap();
        assert!(embed(&z, Split::QUBITS)
            .unwrap()
            .approx_eq(&CMatrix::diag_real(&[1.0, -1.0, 1.0, -1.0]), 0.0));
        for side in [Side::Left, Side::Right] {
            let id = LocalObservable::new(CMatrix::identity(2), side).unwrap();
            assert!(embed(&id, Split::QUBITS)
                .unwrap()
                .approx_eq(&CMatrix::identity(4), 0.0));
        }
    }

    #[test]
    fn embed_dimension_mismatch() {
        let z = LocalObservable::right(pauli(3)).unwrap();
        let split = Split::new(2, 3).unwrap();
        assert!(matches!(embed(&z, split), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn observable_must_be_hermitian() {
        let m = CMatrix::new(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(
            LocalObservable::left(m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn realize_examples() {
        let p = realize(&StateSpec::product(ket0(), ket0())).unwrap();
        assert!(p
            .matrix()
            .approx_eq(&CMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]), 0.0));

        let mix = StateSpec::mixture(vec![
            MixtureTerm {
                weight: 0.5,
                left: ket0(),
                right: ket0(),
            },
            MixtureTerm {
                weight: 0.5,
                left: ket1(),
                right: ket1(),
            },
        ])
        .unwrap();
        assert!(realize(&mix)
            .unwrap()
            .matrix()
            .approx_eq(&CMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), 1e-15));

        let rho = bell_state(BellKind::PhiPlus);
        assert_eq!(realize(&StateSpec::general(rho.clone())).unwrap(), rho);
    }

    #[test]
    fn single_term_mixture_becomes_product() {
        let spec = StateSpec::mixture(vec![MixtureTerm {
            weight: 1.0,
            left: ket0(),
            right: ket1(),
        }])
        .unwrap();
        assert_eq!(spec.kind(), "product");
    }

    #[test]
    fn mixture_weight_errors() {
        let term = |w| MixtureTerm {
            weight: w,
            left: ket0(),
            right: ket1(),
        };
        assert!(StateSpec::mixture(vec![term(0.5), term(0.4)]).is_err());
        assert!(StateSpec::mixture(vec![term(1.0), term(0.0)]).is_err());
        assert!(StateSpec::mixture(vec![]).is_err());
        let bad_dim = MixtureTerm {
            weight: 0.5,
            left: DensityOperator::maximally_mixed(Split::local(3)),
            right: ket0(),
        };
        assert!(matches!(
            StateSpec::mixture(vec![term(0.5), bad_dim]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn density_operator_rejects_invalid() {
        let not_unit = CMatrix::diag_real(&[1.0, 1.0]);
        assert!(DensityOperator::local(not_unit).is_err());
        let negative = CMatrix::diag_real(&[1.5, -0.5]);
        assert!(DensityOperator::local(negative).is_err());
        let wrong_split = CMatrix::identity(4).scale_real(0.25);
        assert!(matches!(
            DensityOperator::new(wrong_split, Split::new(2, 3).unwrap()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_transpose_examples() {
        let prod = realize(&StateSpec::product(
            DensityOperator::qubit([0.6, 0.0, 0.8]).unwrap(),
            DensityOperator::qubit([0.0, 0.6, 0.0]).unwrap(),
        ))
        .unwrap();
        let before = hermitian_eigenvalues(prod.matrix()).unwrap();
        let after = hermitian_eigenvalues(&partial_transpose(&prod, Side::Right)).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }

        let phi = bell_state(BellKind::PhiPlus);
        let pt = partial_transpose(&phi, Side::Right);
        assert!(pt.is_hermitian(1e-15));
        assert!((min_eigenvalue(&pt).unwrap() + 0.5).abs() < 1e-12);

        let mixed = DensityOperator::maximally_mixed(Split::QUBITS);
        assert!(partial_transpose(&mixed, Side::Right).approx_eq(mixed.matrix(), 0.0));
    }

    #[test]
    fn bell_states_are_normalized_with_mixed_marginals() {
        for kind in [
            BellKind::PhiPlus,
            BellKind::PhiMinus,
            BellKind::PsiPlus,
            BellKind::PsiMinus,
        ] {
            let rho = bell_state(kind);
            assert_eq!(rho.matrix().trace(), ONE);
            for side in [Side::Left, Side::Right] {
                let r = partial_trace(&rho, side);
                assert!(r
                    .matrix()
                    .approx_eq(&CMatrix::identity(2).scale_real(0.5), 1e-15));
            }
            assert!(DensityOperator::new(rho.matrix().clone(), Split::QUBITS).is_ok());
        }
        let phi = bell_state(BellKind::PhiPlus);
        assert_eq!(phi.matrix()[(0, 3)], C64::new(0.5, 0.0));
        assert_eq!(phi.matrix()[(1, 1)], ZERO);
    }

    #[test]
    fn werner_examples() {
        let w0 = realize(&werner(0.0).unwrap()).unwrap();
        assert!(w0
            .matrix()
            .approx_eq(&CMatrix::identity(4).scale_real(0.25), 0.0));
        let w1 = realize(&werner(1.0).unwrap()).unwrap();
        assert!(w1
            .matrix()
            .approx_eq(bell_state(BellKind::PsiMinus).matrix(), 0.0));
        let w = realize(&werner(0.5).unwrap()).unwrap();
        let min = min_eigenvalue(&partial_transpose(&w, Side::Right)).unwrap();
        assert!((min + 0.125).abs() < 1e-12);
        assert!(werner(1.2).is_err());
        assert!(werner(-0.1).is_err());
    }

    #[test]
    fn bloch_observable_examples() {
        assert!(bloch_observable([0.0, 0.0, 1.0])
            .unwrap()
            .approx_eq(&pauli(3), 0.0));
        assert!(bloch_observable([1.0, 0.0, 0.0])
            .unwrap()
            .approx_eq(&pauli(1), 0.0));
        let s = 1.0 / 3f64.sqrt();
        let e = hermitian_eigenvalues(&bloch_observable([s, -s, s]).unwrap()).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        assert!(matches!(
            bloch_observable([1.0, 1.0, 0.0]),
            Err(Error::NonUnitVector(_))
        ));
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
            let m =
                CMatrix::new(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
            hermitize(m)
        })
    }

    proptest! {
        #[test]
        fn partial_transpose_is_involution(m in arb_hermitian(6), left in any::<bool>()) {
            let split = Split::new(2, 3).unwrap();
            let side = if left { Side::Left } else { Side::Right };
            let once = partial_transpose_raw(&m, split, side).unwrap();
            let twice = partial_transpose_raw(&once, split, side).unwrap();
            prop_assert_eq!(twice, m);
        }

        #[test]
        fn local_embeddings_commute(a in arb_hermitian(2), b in arb_hermitian(3)) {
            let split = Split::new(2, 3).unwrap();
            let ea = embed(&LocalObservable::left(a).unwrap(), split).unwrap();
            let eb = embed(&LocalObservable::right(b).unwrap(), split).unwrap();
            let c = linalg::commutator(&ea, &eb).unwrap();
            prop_assert!(c.max_abs() <= 1e-12);
        }
    }
}
