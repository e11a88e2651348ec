//! Derived observables with nonzero covariance on product states.
//!
//! Two constructions: sums and differences of the positions of two
//! particles in a product of Gaussian wavefunctions, and squared collective
//! spin components of two spin-½ particles in a product state. Neither
//! pair of observables is local, so the nonzero covariance says nothing
//! about entanglement of the underlying state, which stays separable.
//!
//! Units: ħ = 1 and S = σ/2.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bellwitness::{classify, Verdict};
use crate::correlation::covariance;
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, CMatrix};
use crate::report::sig15;
use crate::state::{realize, unit_vector, DensityOperator, StateSpec};

/// Grid half-width, in standard deviations, used when none is given.
pub const DEFAULT_COVERAGE_SIGMAS: f64 = 8.0;
pub const MIN_COVERAGE_SIGMAS: f64 = 6.0;
/// Allowed deviation of the raw rectangle-rule mass from one.
pub const MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }
}

/// φ₁(x₁)φ₂(x₂) with |φₖ|² Gaussian of mean μₖ and variance vₖ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianProductState {
    pub mu1: f64,
    pub mu2: f64,
    pub v1: f64,
    pub v2: f64,
    pub grid: Grid,
}

impl GaussianProductState {
    /// Grid spanning 8 standard deviations around both packets.
    pub fn new(mu1: f64, mu2: f64, v1: f64, v2: f64, n_points: usize) -> Result<Self> {
        for (name, v) in [("v1", v1), ("v2", v2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, ∞)",
                });
            }
        }
        let k = DEFAULT_COVERAGE_SIGMAS;
        let (s1, s2) = (v1.sqrt(), v2.sqrt());
        let grid = Grid {
            x_min: (mu1 - k * s1).min(mu2 - k * s2),
            x_max: (mu1 + k * s1).max(mu2 + k * s2),
            n_points,
        };
        Self::with_grid(mu1, mu2, v1, v2, grid)
    }

    pub fn with_grid(mu1: f64, mu2: f64, v1: f64, v2: f64, grid: Grid) -> Result<Self> {
        for (name, v) in [("v1", v1), ("v2", v2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, ∞)",
                });
            }
        }
        if grid.n_points < 2 {
            return Err(Error::GridTooCoarse(format!(
                "{} grid points",
                grid.n_points
            )));
        }
        for (mu, v) in [(mu1, v1), (mu2, v2)] {
            let reach = MIN_COVERAGE_SIGMAS * v.sqrt();
            if grid.x_min > mu - reach || grid.x_max < mu + reach {
                return Err(Error::GridTooCoarse(format!(
                    "grid [{}, {}] does not cover {MIN_COVERAGE_SIGMAS} standard deviations around {mu}",
                    grid.x_min, grid.x_max
                )));
            }
        }
        Ok(Self {
            mu1,
            mu2,
            v1,
            v2,
            grid,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionReport {
    pub n_points: usize,
    #[serde(serialize_with = "sig15")]
    pub cov_ab: f64,
    #[serde(serialize_with = "sig15")]
    pub var_x1: f64,
    #[serde(serialize_with = "sig15")]
    pub var_x2: f64,
    /// |cov(A, B) − (var X₁ − var X₂)| on the grid.
    #[serde(serialize_with = "sig15")]
    pub identity_residual: f64,
    /// |cov(A, B) − (v1 − v2)| against the continuum moments.
    #[serde(serialize_with = "sig15")]
    pub analytic_error: f64,
    #[serde(serialize_with = "sig15")]
    pub raw_mass: f64,
    pub verdict: Verdict,
}

fn gaussian_weights(grid: &Grid, mu: f64, v: f64) -> (Vec<f64>, f64) {
    let norm = 1.0 / (2.0 * std::f64::consts::PI * v).sqrt();
    let raw: Vec<f64> = (0..grid.n_points)
        .map(|i| {
            let d = grid.point(i) - mu;
            norm * (-d * d / (2.0 * v)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let mass = total * grid.spacing();
    (raw.into_iter().map(|w| w / total).collect(), mass)
}

fn position_moments(s: &GaussianProductState) -> PositionReport {
    let g = s.grid;
    let (w1, m1) = gaussian_weights(&g, s.mu1, s.v1);
    let (w2, m2) = gaussian_weights(&g, s.mu2, s.v2);
    let xs: Vec<f64> = (0..g.n_points).map(|i| g.point(i)).collect();

    // Σ over the joint grid of w₁(i)w₂(j)·[1, X₁, X₂, X₁², X₂², A, B, AB];
    // rows are reduced in index order so the sum is deterministic
    let rows: Vec<[f64; 8]> = (0..g.n_points)
        .into_par_iter()
        .map(|i| {
            let x1 = xs[i];
            let mut acc = [0.0; 8];
            for (j, &x2) in xs.iter().enumerate() {
                let w = w1[i] * w2[j];
                let a = x1 + x2;
                let b = x1 - x2;
                let terms = [1.0, x1, x2, x1 * x1, x2 * x2, a, b, a * b];
                for (s, t) in acc.iter_mut().zip(terms) {
                    *s += w * t;
                }
            }
            acc
        })
        .collect();
    let mut m = [0.0; 8];
    for r in &rows {
        for (s, t) in m.iter_mut().zip(r) {
            *s += t;
        }
    }
    let total = m[0];
    let e = |k: usize| m[k] / total;
    let var_x1 = e(3) - e(1) * e(1);
    let var_x2 = e(4) - e(2) * e(2);
    let cov_ab = e(7) - e(5) * e(6);
    PositionReport {
        n_points: g.n_points,
        cov_ab,
        var_x1,
        var_x2,
        identity_residual: (cov_ab - (var_x1 - var_x2)).abs(),
        analytic_error: (cov_ab - (s.v1 - s.v2)).abs(),
        raw_mass: m1 * m2,
        verdict: Verdict::Separable,
    }
}

/// cov(X₁+X₂, X₁−X₂ | Ψ) for a product of Gaussian packets.
///
/// Both derived observables are diagonal in the position grid, so they
/// commute and the covariance is taken directly from the joint weights. The
/// state is a product by construction, hence `verdict` is always separable.
pub fn position_cov_demo(s: &GaussianProductState) -> Result<PositionReport> {
    let r = position_moments(s);
    if (r.raw_mass - 1.0).abs() > MASS_TOL {
        return Err(Error::GridTooCoarse(format!(
            "rectangle-rule mass {} differs from 1 by more than {MASS_TOL}",
            r.raw_mass
        )));
    }
    Ok(r)
}

/// Errors against the continuum result as the grid is refined by doubling,
/// from `start` up to `max` points, over a fixed interval.
pub fn position_convergence(
    s: &GaussianProductState,
    start: usize,
    max: usize,
) -> Vec<PositionReport> {
    let mut out = Vec::new();
    let mut n = start.max(2);
    while n <= max {
        let state = GaussianProductState {
            grid: Grid {
                n_points: n,
                ..s.grid
            },
            ..*s
        };
        out.push(position_moments(&state));
        n *= 2;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn pauli_index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(Error::Parse(format!("unknown axis `{s}`"))),
        }
    }
}

/// (S⊗I + I⊗S)² for the spin component along `axis`.
pub fn collective_spin_squared(axis: Axis) -> CMatrix {
    let s = pauli(axis.pauli_index()).scale_real(0.5);
    let id = CMatrix::identity(2);
    let total = &kron(&s, &id) + &kron(&id, &s);
    &total * &total
}

/// Two spin-½ particles in the pure product state with Bloch vectors c, d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinProductState {
    pub c: [f64; 3],
    pub d: [f64; 3],
}

impl SpinProductState {
    pub fn new(c: [f64; 3], d: [f64; 3]) -> Result<Self> {
        Ok(Self {
            c: unit_vector(c)?,
            d: unit_vector(d)?,
        })
    }

    pub fn spec(&self) -> Result<StateSpec> {
        Ok(StateSpec::product(
            DensityOperator::qubit(self.c)?,
            DensityOperator::qubit(self.d)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinReport {
    #[serde(serialize_with = "sig15")]
    pub cov: f64,
    #[serde(serialize_with = "sig15")]
    pub e_sz2: f64,
    #[serde(serialize_with = "sig15")]
    pub e_sx2: f64,
    #[serde(serialize_with = "sig15")]
    pub closed_form: f64,
    pub verdict: Verdict,
}

/// −(c_y d_y + c_x c_z d_x d_z)/4.
pub fn spin_cov_closed_form(c: [f64; 3], d: [f64; 3]) -> f64 {
    -(c[1] * d[1] + c[0] * c[2] * d[0] * d[2]) / 4.0
}

/// cov(S_z², S_x² | ρ_c⊗ρ_d) by trace, alongside the closed form.
pub fn spin_cov_demo(s: &SpinProductState) -> Result<SpinReport> {
    let spec = s.spec()?;
    let rho = realize(&spec)?;
    let r = covariance(
        &rho,
        &collective_spin_squared(Axis::Z),
        &collective_spin_squared(Axis::X),
    )?;
    Ok(SpinReport {
        cov: r.cov,
        e_sz2: r.e_a,
        e_sx2: r.e_b,
        closed_form: spin_cov_closed_form(s.c, s.d),
        verdict: classify(&spec)?.verdict,
    })
}
