//! Seeded generators for random states and observables.
//!
//! Pure states are normalized complex Gaussian vectors (Haar distributed);
//! mixed states are Ginibre products G·G†/Tr. All draws come from
//! [`SplitMix64`], so a seed fixes every sample.

use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, C64};
use crate::rng::SplitMix64;
use crate::state::{hermitize, DensityOperator, MixtureTerm, Split, StateSpec};

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 0x5EED_C0DE_2012_0001;

pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
        }
    }

    pub fn rng(&mut self) -> &mut SplitMix64 {
        &mut self.rng
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.next_f64()
    }

    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal())
    }

    pub fn unit_vector(&mut self) -> [f64; 3] {
        loop {
            let v = [self.normal(), self.normal(), self.normal()];
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-8 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    pub fn pure_vector(&mut self, d: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..d).map(|_| self.complex_normal()).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-8 {
                return v.into_iter().map(|z| z / n).collect();
            }
        }
    }

    pub fn pure_state(&mut self, d: usize) -> DensityOperator {
        let v = self.pure_vector(d);
        DensityOperator::pure(&v, Split::local(d)).expect("normalized vector")
    }

    /// Random density matrix of full rank (Ginibre ensemble).
    pub fn mixed_matrix(&mut self, d: usize) -> CMatrix {
        let g = CMatrix::new(d, d, (0..d * d).map(|_| self.complex_normal()).collect())
            .expect("square");
        let m = hermitize(&g * &g.adjoint());
        let tr = m.trace().re;
        m.scale_real(1.0 / tr)
    }

    /// Local state: pure or mixed with equal odds.
    pub fn local_state(&mut self, d: usize) -> DensityOperator {
        if self.rng.next_f64() < 0.5 {
            self.pure_state(d)
        } else {
            DensityOperator::local(self.mixed_matrix(d)).expect("Ginibre state")
        }
    }

    pub fn bipartite_state(&mut self, split: Split) -> DensityOperator {
        let d = split.dim();
        let m = if self.rng.next_f64() < 0.3 {
            let v = self.pure_vector(d);
            hermitize(CMatrix::projector(&v))
        } else {
            self.mixed_matrix(d)
        };
        DensityOperator::new(m, split).expect("valid random state")
    }

    /// Hermitian with i.i.d. Gaussian entries (unnormalized GUE).
    pub fn hermitian(&mut self, d: usize) -> CMatrix {
        let g = CMatrix::new(d, d, (0..d * d).map(|_| self.complex_normal()).collect())
            .expect("square");
        hermitize(g)
    }

    /// Hermitian with spectrum inside [−1, 1].
    pub fn bounded_hermitian(&mut self, d: usize) -> CMatrix {
        let h = self.hermitian(d);
        let e = crate::linalg::hermitian_eigenvalues(&h).expect("Hermitian");
        let radius = e[0].abs().max(e[d - 1].abs()).max(1e-12);
        h.scale_real(self.uniform(0.2, 1.0) / radius)
    }

    pub fn product_spec(&mut self, split: Split) -> StateSpec {
        StateSpec::product(self.local_state(split.left), self.local_state(split.right))
    }

    /// Mixture of between 2 and `max_terms` product states.
    pub fn mixture_spec(&mut self, split: Split, max_terms: usize) -> StateSpec {
        let terms = 2 + (self.rng.next_u64() % (max_terms.max(2) as u64 - 1)) as usize;
        let raw: Vec<f64> = (0..terms).map(|_| self.uniform(0.05, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let terms = raw
            .into_iter()
            .map(|w| MixtureTerm {
                weight: w / total,
                left: self.local_state(split.left),
                right: self.local_state(split.right),
            })
            .collect();
        StateSpec::mixture(terms).expect("valid random mixture")
    }
}
