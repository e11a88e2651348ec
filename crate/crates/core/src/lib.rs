//! Covariance, separability and CHSH analysis for finite-dimensional
//! bipartite quantum states.
//!
//! States are built as products ρ₁⊗ρ₂, convex mixtures Σ pᵢ ρᵢ⊗ρ̃ᵢ, or raw
//! density operators, and the construction is kept so that a state can be
//! classified as separable, non-separable (a classical mixture), or
//! entangled. The [`counterexamples`] module shows that nonzero covariance
//! of derived observables appears on plainly separable states, and [`lhv`]
//! reproduces the same effect with a pair of dice.

pub mod bellwitness;
pub mod correlation;
pub mod counterexamples;
pub mod error;
pub mod input;
pub mod lhv;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod report;
pub mod rng;
pub mod selftest;
pub mod state;

pub use bellwitness::{
    chsh_maximize, chsh_value, classify, horodecki_bound, ppt_test, ChshResult, ChshSettings,
    Classification, PptReport, Verdict,
};
pub use correlation::{covariance, expectation, mixture_expectation, variance, CorrelationReport};
pub use error::{Error, Result};
pub use linalg::{kron, CMatrix, C64};
pub use state::{
    bell_state, bloch_observable, embed, partial_transpose, realize, werner, BellKind,
    DensityOperator, LocalObservable, MixtureTerm, Side, Split, StateSpec,
};
