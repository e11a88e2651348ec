use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported bipartite split {0}x{1}")]
    UnsupportedSplit(usize, usize),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("expectation has imaginary residue {0:.3e}; operator is not Hermitian")]
    ImaginaryResidue(f64),

    #[error("observables do not commute (commutator norm {0:.3e})")]
    NonCommuting(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("Bloch vector has norm {0}, expected 1")]
    NonUnitVector(f64),

    #[error("wrong state kind: {0}")]
    WrongSpecKind(String),

    #[error("unknown measurement setting `{0}`")]
    UnknownSetting(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("sample count must be at least 1")]
    EmptySample,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Errors that stem from a well-formed input being used at the wrong
    /// dimension or in the wrong role, as opposed to malformed input.
    pub fn is_semantic(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::UnsupportedSplit(..)
                | Error::WrongSpecKind(_)
                | Error::NonCommuting(_)
        )
    }
}
