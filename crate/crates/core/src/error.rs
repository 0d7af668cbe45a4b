use thiserror::Error;

/// Errors raised by operator construction, model building and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resonance pole: {0}")]
    Pole(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("time grid must be strictly increasing")]
    NonMonotoneTimes,

    #[error("unsupported laser phase {0} (expected 0 or pi)")]
    UnsupportedPhase(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
