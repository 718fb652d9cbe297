//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TripleError {
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("factor mismatch: {0}")]
    FactorMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("spin factor has no matrix embedding")]
    SpinEmbedding,
    #[error("not a tripotent (residual {0:e})")]
    NotTripotent(f64),
    #[error("off-grid eigenvalue {0} of L(e,e)")]
    OffGridEigenvalue(f64),
    #[error("zero element where a nonzero one is required")]
    ZeroElement,
    #[error("not minimal: {0}")]
    NotMinimal(String),
    #[error("no such configuration: {0}")]
    NoConfiguration(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a truncation preserver: {0}")]
    NotPreserver(String),
    #[error("singular operator")]
    Singular,
    #[error("inconsistent results: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TripleError>;
