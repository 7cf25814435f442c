use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a half-integer")]
    NotHalfInteger(f64),
    #[error("invalid spin {spin}: {reason}")]
    InvalidSpin { spin: String, reason: &'static str },
    #[error("projection {m} outside [-{spin}, {spin}]")]
    ProjectionOutOfRange { m: String, spin: String },
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("level pairs overlap at level {0}")]
    OverlappingPairs(usize),
    #[error("channel is not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("solver did not converge after {iterations} iterations (primal residual {primal:.3e}, dual residual {dual:.3e})")]
    SolverNotConverged { iterations: usize, primal: f64, dual: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
