use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, SptError>;

#[derive(Debug, Error)]
pub enum SptError {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("model specification has {} violation(s)", .0.len())]
    Validation(Vec<Violation>),

    #[error("order vector has length {got}, family expects {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("operation not supported for this family: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Domain(String),

    #[error("Hilbert space dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SptError {
    /// Convergence failures are reported to callers differently from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, SptError::NonConvergence(_))
    }
}
