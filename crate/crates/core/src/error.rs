use thiserror::Error;

/// Errors raised by descriptor construction, tensor products, bounds and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("index {index} at position {position} is out of range for dimension {dim}")]
    IndexOutOfRange { position: usize, index: usize, dim: usize },

    #[error("index tuple has {got} entries, tensor order is {expected}")]
    IndexArity { expected: usize, got: usize },

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
}

impl HilbertError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        HilbertError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, HilbertError>;
