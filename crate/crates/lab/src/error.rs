use hilbert_tensor::HilbertError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Tensor(#[from] HilbertError),

    #[error("numeric violation: {0}")]
    Violation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl LabError {
    /// 0 success, 1 usage/validation, 2 numeric violation, 3 internal error.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Usage(_) => 1,
            LabError::Tensor(HilbertError::NoConvergence(_)) => 3,
            LabError::Tensor(_) => 1,
            LabError::Violation(_) => 2,
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) | LabError::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
