use thiserror::Error;

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("truncation too small: need M >= {required}, have M = {available}")]
    Capacity { required: usize, available: usize },

    #[error("singular matrix (condition estimate {condition:e} exceeds {limit:e})")]
    Singular { condition: f64, limit: f64 },

    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("serialization: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
