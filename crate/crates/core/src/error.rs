use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("not a valid quantum state: {0}")]
    NotAState(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
