use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A construction was requested outside the antenna regime it is defined for.
    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("solver failed at iteration {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
