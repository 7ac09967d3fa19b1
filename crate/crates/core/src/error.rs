use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("nonnegativity violated: {0}")]
    Nonnegativity(String),

    #[error("invalid scheme configuration: {0}")]
    Config(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("channel is not samplable: {0}")]
    NotSamplable(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("malformed outcome file: {0}")]
    Format(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
