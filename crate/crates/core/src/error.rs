use thiserror::Error;

/// Errors produced by the estimation and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-finite value on line {line}")]
    NonFinite { line: usize },

    #[error("sample has {0} rows, at least 4 are required")]
    TooFewRows(usize),

    #[error("k = {k} is outside [2, {n})")]
    KOutOfRange { k: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
