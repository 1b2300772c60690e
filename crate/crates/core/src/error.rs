use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A formula was evaluated outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("{path}:{line}: key `{key}`: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        key: String,
        message: String,
    },

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("gain schedule for `{0}` is empty")]
    EmptySchedule(String),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("nothing to write: {0}")]
    EmptyResults(&'static str),

    #[error("plot rendering failed: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
