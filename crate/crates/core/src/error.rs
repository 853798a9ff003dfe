use thiserror::Error;

/// Errors raised across the simulator and the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Structurally invalid setup: duplicate or overlapping modes, bad matrix shapes.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value outside its allowed domain.
    #[error("validation error: {0}")]
    Validation(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An operation was called on an input violating its precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, message: msg.into() }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
