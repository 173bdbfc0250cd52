use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Element payloads that do not belong to the backend they are used with.
    #[error("structural error: {0}")]
    Structural(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("group too large for enumeration: more than {cap} elements (reached {partial})")]
    TooLarge { cap: usize, partial: usize },

    #[error("cannot verify generator reduction: {0}")]
    Unverifiable(String),

    #[error("degenerate partition: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
