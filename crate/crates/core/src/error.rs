use thiserror::Error;

/// Errors produced by the betagos library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index is past the end of a finite table.
    #[error("index {index} out of range (length {len})")]
    OutOfRange { index: usize, len: usize },
    /// Invalid user input (data, configuration, or file contents).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two collections that must line up do not.
    #[error("alignment error: {0}")]
    Alignment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
