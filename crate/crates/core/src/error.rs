use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    Size { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("construction failed at row {row}: {reason}")]
    Construction { row: usize, reason: String },

    #[error("sampling budget of {tries} attempts exhausted")]
    Sampling { tries: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Size { expected, found })
    }
}
