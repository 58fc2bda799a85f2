//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter or argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computed quantity violated a physical bound by more than rounding
    /// can explain; always indicates a bug upstream of the caller.
    #[error("numerical integrity violation: {0}")]
    Integrity(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
