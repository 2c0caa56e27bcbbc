//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide error type.
///
/// `Validation` maps to CLI exit code 1, `ResourceLimit` to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: malformed quiver, incompatible profiles, bad flags.
    #[error("validation error: {0}")]
    Validation(String),

    /// A configured bound (loop length, enumeration budget) was exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A numerical routine could not produce a reliable answer
    /// (e.g. matrix logarithm with an eigenvalue at the branch cut).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
