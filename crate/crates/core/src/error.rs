//! Error types shared across the crate.

use std::fmt;

/// Errors produced by simulator operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter or grid fails a validity requirement.
    Config(String),
    /// Mismatched arguments, e.g. envelopes on different grids.
    Usage(String),
    /// An operation was asked for a symbol it cannot handle analytically.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
