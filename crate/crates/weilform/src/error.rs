//! Error taxonomy shared by the library and the CLI.
//!
//! The CLI maps these variants to exit codes: usage and validation errors
//! exit with 2, exceeded resource budgets with 3, and internal consistency
//! violations (which indicate a bug, never bad input) with 4.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed command line, spec string, or file syntax.
    Usage(String),
    /// Structurally well-formed input that violates a mathematical precondition.
    Validation(String),
    /// A computation would exceed the configured enumeration or dimension budget.
    Resource(String),
    /// An exact identity that must hold by construction failed; signals a bug.
    Internal(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Usage(m) => write!(f, "usage error: {m}"),
            Error::Validation(m) => write!(f, "validation error: {m}"),
            Error::Resource(m) => write!(f, "resource budget exceeded: {m}"),
            Error::Internal(m) => write!(f, "internal consistency violation: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
