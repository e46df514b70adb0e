use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two inputs disagree on their support size (or row count).
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    /// Input data violates a precondition (empty sample, out-of-range atom, ...).
    #[error("input error: {0}")]
    Input(String),
    /// The generator family does not satisfy the regularity assumptions
    /// required by an error bound.
    #[error("unsupported family for bounds: {0}")]
    UnsupportedFamily(String),
    /// Malformed text input. `line` is 1-based; 0 means "whole document".
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An experiment configuration field is invalid.
    #[error("invalid config field `{field}`: {msg}")]
    Config { field: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_shape(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}
