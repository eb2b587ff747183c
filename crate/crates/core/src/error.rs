use std::io;

use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("eigensolver failed to converge for m = {m}, eigenvalue index {index}")]
    NoConvergence { m: usize, index: usize },

    #[error("degenerate mode (m = {m}, n = {n}): phi(-1) = {value:e}")]
    DegenerateMode { m: usize, n: usize, value: f64 },

    #[error("empty basis: {0}")]
    EmptyBasis(String),

    #[error("bandwidth mismatch: expected c = {expected}, found c = {found}")]
    BandwidthMismatch { expected: f64, found: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 1 is reserved for usage errors, which are reported before any of these
    /// can occur.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::DegenerateMode { .. } | Error::Range(_) => 3,
            _ => 2,
        }
    }
}
