use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("table `{table}` has no entry for n = {n}")]
    MissingIndex { table: String, n: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("series diverges: ratio {ratio} is not below 1")]
    Divergence { ratio: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("structural check failed: {0}")]
    LemmaViolation(String),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}
