use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("invalid edge #{index} ({tail}, {head}): {reason}")]
    InvalidEdge {
        index: u64,
        tail: u64,
        head: u64,
        reason: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("memory budget violated: {0}")]
    Budget(String),

    #[error("batch overflow at FNN {fnn}: {edges} edges exceed budget {budget}")]
    BatchOverflow { fnn: u32, edges: u64, budget: u64 },

    #[error("irreducible batch: node {node} has {degree} indexed edges, budget {budget}")]
    IrreducibleBatch { node: u32, degree: u32, budget: u32 },

    #[error("index too large: byte offset {0} does not fit 32 bits")]
    IndexTooLarge(u64),

    #[error("failed to replace {path}: {source}")]
    Replace { path: PathBuf, source: io::Error },

    #[error("time limit of {limit_secs} s exceeded")]
    TimeLimit { limit_secs: f64 },

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
