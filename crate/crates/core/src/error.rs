use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("window statistics requested over an empty window")]
    EmptyWindow,

    #[error("window [{start}, {end}) is outside the {len} cached values")]
    WindowOutOfRange { start: usize, end: usize, len: usize },

    #[error("degenerate subsequence: standard deviation {std} is not above {eps}")]
    DegenerateSubsequence { std: f64, eps: f64 },

    #[error("inconsistent incremental state: distance radicand {radicand} is below tolerance -{tolerance}")]
    InconsistentState { radicand: f64, tolerance: f64 },

    #[error("non-finite value {value} at timestamp {timestamp}")]
    NonFinite { timestamp: u64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("window of length {len} is too short, need at least {required}")]
    WindowTooShort { len: usize, required: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: no records")]
    EmptyInput(PathBuf),

    #[error("gap of {len} points starting at timestamp {timestamp} cannot be filled: {reason}")]
    UnfillableGap {
        timestamp: i64,
        len: usize,
        reason: &'static str,
    },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
