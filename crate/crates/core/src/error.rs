use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("xes parse error at line {line}, column {column}: {message}")]
    Xes {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("event {event} of trace `{trace}` has no concept:name")]
    MissingActivity { trace: String, event: usize },

    #[error("trace {index} has no concept:name")]
    MissingTraceId { index: usize },

    #[error("duplicate trace id `{0}`")]
    DuplicateTrace(String),

    #[error("csv column `{0}` not found in header")]
    MissingColumn(String),

    #[error("csv row {row}: {message}")]
    CsvRow { row: usize, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("timestamp ordering requested but event {event} of trace `{trace}` has no timestamp")]
    MissingTimestamp { trace: String, event: usize },

    #[error("split boundary {boundary} outside 0..={len}")]
    BoundaryOutOfRange { boundary: usize, len: usize },

    #[error("window [{start}, {start}+{size}) exceeds stream of length {len}")]
    WindowOutOfRange { start: usize, size: usize, len: usize },

    #[error("stream has {len} events; at least {min} are required for this configuration")]
    StreamTooShort { len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contingency table needs at least one non-empty window")]
    EmptyContingency,

    #[error("degrees of freedom must be at least 1, got {0}")]
    DegreesOfFreedom(u32),

    #[error("invalid process model: {0}")]
    Model(String),

    #[error("invalid change pattern: {0}")]
    Pattern(String),

    #[error("undetectable pattern: directly-follows relations are identical before and after the change")]
    UndetectablePattern,

    #[error("noise fraction {0} must lie in [0, 1)")]
    NoiseFraction(f64),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
