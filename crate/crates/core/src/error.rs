//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EdmError>;

#[derive(Debug, Error)]
pub enum EdmError {
    /// The cost spec violates one or more invariants. The message lists
    /// every violation, not just the first.
    #[error("invalid cost spec: {0}")]
    InvalidSpec(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ragged lengths at line {line}: expected {expected} values, got {got}")]
    RaggedLengths {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("empty file: {0}")]
    EmptyFile(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("class {class} has {count} members, need at least {folds} for stratified folds")]
    TooFewPerClass {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("degenerate labels: a single class is present, need at least two")]
    DegenerateLabels,

    #[error("prefix too short: got {got} values, classifier needs {needed}")]
    PrefixTooShort { got: usize, needed: usize },

    #[error("empty calibration cube")]
    EmptyCube,

    #[error("timestamp mismatch: {0}")]
    TimestampMismatch(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("prefit pipeline requires a caller-supplied calibration cube")]
    MissingCalibrationCube,

    #[error("empty input")]
    EmptyInput,

    #[error("classifier at timestamp {timestamp}: {source}")]
    AtTimestamp {
        timestamp: usize,
        #[source]
        source: Box<EdmError>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("invalid blob: {0}")]
    Blob(String),
}

impl EdmError {
    /// Wraps an error with the timestamp of the collection member it came from.
    pub(crate) fn at_timestamp(self, timestamp: usize) -> EdmError {
        EdmError::AtTimestamp {
            timestamp,
            source: Box::new(self),
        }
    }
}
