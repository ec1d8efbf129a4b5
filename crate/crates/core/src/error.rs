use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("duplicate date {date} (line {line})")]
    DuplicateDate { date: NaiveDate, line: u64 },

    #[error("series is empty")]
    EmptySeries,

    #[error("interpolation needs at least 2 observed points, found {observed}")]
    InsufficientObservations { observed: usize },

    #[error("split leaves {side} with {len} points, need at least {required}")]
    SplitTooSmall {
        side: &'static str,
        len: usize,
        required: usize,
    },

    #[error("degenerate scaling range: every training value equals {value}")]
    DegenerateRange { value: f64 },

    #[error("series of length {len} is too short, need at least {required}")]
    SeriesTooShort { len: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("empty input sequence")]
    EmptySequence,

    #[error("non-finite gradient in parameter `{param}` at optimizer step {step}")]
    NonFiniteGradient { param: String, step: u64 },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("actual value is zero at index {index}; MAPE is undefined")]
    ZeroActual { index: usize },

    #[error("unknown architecture `{0}` (expected proposed, lstm, cnn_lstm or cnn_bilstm)")]
    UnknownArchitecture(String),

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Failures reading a model checkpoint, one variant per failure class.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("bad magic bytes: not a model checkpoint")]
    BadMagic,

    #[error("unsupported checkpoint version {found} (supported: {supported:?})")]
    UnsupportedVersion { found: u32, supported: Vec<u32> },

    #[error("truncated checkpoint: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("malformed checkpoint header: {0}")]
    Header(String),
}

/// Broad classes used by frontends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::UnknownArchitecture(_) => ErrorClass::Config,
            Error::NonFiniteGradient { .. } | Error::NonFiniteLoss { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(context: impl Into<String>, expected: &[usize], found: &[usize]) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
            expected: expected.to_vec(),
            found: found.to_vec(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
