use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    ImageFormat { path: PathBuf, reason: String },

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero column for training sample {sample}{}", block.map(|b| format!(" in block {b}")).unwrap_or_default())]
    ZeroColumn { sample: usize, block: Option<usize> },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unknown class index {0}")]
    UnknownClass(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("calibration impossible: {0}")]
    Calibration(String),

    #[error("feature family {family}: {source}")]
    Feature {
        family: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("fold {index}: {source}")]
    Fold {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Sample {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("all blocks failed to solve")]
    AllBlocksFailed,

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Whether this error stems from bad input values rather than from data or I/O.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidArgument(_) | Error::Parse(_) => true,
            Error::Feature { source, .. } | Error::Fold { source, .. } | Error::Sample { source, .. } => {
                source.is_validation()
            }
            _ => false,
        }
    }
}
