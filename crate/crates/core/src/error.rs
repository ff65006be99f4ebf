use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Malformed interchange file contents.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("trailing bytes: expected {expected} bytes, found {found}")]
    TrailingBytes { expected: u64, found: u64 },
    #[error("non-finite element at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("empty matrix")]
    Empty,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: {source}", path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("non-finite element at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("degenerate embedding{}", describe_location(*.row, *.col))]
    DegenerateEmbedding {
        row: Option<usize>,
        col: Option<usize>,
    },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("no direction: weight vector has zero norm")]
    NoDirection,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no impostor pairs")]
    NoImpostorPairs,

    #[error("no genuine pairs")]
    NoGenuinePairs,

    #[error("degenerate distributions: both score lists have zero variance")]
    DegenerateDistributions,

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn describe_location(row: Option<usize>, col: Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" (row {r}, col {c})"),
        (Some(r), None) => format!(" (row {r})"),
        (None, Some(c)) => format!(" (col {c})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
