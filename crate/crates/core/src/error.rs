use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad arguments or violated call contracts.
    Usage,
    /// Malformed dumps, tables or datasets.
    Format,
    /// Not enough data, occurrences or coverage to compute a value.
    Insufficient,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("truncated payload {path}: expected {expected} bytes, found {actual}")]
    TruncatedPayload { path: PathBuf, expected: u64, actual: u64 },

    #[error("oversized payload {path}: expected {expected} bytes, found {actual}")]
    OversizedPayload { path: PathBuf, expected: u64, actual: u64 },

    #[error("schema violation in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate vector: zero norm")]
    DegenerateVector,

    #[error("degenerate sentence {sentence_id}: mean vector is zero")]
    DegenerateSentence { sentence_id: usize },

    #[error("degenerate matrix: all entries are zero")]
    DegenerateMatrix,

    #[error("insufficient occurrences: need at least {needed}, found {found}")]
    InsufficientOccurrences { needed: usize, found: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient coverage for {task}: {evaluated} usable items, need at least {needed}")]
    InsufficientCoverage {
        task: String,
        evaluated: usize,
        needed: usize,
    },

    #[error("correlation undefined: one side is constant")]
    UndefinedCorrelation,

    #[error("word {word:?} is not eligible: {contexts} unique contexts, minimum is {min_contexts}")]
    Ineligible {
        word: String,
        contexts: usize,
        min_contexts: usize,
    },

    #[error("layer {layer} out of range: dump has {layer_count} layers")]
    LayerOutOfRange { layer: usize, layer_count: usize },

    #[error("cannot adjust a {measure} measure by a {baseline} baseline")]
    KindMismatch {
        measure: &'static str,
        baseline: &'static str,
    },

    #[error("no eligible words")]
    EmptyTable,

    #[error("invalid argument: {0}")]
    Contract(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Io { .. } => ErrorCategory::Io,
            MissingFile(_)
            | TruncatedPayload { .. }
            | OversizedPayload { .. }
            | Schema { .. }
            | Format(_)
            | Parse { .. } => ErrorCategory::Format,
            DegenerateVector
            | DegenerateSentence { .. }
            | DegenerateMatrix
            | InsufficientOccurrences { .. }
            | InsufficientData(_)
            | InsufficientCoverage { .. }
            | UndefinedCorrelation
            | Ineligible { .. }
            | EmptyTable => ErrorCategory::Insufficient,
            DimensionMismatch { .. } | LayerOutOfRange { .. } | KindMismatch { .. } | Contract(_) => {
                ErrorCategory::Usage
            }
        }
    }
}
