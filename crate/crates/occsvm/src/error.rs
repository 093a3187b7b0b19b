use std::io;
use std::path::PathBuf;

/// Errors raised by file handling, the benchmark harness and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum OccError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// Malformed input text. `location` is a line, row/column or field path.
    #[error("{what} parse error at {location}: {message}")]
    Parse { what: &'static str, location: String, message: String },
    #[error("{0} is empty")]
    EmptyDataset(String),
    #[error("unsupported model format version: expected {expected}, found {found}")]
    Version { expected: u32, found: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] occsvm_core::Error),
}

pub type Result<T> = std::result::Result<T, OccError>;

impl OccError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        OccError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(what: &'static str, location: impl Into<String>, message: impl Into<String>) -> Self {
        OccError::Parse { what, location: location.into(), message: message.into() }
    }
}
