use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("bad header: {0}")]
    Header(String),
    #[error("truncated data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{extra} unexpected bytes after the data")]
    TrailingData { extra: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("{}: {source}", path.display())]
    In {
        path: PathBuf,
        #[source]
        source: Box<FormatError>,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FormatError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        FormatError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file name to errors that don't carry one yet.
    pub(crate) fn at(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (FormatError::Io { .. } | FormatError::In { .. }) => e,
            e => FormatError::In {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }
}
