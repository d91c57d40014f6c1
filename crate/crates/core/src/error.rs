use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("could not draw a recurrent matrix with nonzero spectral radius after {0} attempts")]
    DegenerateTopology(usize),

    #[error("closed-loop run requires trained readout weights")]
    Untrained,

    #[error("model not found: {}", .0.display())]
    ModelNotFound(PathBuf),

    #[error("unsupported model format version {found} (supported: {supported})")]
    Version { found: u32, supported: u32 },

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
