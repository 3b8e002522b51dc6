use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] bo_core::Error),
    #[error("invalid campaign configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("need at least 2 seeds, have {have}")]
    InsufficientSeeds { have: usize },
    #[error("degenerate paired sample: {0}")]
    DegeneratePairs(String),
    #[error("method `{0}` is not part of the archive")]
    MissingReference(String),
    #[error("archive is empty")]
    EmptyArchive,
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        HarnessError::Parse { path: path.into(), message: message.to_string() }
    }
}
