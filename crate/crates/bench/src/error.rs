use std::path::PathBuf;

use dfokit::DfoError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Solver(DfoError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("reports refer to different problems: {0} and {1}")]
    MixedProblems(String, String),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        BenchError::Format { path: path.into(), message: message.to_string() }
    }

    /// Process exit code: 2 for configuration problems, 3 for everything that fails at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) | BenchError::Solver(DfoError::Config(_)) => 2,
            _ => 3,
        }
    }
}

impl From<DfoError> for BenchError {
    fn from(e: DfoError) -> Self {
        match e {
            DfoError::MixedProblems(a, b) => BenchError::MixedProblems(a, b),
            other => BenchError::Solver(other),
        }
    }
}
