use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PalmError> = std::result::Result<T, E>;

/// Errors of the IO layer. Each variant maps to a process exit code.
#[derive(Debug, Error)]
pub enum PalmError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Core(#[from] palmnav_core::Error),
    #[error("{0}")]
    Invalid(String),
}

impl PalmError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PalmError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        PalmError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 for domain errors (schema, decoding, model mismatch), 2 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            PalmError::Io { .. } => 2,
            PalmError::Schema { .. }
            | PalmError::Format { .. }
            | PalmError::Core(_)
            | PalmError::Invalid(_) => 1,
        }
    }
}
