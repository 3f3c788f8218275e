use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: berkhyb_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn input(path: &Path, message: impl Into<String>) -> Self {
        HarnessError::Input { path: path.to_path_buf(), message: message.into() }
    }

    pub fn json(path: &Path, e: serde_json::Error) -> Self {
        HarnessError::Parse { path: path.to_path_buf(), line: e.line(), column: e.column(), message: e.to_string() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    pub fn core(context: impl Into<String>, source: berkhyb_core::Error) -> Self {
        HarnessError::Core { context: context.into(), source }
    }
}

/// Attaches an experiment name to core errors.
pub trait CoreContext<T> {
    fn ctx(self, context: &str) -> Result<T>;
}

impl<T> CoreContext<T> for berkhyb_core::Result<T> {
    fn ctx(self, context: &str) -> Result<T> {
        self.map_err(|e| HarnessError::core(context, e))
    }
}
