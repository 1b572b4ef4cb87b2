use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] czframe_core::CoreError),
}

impl CliError {
    pub fn is_config(&self) -> bool {
        matches!(self, CliError::Config(_))
    }
}
