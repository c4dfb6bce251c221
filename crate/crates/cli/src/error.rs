use std::io;
use std::path::Path;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cantor_cusp::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::File {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Input(_) | CliError::Csv(_) | CliError::Json(_) => "input",
            CliError::File { .. } | CliError::Io(_) => "io",
        }
    }

    /// One JSON object on standard error.
    pub fn report(&self) {
        let message = self.to_string();
        eprintln!(
            "{}",
            json!({ "error": message.trim_end(), "kind": self.kind() })
        );
    }
}
