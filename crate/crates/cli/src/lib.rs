//! Library surface of the experiment runner, so the commands are callable
//! from integration tests as well as the binary.

pub mod config;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hamsynth::Error),
    #[error("config parse error: {0}")]
    Json(#[source] serde_json::Error),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    /// Line/column diagnostics for JSON parse failures.
    pub fn diagnostics(&self) -> String {
        match self {
            CliError::Json(e) => format!("line {}, column {}: {e}", e.line(), e.column()),
            other => other.to_string(),
        }
    }
}
