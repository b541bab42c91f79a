use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tofq_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invariant(String),
}

/// One-line JSON record printed to stderr on failure.
#[derive(Debug, Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) if e.is_numerical_guard() => "numerical_guard",
            CliError::Core(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Invariant(_) => "invariant",
        }
    }

    /// 2 for rejected input, 3 for a tripped numerical guard, 4 for a failed
    /// invariant check, 1 for I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "numerical_guard" => 3,
            "invariant" => 4,
            _ => 1,
        }
    }

    pub fn json_line(&self) -> String {
        let line = ErrorLine { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&line).expect("error line serializes")
    }
}
