use serde::Serialize;

use crate::config::Violation;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration ({} violations)", .0.len())]
    Config(Vec<Violation>),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] ksblow::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-finite value in column {0}")]
    NonFinite(String),
    #[error("{0} self-test checks failed")]
    Selftest(usize),
}

/// Machine-readable error record.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub kind: &'static str,
    pub message: String,
    pub violations: Vec<Violation>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(_) => "numerics",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
            CliError::NonFinite(_) => "non_finite",
            CliError::Selftest(_) => "selftest",
        }
    }

    pub fn report(&self) -> ErrorReport {
        let violations = match self {
            CliError::Config(v) => v.clone(),
            _ => Vec::new(),
        };
        ErrorReport { status: "error", kind: self.kind(), message: self.to_string(), violations }
    }
}
