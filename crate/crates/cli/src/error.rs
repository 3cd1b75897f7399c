use std::path::PathBuf;

use crate::config::Origin;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}` ({origin})")]
    UnknownKey { key: String, origin: Origin },
    #[error("key `{key}` is not used by task {task} ({origin})")]
    UnusedKey { key: String, task: &'static str, origin: Origin },
    #[error("cannot read `{value}` for `{key}` ({origin})")]
    Value { key: &'static str, value: String, origin: Origin },
    #[error("invalid `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] bv_sharp_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn field(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Field { field, reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
