use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{origin}{}: {}{message}",
        if *line > 0 { format!(":{line}:{column}") } else { String::new() },
        field.as_ref().map(|f| format!("field `{f}`: ")).unwrap_or_default())]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        field: Option<String>,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{0}")]
    Engine(#[from] qreverse::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}
