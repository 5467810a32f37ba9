//! CLI failures, their exit codes and their JSON form.

use std::path::PathBuf;

use lamb_core::Error as CoreError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration{}: {message}", field.as_ref().map(|f| format!(" ({f})")).unwrap_or_default())]
    Validation { field: Option<String>, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error{}: {message}", path.as_ref().map(|p| format!(" at {}", p.display())).unwrap_or_default())]
    Io { path: Option<PathBuf>, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let field = match self {
            CliError::Validation { field, .. } => field.clone(),
            _ => None,
        };
        let path = match self {
            CliError::Io { path, .. } => path.as_ref().map(|p| p.display().to_string()),
            _ => None,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "field": field,
                "path": path,
                "message": self.to_string(),
            }
        })
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: Some(path.into()),
            message: err.to_string(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError::Validation {
            field: None,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain { name, .. } => CliError::Validation {
                field: Some(name.to_string()),
                message: e.to_string(),
            },
            CoreError::Geometry { .. } | CoreError::OutOfRange { .. } => CliError::Validation {
                field: None,
                message: e.to_string(),
            },
            other => CliError::Numerical(other.to_string()),
        }
    }
}
