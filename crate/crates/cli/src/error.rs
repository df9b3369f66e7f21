use std::fmt::Display;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("key `{key}`: {reason}")]
    UnknownKey { key: String, reason: String },
    #[error("key `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("{context}: {message}")]
    Numeric { context: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn validation(key: impl Into<String>, message: impl Display) -> Self {
        CliError::Validation {
            key: key.into(),
            message: message.to_string(),
        }
    }

    pub fn numeric(context: impl Into<String>, err: impl Display) -> Self {
        CliError::Numeric {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Machine-readable error class printed as `error[<class>]`.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::UnknownKey { .. } => "UnknownKey",
            CliError::Validation { .. } => "ValidationError",
            CliError::Numeric { .. } => "NumericError",
            CliError::Io { .. } => "IoError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::UnknownKey { .. } | CliError::Validation { .. } => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Single-line report for stderr.
    pub fn report(&self) -> String {
        format!(
            "error[{}]: {}",
            self.class(),
            self.to_string().replace('\n', " ")
        )
    }
}
