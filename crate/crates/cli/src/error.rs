use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        })
    }

    pub fn field(path: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{path}: {msg}"))
    }

    pub fn io(path: impl Into<PathBuf>, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.into().display()))
    }
}

impl From<colur::Error> for CliError {
    fn from(e: colur::Error) -> Self {
        use colur::Error as E;
        match e {
            E::Config(_) | E::Shape(_) | E::Eval(_) => CliError::Validation(e.to_string()),
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::Format { .. } | E::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
