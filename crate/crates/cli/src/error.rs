use std::path::PathBuf;

use deltashock::Error as SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Solver(e) => match e {
                SolverError::EntropyViolation { .. } => 3,
                SolverError::QuadratureFailure { .. } => 4,
                SolverError::InvalidState(_)
                | SolverError::NoOverlap { .. }
                | SolverError::DegenerateData(_)
                | SolverError::OutOfRange { .. }
                | SolverError::EmptySupport => 2,
                SolverError::MassCollapse { .. }
                | SolverError::RadiusCollapse { .. }
                | SolverError::NoCluster { .. } => 5,
            },
            CliError::Io { .. } => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let text = e.to_string();
        let message = match text.rsplit_once(" at line ") {
            Some((head, _)) if e.line() > 0 => head.to_string(),
            _ => text,
        };
        CliError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
