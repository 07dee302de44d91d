use std::path::Path;
use std::process::ExitCode;

use rabin_synth::automata::AutomatonError;
use rabin_synth::solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("no policy meets an acceptance pair with probability one")]
    Negative,
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Negative => 5,
        })
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::Syntax { .. } | AutomatonError::Unsupported(_) | AutomatonError::NotRabin(_) => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
