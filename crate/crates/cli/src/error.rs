use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Inadmissible(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(polysing::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for bad input, 3 for parameters outside every construction's hypotheses,
    /// 4 for everything else. 1 is reserved for a failed certificate.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Inadmissible(_) => 3,
            _ => 4,
        })
    }
}

impl From<polysing::Error> for CliError {
    fn from(e: polysing::Error) -> Self {
        match e {
            polysing::Error::Inadmissible(_) | polysing::Error::Infeasible(_) => CliError::Inadmissible(e.to_string()),
            polysing::Error::Config(_) | polysing::Error::Spec(_) => CliError::Config(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
