use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the CLI, split by exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid input: {0}")]
    Input(mcwave_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(mcwave_core::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Numerical(_) | AppError::CheckFailed(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        AppError::Csv {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<mcwave_core::Error> for AppError {
    fn from(e: mcwave_core::Error) -> Self {
        use mcwave_core::Error as E;
        match e {
            E::NotSymmetric { .. }
            | E::NotPositiveSemidefinite { .. }
            | E::NoConvergence { .. }
            | E::MonotonicityViolation { .. }
            | E::PartitionViolation { .. }
            | E::EmptySpectrum
            | E::Aliasing { .. } => AppError::Numerical(e),
            _ => AppError::Input(e),
        }
    }
}

pub type AppResult<T> = std::result::Result<T, AppError>;
