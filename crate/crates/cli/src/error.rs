use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid experiment at `{path}`: {message}")]
    Spec { path: String, message: String },

    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] coupon_discovery::Error),

    #[error("fit did not converge after {iterations} iterations (rmse {rmse})")]
    NonConvergence { iterations: usize, rmse: f64 },
}

impl CliError {
    pub fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Spec {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for anything the user has to fix, 3 for a fit that failed to converge.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NonConvergence { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
