use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QbeError {
    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("singular advection slice at p index {p_index}, omega index {omega_index}: zero regularizer with nonzero k = 0 source")]
    Singularity { p_index: usize, omega_index: usize },

    #[error("CFL violation: |v_max| dt / dx = {cfl:.4} exceeds {cfl_max}; use dt_fs <= {suggested_dt_fs:.6e}")]
    Cfl {
        cfl: f64,
        cfl_max: f64,
        suggested_dt_fs: f64,
    },

    #[error("transient march did not converge after {steps} steps (last relative change {last:.3e})")]
    IterationLimit { steps: usize, last: f64, history: Vec<f64> },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("could not parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl QbeError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        QbeError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QbeError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors the CLI reports with exit code 2.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            QbeError::Config { .. } | QbeError::Parse { .. } | QbeError::Cfl { .. }
        ) || matches!(self, QbeError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}

pub type Result<T> = std::result::Result<T, QbeError>;
