use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LfcError>;

#[derive(Debug, Error)]
pub enum LfcError {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("simulation diverged at t = {t:.3} s (|df| = {df:.4} pu)")]
    Divergence { t: f64, df: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LfcError {
    /// Process exit status for this error: 1 config, 2 divergence, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LfcError::Domain(_) | LfcError::Config(_) => 1,
            LfcError::Divergence { .. } => 2,
            LfcError::Io { .. } => 3,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LfcError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LfcError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LfcError::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(LfcError::domain(format!("{name} must be finite, got {v}")))
    }
}
