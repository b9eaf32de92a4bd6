use std::io;

use thiserror::Error;

/// Harness failures. Certificate violations are not errors; they are
/// reported through [`crate::Outcome`].
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("cannot read config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Core(#[from] chambolle_pock::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: non-finite certificate data counts as a certificate
    /// failure, everything else as a usage error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(chambolle_pock::Error::NonFiniteCertificate { .. })
            | HarnessError::Core(chambolle_pock::Error::NonFiniteIterate { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
