use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest parse error: {0}")]
    Parse(String),

    #[error("invalid manifest: {0}")]
    Invalid(String),

    #[error("run failed: {0}")]
    Run(#[from] worstcase_core::Error),

    #[error("report encoding failed: {0}")]
    Encode(String),
}

impl CliError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}
