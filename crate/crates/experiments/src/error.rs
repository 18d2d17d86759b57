use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// A configuration value is out of range; `flag` names the CLI flag or
    /// config key.
    #[error("invalid {flag}: {message}")]
    Config { flag: String, message: String },
    #[error(transparent)]
    Core(#[from] randmarkov::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed row {line}: {message}")]
    Parse { line: u64, message: String },
}

impl HarnessError {
    pub fn config(flag: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            flag: flag.into(),
            message: message.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
