use std::path::PathBuf;

use thiserror::Error;

/// Invalid or inconsistent configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field} = {value} is out of range; legal range is {legal}")]
    OutOfRange {
        field: String,
        value: String,
        legal: String,
    },
    #[error("failed to parse configuration: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub(crate) fn range(
        field: impl Into<String>,
        value: impl ToString,
        legal: impl Into<String>,
    ) -> Self {
        ConfigError::OutOfRange {
            field: field.into(),
            value: value.to_string(),
            legal: legal.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("percentile requires at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("percentile fraction {0} is outside (0, 1)")]
    BadQuantile(f64),
    #[error("gain is undefined: reference percentile is zero")]
    UndefinedGain,
    #[error("a terminal must be allocated at least one PRB")]
    ZeroPrbs,
    #[error("refusing to overwrite existing file {0} (pass --force to allow)")]
    WouldOverwrite(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
