use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key `{key}`: {message}")]
    ConfigKey { key: String, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{stage} failed: {source}")]
    Pipeline {
        stage: String,
        #[source]
        source: alexandrov_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn key(key: &str, message: impl Into<String>) -> Self {
        CliError::ConfigKey {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn pipeline(stage: impl Into<String>) -> impl FnOnce(alexandrov_core::Error) -> Self {
        let stage = stage.into();
        move |source| CliError::Pipeline { stage, source }
    }

    /// 2 for usage and configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigKey { .. } | CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
