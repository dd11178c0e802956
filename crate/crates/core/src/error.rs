use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The signal does not carry enough usable events for an estimate.
    #[error("low-quality signal: {0}")]
    LowQuality(String),

    #[error("similarity undefined: {0}")]
    Similarity(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("model error: {0}")]
    Model(String),

    /// Malformed or unsupported input file.
    #[error("input error{}: {message}", offset.map(|o| format!(" at byte {o}")).unwrap_or_default())]
    Input { offset: Option<u64>, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn low_quality(msg: impl Into<String>) -> Self {
        Error::LowQuality(msg.into())
    }

    pub(crate) fn input(offset: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Input {
            offset,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 1 for input problems, 2 for configuration problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Model(_) | Error::Template(_) => 2,
            _ => 1,
        }
    }
}
