use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("overlay has no live nodes")]
    OverlayEmpty,

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{count} attack subsets exceed the enumeration cap of {cap}; use montecarlo instead")]
    TooLarge { count: String, cap: u64 },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("constraint violated between `{first}` and `{second}`: {message}")]
    Constraint {
        first: String,
        second: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TooLarge { .. } | Error::Infeasible(_) | Error::OverlayEmpty => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
