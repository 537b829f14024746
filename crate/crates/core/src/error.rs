use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A search or allocation that would exceed a fixed budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Invalid experiment or command configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed tabular input. `line` is 1-based and counts the header.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by user-supplied configuration rather than
    /// by the computation itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse { .. })
    }
}
