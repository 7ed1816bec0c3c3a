use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid shapes, indices, or parameter values.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A dense materialization would exceed the configured cell budget.
    #[error("capacity exceeded: {cells} cells requested, limit is {limit}")]
    Capacity { cells: u128, limit: u128 },

    /// A cached quantity was read after the data it depends on changed.
    #[error("stale state: {0}")]
    State(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("column task {column} failed: {msg}")]
    Task { column: usize, msg: String },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Argument-class errors map to exit code 2 in the CLI, everything else to 1.
    pub fn is_argument(&self) -> bool {
        matches!(self, Error::Argument(_))
    }
}
