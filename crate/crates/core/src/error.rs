use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated a function contract (shape mismatch, bad input).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Local training produced a non-finite loss or gradient.
    #[error("client {client} diverged in round {round}: {detail}")]
    DivergedClient {
        round: usize,
        client: usize,
        detail: String,
    },

    /// The policy network produced non-finite logits or gradients.
    #[error("policy diverged: {0}")]
    DivergedPolicy(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A training checkpoint could not be written.
    #[error("checkpoint write failed at {path}: {detail}")]
    Checkpoint { path: PathBuf, detail: String },

    /// Malformed file contents.
    #[error("parse error in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }

    /// True for the divergence variants (CLI exit code 3).
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::DivergedClient { .. } | Error::DivergedPolicy(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
