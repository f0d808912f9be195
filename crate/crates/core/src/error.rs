use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator, environment, trainer or harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("non-finite value {value} at component {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("parameter {0} is a controlled-U3 angle; the two-term shift rule does not apply")]
    UnsupportedComponent(usize),

    #[error("episode finished at t = {0}")]
    EpisodeFinished(usize),

    #[error("training diverged at episode {episode}, step {step}, agent {agent}: {source}")]
    Diverged {
        episode: usize,
        step: usize,
        agent: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
