use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("available action subset has zero total probability")]
    DegenerateSubset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("markov chain is not ergodic")]
    NotErgodic,

    #[error("linear system is singular")]
    Singular,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad input rather than by the environment.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source,
    }
}
