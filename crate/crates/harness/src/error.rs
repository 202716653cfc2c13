use thiserror::Error;

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] acdc_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{failed} of {total} replicates failed for {algorithm} (first error: {first})")]
    TooManyFailures {
        algorithm: String,
        failed: usize,
        total: usize,
        first: String,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}
