use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("synchronization failed: {0}")]
    Synchronization(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular or rank-deficient matrix: {0}")]
    Singular(String),

    #[error("degenerate sounding: RRH {rrh} is isolated (all links below the noise floor)")]
    IsolatedRrh { rrh: usize },

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown experiment `{name}`; registered experiments: {registered}")]
    UnknownExperiment { name: String, registered: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
