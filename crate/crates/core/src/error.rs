use std::path::PathBuf;

/// Errors produced by the simulator and its report writers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("estimated channel is zero; conjugate precoder is undefined")]
    DegeneratePrecoder,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} requires at least {1} sample(s)")]
    NotEnoughSamples(&'static str, usize),

    #[error("invalid sample value {0}: throughputs must be finite and non-negative")]
    InvalidSample(f64),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
