use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid response function: {0}")]
    InvalidResponse(String),

    /// Path values are only exact at sampled skeleton times.
    #[error("time {0} is not a skeleton point of the record")]
    NotInSkeleton(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cannot normalize: the event stream has no events")]
    CannotNormalize,

    #[error("window underflow: t = {t} is smaller than the window length {window}")]
    WindowUnderflow { t: f64, window: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for I/O failures, false for every validation-style failure.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
