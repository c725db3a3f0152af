use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// The design matrix is numerically rank deficient, or (d = 1) identically zero.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// Exhaustive enumeration would exceed the configured limit.
    #[error("refused: {0}")]
    Refused(String),

    /// Arguments fall outside the range in which a bound is stated.
    #[error("outside validity range: {0}")]
    OutOfValidity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
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

    /// True for errors caused by bad user input or configuration (as opposed to I/O).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::UnsupportedSize(_)
                | Error::Refused(_)
                | Error::OutOfValidity(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}
