use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("value outside the tabulated range: {0}")]
    Range(String),

    #[error("numerical routine did not converge: {message} (achieved error estimate {estimate:e})")]
    Numeric { message: String, estimate: f64 },

    #[error("profile rejected: {0}")]
    InvalidProfile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("simulation rejected: {0}")]
    Truncation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Numeric { message: msg.into(), estimate }
    }
}
