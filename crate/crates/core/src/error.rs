use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure in {what}: achieved tolerance {achieved:e}")]
    Numeric { what: String, achieved: f64 },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("calibration failure: {0}")]
    Calibration(String),

    #[error("accuracy target missed for {what}; suggested setting {suggested}")]
    Accuracy { what: String, suggested: f64 },

    #[error("degenerate decomposition: {0}")]
    Degenerate(String),

    #[error("invalid lower-bound witness: {0}")]
    Witness(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
