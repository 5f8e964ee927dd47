use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("oracle failed to converge: {0}")]
    OracleFailure(String),
    #[error("no certificate: {0}")]
    NoCertificate(String),
    #[error("quadrature did not reach the requested accuracy: {0}")]
    Accuracy(String),
    #[error("step rejected by CFL guard; admissible dt = {admissible_dt:e}")]
    StepRejected { admissible_dt: f64 },
    #[error("instability: {0}")]
    Instability(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} contains non-finite values")))
    }
}
