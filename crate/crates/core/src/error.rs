use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-physical refractive index at {lambda_um} um, {temperature_c} C (n^2 = {n_squared})")]
    NonPhysicalIndex {
        lambda_um: f64,
        temperature_c: f64,
        n_squared: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit did not converge after {iterations} iterations (residual rms {residual_rms:e}, gradient norm {gradient_norm:e})")]
    FitFailure {
        iterations: usize,
        residual_rms: f64,
        gradient_norm: f64,
    },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
