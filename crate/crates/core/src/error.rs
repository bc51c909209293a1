//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The ramp slope does not dominate the signal's derivative bound, so
    /// `alpha*t + f(t)` is not certified monotone.
    #[error("ramp slope {slope} does not exceed derivative bound {deriv_bound}")]
    SlopeTooSmall { slope: f64, deriv_bound: f64 },

    #[error("no convergence after {max_iter} iterations (last residual {residual:.3e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("invalid encoder or experiment config: {0}")]
    ConfigInvalid(String),

    #[error("samples are not uniformly spaced: {0}")]
    NonuniformInput(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// A tabulated function that must be strictly monotone for inversion
    /// turned out not to be. Reconstruction reports this instead of crashing.
    #[error("monotone inversion failed: {0}")]
    InversionFailure(String),

    #[error("insufficient points: {0}")]
    InsufficientPoints(String),

    #[error("reference signal has zero norm, SER undefined")]
    ZeroReference,

    #[error("invalid L^p order p = {0}; need p >= 1 or infinity")]
    InvalidP(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
