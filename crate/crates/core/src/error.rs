use thiserror::Error;

use crate::special_fn::GammaError;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Gamma(#[from] GammaError),

    #[error("x = {x} lies outside the function domain ({lo}, {hi})")]
    OutsideFunctionDomain { x: f64, lo: f64, hi: f64 },

    #[error("upper limit {upper} is below the lower terminal {lower}")]
    UpperBelowTerminal { upper: f64, lower: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no tail index satisfies |x_k - X| < epsilon ({0})")]
    InsufficientTail(String),

    #[error("no witness found: {0}")]
    NotFound(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
