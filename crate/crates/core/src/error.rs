use thiserror::Error;

/// Errors raised by the numerical and exact kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrability error: {0}")]
    Integrability(String),

    #[error("evaluation at s = {s:e} outside the profile span [{lo:e}, {hi:e}]")]
    Extrapolation { s: f64, lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    #[error("function does not vanish at infinity: level {level} has infinite measure")]
    NotVanishing { level: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("profile is not twice differentiable: {0}")]
    NotSmooth(String),

    #[error("invalid profile document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
