use thiserror::Error;

/// Errors raised by the numerical kernels and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("aspect ratio must lie in (0, 1], got {0}")]
    AspectRatio(f64),

    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("point {re}+{im}i lies on the spectral support; evaluate via the inversion limit instead")]
    OnSupport { re: f64, im: f64 },

    #[error("evaluation point coincides with a particle at index {0}")]
    Coincident(usize),

    #[error("particles {0} and {1} collided (gap below guard)")]
    Collision(isize, isize),

    #[error("particle configuration is not strictly ordered at index {0}")]
    Ordering(usize),

    #[error("time step fell below the minimum {dt_min:e} at t = {t}")]
    StepUnderflow { t: f64, dt_min: f64 },

    #[error("fixed point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature did not reach tolerance: estimated error {error:e} after {intervals} intervals")]
    Quadrature { error: f64, intervals: usize },

    #[error("no root in bracket: {0}")]
    NoRoot(String),

    #[error("ODE integration failed: {0}")]
    Ode(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("negative profile value {value:e} at index {index}")]
    Negative { index: usize, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
