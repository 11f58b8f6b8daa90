use thiserror::Error;

use crate::numerics::{Complex, StepStats};

/// Errors raised by the library.
///
/// Infinite boundary quantities (divergent moments, `φ′(0) = −∞`, ...) are
/// *values*, represented by `f64` infinities or dedicated enums; they never
/// surface through this type unless an operation needs a finite number.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A representation violates a structural invariant (sign of a coefficient,
    /// ordering of breakpoints, non-finite input, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A measure does not satisfy the integrability class required.
    #[error("integrability: {0}")]
    Integrability(String),

    /// The adaptive integrator exhausted `max_steps`.
    #[error("ODE solver did not converge after {} accepted steps (reached t = {t_reached})", .stats.accepted)]
    NonConvergence {
        t_reached: f64,
        stats: StepStats,
        trajectory: Vec<(f64, Complex)>,
    },

    /// The step size collapsed without reaching the end of the interval.
    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// A trajectory that must stay in the half-plane left it.
    #[error("trajectory left the right half-plane at t = {t_exit}")]
    LeftHalfPlane { t_exit: f64 },

    /// Quadrature could not meet its tolerance within `max_panels`.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// A boundary regular fixed point required by the operation is absent.
    #[error("no boundary regular fixed point at {point}: {reason}")]
    NoBrfp { point: &'static str, reason: String },

    /// The integrand `1/f` of the Koenigs integral is singular on the path.
    #[error("f vanishes on the integration path near {0}")]
    SingularPath(Complex),

    /// A numeric evaluation produced a non-finite value.
    #[error("evaluation failed at x = {x}: {reason}")]
    Evaluation { x: f64, reason: String },

    /// Malformed external input (JSON, CLI arguments).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
