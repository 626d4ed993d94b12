//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by geometric evaluation, numerical kernels and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    /// An argument lies outside the domain of the requested formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parametrized curve has (nearly) vanishing speed.
    #[error("curve is not regular at parameter {at} (speed {speed:e})")]
    NonRegular { at: f64, speed: f64 },

    /// A Mobius transform sends a point of the curve to infinity.
    #[error("Mobius pole crossed at arc length {s}")]
    PoleCrossing { s: f64 },

    /// A matrix expected to be unitary is not.
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    /// Parameters hit a pole of a Gamma coefficient.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// The root finder was given an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    /// Adaptive quadrature could not meet the requested tolerance.
    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureFailed { estimate: f64 },

    /// An improper integral does not converge.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// A trajectory reached the radial floor near the zero section.
    #[error("trajectory reached rho floor at tau = {tau} (rho = {rho:e})")]
    RhoFloor { tau: f64, rho: f64 },

    /// The adaptive step size collapsed.
    #[error("step size underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },

    /// Inputs are inconsistent or otherwise invalid.
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, GeomError>;
