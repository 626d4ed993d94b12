//! Numerical geometry of the hypersurfaces `M_Gamma = p^{-1}(Gamma)` in
//! Eguchi-Hanson space.
//!
//! The crate evaluates the ambient metric and its Christoffel symbols, the
//! induced metric, frame, connection, curvature and second fundamental form
//! of the hypersurfaces over plane curves, integrates their geodesic flow,
//! evaluates spinor field equations and Rayleigh-quotient spectral bounds,
//! and provides an independent finite-difference tensor oracle used to
//! cross-check every closed form.

pub mod ambient;
pub mod curves;
pub mod error;
pub mod geodesics;
pub mod hypersurface;
pub mod ode;
pub mod oracle;
pub mod spectral;
pub mod specfun;
pub mod spinors;
pub mod spline;

pub use error::{GeomError, Result};
