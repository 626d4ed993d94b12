//! Adaptive Dormand-Prince 5(4) integration of first-order real systems.
//!
//! Complex systems are integrated by splitting each component into its real
//! and imaginary parts.

use crate::error::{GeomError, Result};

/// Butcher tableau of the Dormand-Prince 5(4) pair.
pub(crate) mod tableau {
    pub const A21: f64 = 1.0 / 5.0;
    pub const A31: f64 = 3.0 / 40.0;
    pub const A32: f64 = 9.0 / 40.0;
    pub const A41: f64 = 44.0 / 45.0;
    pub const A42: f64 = -56.0 / 15.0;
    pub const A43: f64 = 32.0 / 9.0;
    pub const A51: f64 = 19372.0 / 6561.0;
    pub const A52: f64 = -25360.0 / 2187.0;
    pub const A53: f64 = 64448.0 / 6561.0;
    pub const A54: f64 = -212.0 / 729.0;
    pub const A61: f64 = 9017.0 / 3168.0;
    pub const A62: f64 = -355.0 / 33.0;
    pub const A63: f64 = 46732.0 / 5247.0;
    pub const A64: f64 = 49.0 / 176.0;
    pub const A65: f64 = -5103.0 / 18656.0;
    pub const B1: f64 = 35.0 / 384.0;
    pub const B3: f64 = 500.0 / 1113.0;
    pub const B4: f64 = 125.0 / 192.0;
    pub const B5: f64 = -2187.0 / 6784.0;
    pub const B6: f64 = 11.0 / 84.0;
    pub const E1: f64 = 71.0 / 57600.0;
    pub const E3: f64 = -71.0 / 16695.0;
    pub const E4: f64 = 71.0 / 1920.0;
    pub const E5: f64 = -17253.0 / 339200.0;
    pub const E6: f64 = 22.0 / 525.0;
    pub const E7: f64 = -1.0 / 40.0;
}

use tableau::*;

/// Settings of [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Mixed absolute/relative tolerance per component.
    pub tol: f64,
    /// Upper bound on the number of attempted steps.
    pub max_steps: usize,
    /// First trial step (absolute value).
    pub initial_step: f64,
    /// Largest allowed step (absolute value).
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_steps: 200_000, initial_step: 1e-3, max_step: f64::INFINITY }
    }
}

/// Accepted nodes of an integration, including the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    pub x: Vec<f64>,
    pub y: Vec<[f64; N]>,
}

impl<const N: usize> OdeSolution<N> {
    /// Final node.
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.x.last().expect("solution holds the initial point"), *self.y.last().expect("solution holds the initial point"))
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1`; `x1 < x0` integrates backwards.
///
/// Errors raised by `f` are propagated unchanged.
pub fn dopri5<const N: usize, F>(mut f: F, x0: f64, y0: [f64; N], x1: f64, opts: &OdeOptions) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(opts.tol > 0.0) || !x0.is_finite() || !x1.is_finite() {
        return Err(GeomError::Invalid("ode integration needs finite endpoints and a positive tolerance".into()));
    }
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut sol = OdeSolution { x: vec![x0], y: vec![y0] };
    if x1 == x0 {
        return Ok(sol);
    }
    let mut k1 = f(x, &y)?;
    let mut h = opts.initial_step.min(opts.max_step).min((x1 - x0).abs());
    for _ in 0..opts.max_steps {
        let remaining = (x1 - x).abs();
        if remaining == 0.0 {
            return Ok(sol);
        }
        h = h.min(remaining).min(opts.max_step);
        if h < 1e-14 * x.abs().max(1.0) {
            return Err(GeomError::StepUnderflow { tau: x });
        }
        let hs = dir * h;
        let k2 = f(x + A21 * hs, &axpy(&y, &[(A21, &k1)], hs))?;
        let k3 = f(x + 0.3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs))?;
        let k4 = f(x + 0.8 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs))?;
        let k5 = f(x + 8.0 / 9.0 * hs, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs))?;
        let k6 = f(x + hs, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs))?;
        let y5 = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
        let k7 = f(x + hs, &y5)?;
        let mut norm: f64 = 0.0;
        for i in 0..N {
            let err = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.tol * (1.0 + y[i].abs().max(y5[i].abs()));
            norm = norm.max(err.abs() / scale);
        }
        if !norm.is_finite() {
            h *= 0.25;
            continue;
        }
        if norm <= 1.0 {
            x = if h == remaining { x1 } else { x + hs };
            y = y5;
            k1 = k7;
            sol.x.push(x);
            sol.y.push(y);
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(GeomError::StepUnderflow { tau: x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_forward_and_backward() {
        let sol = dopri5(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 2.0, &OdeOptions::default()).unwrap();
        let (x, y) = sol.last();
        assert_eq!(x, 2.0);
        assert!((y[0] - 2f64.exp()).abs() < 1e-8 * 2f64.exp());
        let back = dopri5(|_, y: &[f64; 1]| Ok([y[0]]), 2.0, [2f64.exp()], 0.0, &OdeOptions::default()).unwrap();
        assert!((back.last().1[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let opts = OdeOptions { tol: 1e-12, ..OdeOptions::default() };
        let sol = dopri5(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], std::f64::consts::TAU, &opts).unwrap();
        let y = sol.last().1;
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn max_step_is_respected() {
        let opts = OdeOptions { max_step: 0.01, ..OdeOptions::default() };
        let sol = dopri5(|_, _: &[f64; 1]| Ok([1.0]), 0.0, [0.0], 1.0, &opts).unwrap();
        assert!(sol.x.windows(2).all(|w| w[1] - w[0] <= 0.01 + 1e-15));
    }
}
