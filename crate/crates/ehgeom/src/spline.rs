//! Cubic interpolating splines on strictly increasing knots.

use crate::error::{GeomError, Result};

/// End condition of a cubic spline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplineEnds {
    /// Zero second derivative at both ends.
    Natural,
    /// Periodic continuation; the last value must repeat the first.
    Periodic,
}

/// Piecewise cubic C2 interpolant storing knot values and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
    ends: SplineEnds,
}

/// Solves a cyclic tridiagonal system with sub-diagonal `a`, diagonal `b`
/// and super-diagonal `c`; `a[0]` couples to the last unknown and `c[n-1]`
/// to the first.
fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    if n == 1 {
        return vec![r[0] / (b[0] + a[0] + c[0])];
    }
    if n == 2 {
        let (m00, m01, m10, m11) = (b[0], a[0] + c[0], a[1] + c[1], b[1]);
        let det = m00 * m11 - m01 * m10;
        return vec![(r[0] * m11 - m01 * r[1]) / det, (m00 * r[1] - m10 * r[0]) / det];
    }
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= a[0] * c[n - 1] / gamma;
    let x = solve_tridiagonal(a, &bb, c, r);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = solve_tridiagonal(a, &bb, c, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = r[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (r[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

impl CubicSpline {
    /// Builds the interpolant through `(knots[i], values[i])`.
    pub fn new(knots: Vec<f64>, values: Vec<f64>, ends: SplineEnds) -> Result<Self> {
        let n = knots.len();
        if n != values.len() || n < 3 {
            return Err(GeomError::Invalid("spline needs at least 3 matching knots and values".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeomError::Invalid("spline knots must be strictly increasing".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let second = match ends {
            SplineEnds::Natural => {
                let m = n - 2;
                let mut sub = vec![0.0; m];
                let mut diag = vec![0.0; m];
                let mut sup = vec![0.0; m];
                let mut rhs = vec![0.0; m];
                for j in 0..m {
                    let i = j + 1;
                    sub[j] = h[i - 1];
                    diag[j] = 2.0 * (h[i - 1] + h[i]);
                    sup[j] = h[i];
                    rhs[j] = 6.0 * (slope[i] - slope[i - 1]);
                }
                let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
                let mut out = vec![0.0; n];
                out[1..n - 1].copy_from_slice(&inner);
                out
            }
            SplineEnds::Periodic => {
                let period_gap = (values[n - 1] - values[0]).abs();
                if period_gap > 1e-12 * values.iter().fold(1.0_f64, |m, v| m.max(v.abs())) {
                    return Err(GeomError::Invalid("periodic spline requires matching end values".into()));
                }
                let m = n - 1;
                let mut sub = vec![0.0; m];
                let mut diag = vec![0.0; m];
                let mut sup = vec![0.0; m];
                let mut rhs = vec![0.0; m];
                for i in 0..m {
                    let hp = if i == 0 { h[m - 1] } else { h[i - 1] };
                    let sp = if i == 0 { slope[m - 1] } else { slope[i - 1] };
                    sub[i] = hp;
                    diag[i] = 2.0 * (hp + h[i]);
                    sup[i] = h[i];
                    rhs[i] = 6.0 * (slope[i] - sp);
                }
                let mut out = solve_cyclic(&sub, &diag, &sup, &rhs);
                out.push(out[0]);
                out
            }
        };
        Ok(Self { knots, values, second, ends })
    }

    /// Parameter interval covered by the knots.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Value, first and second derivative at `x`.
    ///
    /// Periodic splines wrap `x` into the knot range; natural splines clamp it.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (lo, hi) = self.domain();
        let x = match self.ends {
            SplineEnds::Periodic => lo + (x - lo).rem_euclid(hi - lo),
            SplineEnds::Natural => x.clamp(lo, hi),
        };
        let n = self.knots.len();
        let i = match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let y = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let ddy = a * m0 + b * m1;
        (y, dy, ddy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_spline_reproduces_sine() {
        let n = 200;
        let knots: Vec<f64> = (0..=n).map(|i| i as f64 * std::f64::consts::TAU / n as f64).collect();
        let mut values: Vec<f64> = knots.iter().map(|x| x.sin()).collect();
        values[n] = values[0];
        let s = CubicSpline::new(knots, values, SplineEnds::Periodic).unwrap();
        for k in 0..37 {
            let x = 0.17 * k as f64;
            let (y, dy, ddy) = s.eval(x);
            assert!((y - x.sin()).abs() < 1e-7);
            assert!((dy - x.cos()).abs() < 1e-5);
            assert!((ddy + x.sin()).abs() < 1e-3);
        }
    }

    #[test]
    fn natural_spline_interpolates_knots() {
        let knots = vec![0.0, 0.5, 1.3, 2.0, 3.1];
        let values = vec![1.0, -0.2, 0.4, 2.0, 0.0];
        let s = CubicSpline::new(knots.clone(), values.clone(), SplineEnds::Natural).unwrap();
        for (k, v) in knots.iter().zip(&values) {
            assert!((s.eval(*k).0 - v).abs() < 1e-14);
        }
        assert!(s.eval(0.0).2.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(CubicSpline::new(vec![0.0, 0.0, 1.0], vec![0.0; 3], SplineEnds::Natural).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], SplineEnds::Periodic).is_err());
    }
}
