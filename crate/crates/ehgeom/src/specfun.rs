//! Special functions and scalar numerical kernels.
//!
//! Provides the Gauss hypergeometric function on the negative real axis
//! (series, Euler transform across the unit seam and the two-term
//! continuation for large arguments), the smooth monotone mollifier, the
//! Gamma function, adaptive Gauss-Kronrod quadrature on finite and
//! semi-infinite intervals, and Brent root finding.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{GeomError, Result};

/// Arguments of the Gauss hypergeometric function `F(alpha, beta, gamma, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Args {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub z: f64,
}

impl Hyp2F1Args {
    pub fn new(alpha: f64, beta: f64, gamma: f64, z: f64) -> Self {
        Self { alpha, beta, gamma, z }
    }
}

/// Lower edge of the seam band around `|z| = 1`.
pub const SEAM_LOW: f64 = 0.9;
/// Upper edge of the seam band around `|z| = 1`.
pub const SEAM_HIGH: f64 = 1.1;

const MAX_SERIES_TERMS: usize = 20_000;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Gamma function for positive real arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(GeomError::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Gamma function on the whole real line away from its poles.
fn gamma_signed(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(GeomError::Degenerate(format!("Gamma pole at {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Reciprocal Gamma function, zero at the poles of Gamma.
fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / statrs::function::gamma::gamma(x)
    }
}

/// Power series of `F(a, b, c, z)` for `|z| < 1`, summed until the tail
/// bound falls below `tol` relative to the partial sum.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<f64> {
    if z.abs() >= 1.0 {
        return Err(GeomError::Domain(format!("series requires |z| < 1, got {z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let next_ratio = ((a + nf + 1.0) * (b + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * z).abs();
        let r = next_ratio.max(z.abs());
        if r < 1.0 {
            let tail = term.abs() * r / (1.0 - r);
            if tail <= tol * sum.abs().max(f64::MIN_POSITIVE) {
                return Ok(sum);
            }
        }
    }
    Err(GeomError::QuadratureFailed { estimate: term.abs() })
}

/// Gauss hypergeometric function for real `z <= 0`.
///
/// Uses the power series for `|z| < 0.9`, the Euler transformation into
/// `z / (z - 1)` on the seam `0.9 <= |z| <= 1.1`, and the two-term
/// continuation in `1/z` for `|z| > 1.1`.
pub fn hyp2f1(args: Hyp2F1Args, tol: f64) -> Result<f64> {
    let Hyp2F1Args { alpha: a, beta: b, gamma: c, z } = args;
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(GeomError::Domain("non-finite hypergeometric argument".into()));
    }
    if is_nonpositive_integer(c) {
        return Err(GeomError::Degenerate(format!("gamma = {c} is a nonpositive integer")));
    }
    if z > 0.0 {
        return Err(GeomError::Domain(format!("hyp2f1 supports z <= 0 only, got {z}")));
    }
    let az = z.abs();
    if az < SEAM_LOW {
        hyp2f1_series(a, b, c, z, tol)
    } else if az <= SEAM_HIGH {
        hyp2f1_euler(a, b, c, z, tol)
    } else {
        hyp2f1_continuation(a, b, c, z, tol)
    }
}

/// Euler transformation `F(a,b,c,z) = (1-z)^{-a} F(a, c-b, c, z/(z-1))`.
pub fn hyp2f1_euler(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<f64> {
    if z > 0.0 {
        return Err(GeomError::Domain(format!("Euler branch requires z <= 0, got {z}")));
    }
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * hyp2f1_series(a, c - b, c, w, tol)?)
}

/// Two-term continuation of `F(a,b,c,z)` for `z < -1` in powers of `1/z`.
pub fn hyp2f1_continuation(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<f64> {
    if z >= -1.0 {
        return Err(GeomError::Domain(format!("continuation requires z < -1, got {z}")));
    }
    if is_integer(a - b) {
        return Err(GeomError::Degenerate(format!(
            "alpha - beta = {} is an integer (logarithmic case)",
            a - b
        )));
    }
    let gc = gamma_signed(c)?;
    let w = 1.0 / z;
    let mz = -z;
    let coef1 = gc * gamma_signed(b - a)? * rgamma(b) * rgamma(c - a);
    let coef2 = gc * gamma_signed(a - b)? * rgamma(a) * rgamma(c - b);
    let mut value = 0.0;
    if coef1 != 0.0 {
        value += coef1 * mz.powf(-a) * hyp2f1_series(a, a - c + 1.0, a - b + 1.0, w, tol)?;
    }
    if coef2 != 0.0 {
        value += coef2 * mz.powf(-b) * hyp2f1_series(b, b - c + 1.0, b - a + 1.0, w, tol)?;
    }
    Ok(value)
}

/// `(x/t) F(1/2, 1/4, 3/2, -a x^2 / t^4)`, an antiderivative of
/// `(a x^2 + t^4)^{-1/4}` vanishing at `x = 0`.
pub fn hyp2f1_radial_antiderivative(x: f64, a: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(GeomError::Domain(format!("radial antiderivative requires t > 0, got {t}")));
    }
    if !(a > 0.0) {
        return Err(GeomError::Domain(format!("radial antiderivative requires a > 0, got {a}")));
    }
    let z = -a * x * x / t.powi(4);
    Ok(x / t * hyp2f1(Hyp2F1Args::new(0.5, 0.25, 1.5, z), 1e-15)?)
}

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / (x * x)).exp()
    }
}

fn mollifier_density(y: f64) -> f64 {
    bump(y) * bump(1.0 - y)
}

fn mollifier_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        integrate(mollifier_density, 0.0, 1.0, &QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 4000 })
            .expect("mollifier normalization converges")
    })
}

/// Smooth monotone cutoff: zero for `x <= 0`, one for `x >= 1`.
pub fn mollifier_mu(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-13, max_intervals: 4000 };
    let partial = integrate(mollifier_density, 0.0, x, &opts).expect("mollifier partial integral converges");
    (partial / mollifier_norm()).clamp(0.0, 1.0)
}

/// Tolerances of the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target.
    pub rel_tol: f64,
    /// Maximum number of subintervals.
    pub max_intervals: usize,
}

impl QuadOptions {
    /// Absolute and relative targets both equal to `tol`.
    pub fn with_tol(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, max_intervals: 5000 }
    }

    /// Purely relative target.
    pub fn relative(tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol: tol, max_intervals: 5000 }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, opts).map(|v| -v);
    }
    let (v0, e0) = gk15(&f, a, b);
    if !v0.is_finite() {
        return Err(GeomError::QuadratureFailed { estimate: f64::INFINITY });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v0, error: e0 });
    let mut total = v0;
    let mut err = e0;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(GeomError::QuadratureFailed { estimate: err });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (vl, el) = gk15(&f, worst.a, mid);
        let (vr, er) = gk15(&f, mid, worst.b);
        if !(vl.is_finite() && vr.is_finite()) {
            return Err(GeomError::QuadratureFailed { estimate: f64::INFINITY });
        }
        total += vl + vr - worst.value;
        err += el + er - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: vl, error: el });
        heap.push(Panel { a: mid, b: worst.b, value: vr, error: er });
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let total: f64 = heap.iter().map(|p| p.value).sum();
    let err: f64 = heap.iter().map(|p| p.error).sum();
    if err > 10.0 * opts.abs_tol.max(opts.rel_tol * total.abs()) {
        return Err(GeomError::QuadratureFailed { estimate: err });
    }
    Ok(total)
}

/// Adaptive quadrature of `f` over `[a, b]` with absolute and relative
/// tolerance `tol`.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate(f, a, b, &QuadOptions::with_tol(tol))
}

/// Checks that `f` decays faster than `1/x` on `[a, inf)`.
///
/// The logarithmic slope of `|f|` between `a + 1e6 scale` and
/// `a + 1e8 scale` must be below `-1`; identically vanishing tails pass.
pub fn tail_decays<F: Fn(f64) -> f64>(f: &F, a: f64, scale: f64) -> bool {
    let x1 = a + 1e6 * scale;
    let x2 = a + 1e8 * scale;
    let f1 = f(x1).abs();
    let f2 = f(x2).abs();
    if f2 == 0.0 {
        return true;
    }
    if f1 == 0.0 || !f1.is_finite() || !f2.is_finite() {
        return false;
    }
    let slope = (f2.ln() - f1.ln()) / (x2.ln() - x1.ln());
    slope < -1.0 - 1e-3
}

/// Improper integral of `f` over `[a, inf)` by the substitution
/// `x = a + scale tan(theta)`, after a tail-slope divergence test.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, opts: &QuadOptions) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(GeomError::Domain(format!("scale must be positive, got {scale}")));
    }
    if !tail_decays(&f, a, scale) {
        return Err(GeomError::Divergent(format!("integrand does not decay faster than 1/x beyond {a}")));
    }
    let g = |theta: f64| {
        let c = theta.cos();
        let x = a + scale * theta.tan();
        let v = f(x) * scale / (c * c);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, std::f64::consts::FRAC_PI_2, opts)
}

/// Brent root finding on a bracketing interval `[lo, hi]`.
pub fn root_find<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(GeomError::NoBracket { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}
