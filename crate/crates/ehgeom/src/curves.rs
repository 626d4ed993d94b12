//! Plane curves parametrized by arc length.
//!
//! A [`PlaneCurve`] is the base `Gamma(s) = u(s) + i v(s)` of a hypersurface.
//! Circles and lines are evaluated analytically. Every other curve is a
//! regular raw parametrization composed with the numerically inverted
//! arc-length function, so unit speed holds to round-off. The module also
//! provides the geodesic curvature of the curve seen in the round sphere and
//! unitary Mobius transforms.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::specfun::{integrate, QuadOptions};
use crate::spline::{CubicSpline, SplineEnds};

/// Point of a raw parametrized curve with its first two parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPoint {
    pub z: Complex64,
    pub dz: Complex64,
    pub ddz: Complex64,
}

type RawFn = dyn Fn(f64) -> RawPoint + Send + Sync;

/// Regular C2 curve with an arbitrary parameter on `[start, end]`.
#[derive(Clone)]
pub struct RawCurve {
    start: f64,
    end: f64,
    closed: bool,
    f: Arc<RawFn>,
}

impl fmt::Debug for RawCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RawCurve")
            .field("start", &self.start)
            .field("end", &self.end)
            .field("closed", &self.closed)
            .finish_non_exhaustive()
    }
}

impl RawCurve {
    /// Wraps a parametrization given on `[start, end]`.
    pub fn new<F>(start: f64, end: f64, closed: bool, f: F) -> Result<Self>
    where
        F: Fn(f64) -> RawPoint + Send + Sync + 'static,
    {
        if !(end > start) {
            return Err(GeomError::Invalid(format!("empty parameter interval [{start}, {end}]")));
        }
        Ok(Self { start, end, closed, f: Arc::new(f) })
    }

    /// Axis-parallel ellipse `(a cos theta, b sin theta)`.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(0.0, std::f64::consts::TAU, true, move |th| {
            let (s, c) = th.sin_cos();
            RawPoint {
                z: Complex64::new(a * c, b * s),
                dz: Complex64::new(-a * s, b * c),
                ddz: Complex64::new(-a * c, -b * s),
            }
        })
    }

    /// Cubic spline through sample points, parametrized by chord length.
    pub fn from_samples(points: &[[f64; 2]], closed: bool) -> Result<Self> {
        let mut pts: Vec<[f64; 2]> = points.to_vec();
        if closed {
            let first = pts[0];
            let last = *pts.last().ok_or_else(|| GeomError::Invalid("no sample points".into()))?;
            if (first[0] - last[0]).hypot(first[1] - last[1]) > 0.0 {
                pts.push(first);
            }
        }
        if pts.len() < 4 {
            return Err(GeomError::Invalid("at least 3 distinct sample points are required".into()));
        }
        let mut knots = vec![0.0];
        for w in pts.windows(2) {
            let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            if d == 0.0 {
                return Err(GeomError::Invalid("consecutive sample points coincide".into()));
            }
            knots.push(knots.last().copied().unwrap_or(0.0) + d);
        }
        let ends = if closed { SplineEnds::Periodic } else { SplineEnds::Natural };
        let su = CubicSpline::new(knots.clone(), pts.iter().map(|p| p[0]).collect(), ends)?;
        let sv = CubicSpline::new(knots.clone(), pts.iter().map(|p| p[1]).collect(), ends)?;
        let end = *knots.last().expect("knots are non-empty");
        Self::new(0.0, end, closed, move |x| {
            let (u, du, ddu) = su.eval(x);
            let (v, dv, ddv) = sv.eval(x);
            RawPoint { z: Complex64::new(u, v), dz: Complex64::new(du, dv), ddz: Complex64::new(ddu, ddv) }
        })
    }

    /// Evaluates the raw parametrization.
    pub fn eval(&self, x: f64) -> RawPoint {
        (self.f)(x)
    }

    /// Parameter interval.
    pub fn interval(&self) -> (f64, f64) {
        (self.start, self.end)
    }
}

/// Family tag of a plane curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFamily {
    /// Circle of radius `r0` about the origin traversed with orientation `eps`.
    Circle { r0: f64, eps: i8 },
    /// Straight line.
    Line,
    /// Any other curve, represented through a reparametrized raw curve.
    Sampled,
}

#[derive(Clone)]
struct Reparam {
    raw: RawCurve,
    params: Vec<f64>,
    lengths: Vec<f64>,
    guess: CubicSpline,
}

#[derive(Clone)]
enum Repr {
    Circle { r0: f64, eps: i8, phase: f64 },
    Line { point: Complex64, dir: Complex64 },
    Reparam(Arc<Reparam>),
}

/// Curve in the complex plane parametrized by arc length.
#[derive(Clone)]
pub struct PlaneCurve {
    repr: Repr,
    total_length: f64,
    closed: bool,
}

impl fmt::Debug for PlaneCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlaneCurve")
            .field("family", &self.family())
            .field("total_length", &self.total_length)
            .field("closed", &self.closed)
            .finish()
    }
}

/// Position and first two arc-length derivatives of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub u: f64,
    pub v: f64,
    pub ud: f64,
    pub vd: f64,
    pub udd: f64,
    pub vdd: f64,
}

/// Cartesian data of a curve together with the derived scalars `r^2`,
/// `a = u u' + v v'` and `b = u v' - v u'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveData {
    pub u: f64,
    pub v: f64,
    pub ud: f64,
    pub vd: f64,
    pub udd: f64,
    pub vdd: f64,
    pub r2: f64,
    pub a: f64,
    pub b: f64,
}

impl PlaneCurve {
    /// Circle `r0 exp(i (phase + eps s / r0))`.
    pub fn circle(r0: f64, eps: i8, phase: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(GeomError::Invalid(format!("circle radius must be positive, got {r0}")));
        }
        if eps != 1 && eps != -1 {
            return Err(GeomError::Invalid(format!("orientation must be +1 or -1, got {eps}")));
        }
        Ok(Self { repr: Repr::Circle { r0, eps, phase }, total_length: std::f64::consts::TAU * r0, closed: true })
    }

    /// Straight segment of the given length through `point` along `direction`.
    pub fn line(point: [f64; 2], direction: [f64; 2], length: f64) -> Result<Self> {
        let dir = Complex64::new(direction[0], direction[1]);
        if dir.norm() == 0.0 || !(length > 0.0) {
            return Err(GeomError::Invalid("line needs a nonzero direction and positive length".into()));
        }
        Ok(Self {
            repr: Repr::Line { point: Complex64::new(point[0], point[1]), dir: dir / dir.norm() },
            total_length: length,
            closed: false,
        })
    }

    /// Arc length of the curve.
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Whether the curve is closed.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Family tag.
    pub fn family(&self) -> CurveFamily {
        match &self.repr {
            Repr::Circle { r0, eps, .. } => CurveFamily::Circle { r0: *r0, eps: *eps },
            Repr::Line { .. } => CurveFamily::Line,
            Repr::Reparam(_) => CurveFamily::Sampled,
        }
    }

    /// Circle radius and orientation when the curve is a centred circle.
    pub fn circle_params(&self) -> Option<(f64, i8)> {
        match self.repr {
            Repr::Circle { r0, eps, .. } => Some((r0, eps)),
            _ => None,
        }
    }

    /// Position and derivatives at arc length `s`; closed curves wrap `s`.
    pub fn eval(&self, s: f64) -> CurvePoint {
        match &self.repr {
            Repr::Circle { r0, eps, phase } => {
                let e = f64::from(*eps);
                let th = phase + e * s / r0;
                let (sn, cs) = th.sin_cos();
                CurvePoint {
                    u: r0 * cs,
                    v: r0 * sn,
                    ud: -e * sn,
                    vd: e * cs,
                    udd: -cs / r0,
                    vdd: -sn / r0,
                }
            }
            Repr::Line { point, dir } => {
                let z = point + dir * s;
                CurvePoint { u: z.re, v: z.im, ud: dir.re, vd: dir.im, udd: 0.0, vdd: 0.0 }
            }
            Repr::Reparam(rp) => {
                let s = if self.closed {
                    s.rem_euclid(self.total_length)
                } else {
                    s.clamp(0.0, self.total_length)
                };
                rp.eval(s)
            }
        }
    }

    /// Unitary action `z -> e^{i theta} z`, applied exactly.
    fn rotated(&self, rot: Complex64) -> Self {
        let repr = match &self.repr {
            Repr::Circle { r0, eps, phase } => Repr::Circle { r0: *r0, eps: *eps, phase: phase + rot.arg() },
            Repr::Line { point, dir } => Repr::Line { point: point * rot, dir: dir * rot },
            Repr::Reparam(rp) => {
                let raw = rp.raw.clone();
                let f = move |x: f64| {
                    let p = raw.eval(x);
                    RawPoint { z: p.z * rot, dz: p.dz * rot, ddz: p.ddz * rot }
                };
                let new_raw = RawCurve { start: rp.raw.start, end: rp.raw.end, closed: rp.raw.closed, f: Arc::new(f) };
                Repr::Reparam(Arc::new(Reparam {
                    raw: new_raw,
                    params: rp.params.clone(),
                    lengths: rp.lengths.clone(),
                    guess: rp.guess.clone(),
                }))
            }
        };
        Self { repr, total_length: self.total_length, closed: self.closed }
    }
}

fn speed_of(p: &RawPoint) -> f64 {
    p.dz.norm()
}

impl Reparam {
    fn arc_between(&self, a: f64, b: f64) -> f64 {
        const XG: [f64; 5] = [
            0.0,
            0.538_469_310_105_683_1,
            -0.538_469_310_105_683_1,
            0.906_179_845_938_664,
            -0.906_179_845_938_664,
        ];
        const WG: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        for k in 0..5 {
            sum += WG[k] * speed_of(&self.raw.eval(c + h * XG[k]));
        }
        sum * h
    }

    fn length_to(&self, th: f64) -> f64 {
        let k = self.params.partition_point(|&x| x <= th).saturating_sub(1).min(self.params.len() - 2);
        self.lengths[k] + self.arc_between(self.params[k], th)
    }

    fn param_at(&self, s: f64) -> f64 {
        let n = self.lengths.len();
        let k = match self.lengths.partition_point(|&l| l <= s) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (lo, hi) = (self.params[k], self.params[k + 1]);
        let mut th = self.guess.eval(s).0.clamp(lo, hi);
        for _ in 0..8 {
            let f = self.lengths[k] + self.arc_between(lo, th) - s;
            let sp = speed_of(&self.raw.eval(th));
            let step = f / sp;
            th -= step;
            if step.abs() <= 1e-15 * (1.0 + th.abs()) {
                break;
            }
        }
        th
    }

    fn eval(&self, s: f64) -> CurvePoint {
        let th = self.param_at(s);
        let p = self.raw.eval(th);
        let sp = speed_of(&p);
        let tangent = p.dz / sp;
        let sp_dot = (p.dz.re * p.ddz.re + p.dz.im * p.ddz.im) / sp;
        let acc = p.ddz / (sp * sp) - p.dz * (sp_dot / (sp * sp * sp));
        CurvePoint { u: p.z.re, v: p.z.im, ud: tangent.re, vd: tangent.im, udd: acc.re, vdd: acc.im }
    }
}

/// Speeds below this fraction of the mean speed are treated as singular.
const REGULARITY_FRACTION: f64 = 1e-8;

/// Reparametrizes a raw curve by arc length.
///
/// The cumulative arc length is tabulated on `n_samples` panels by adaptive
/// quadrature; evaluation inverts it with Newton steps seeded from a spline
/// of the inverse table. Unit speed is verified at the table nodes and
/// panel midpoints against `tol`.
pub fn arc_length_reparametrize(raw: &RawCurve, n_samples: usize, tol: f64) -> Result<PlaneCurve> {
    let n = n_samples.max(8);
    let (a, b) = raw.interval();
    let probe = 8 * n;
    let mut speeds = Vec::with_capacity(probe + 1);
    for k in 0..=probe {
        let x = a + (b - a) * k as f64 / probe as f64;
        speeds.push((x, speed_of(&raw.eval(x))));
    }
    let mean = speeds.iter().map(|p| p.1).sum::<f64>() / speeds.len() as f64;
    if !mean.is_finite() {
        return Err(GeomError::Invalid("raw curve has non-finite speed".into()));
    }
    if let Some(&(at, speed)) = speeds.iter().find(|p| !(p.1 > REGULARITY_FRACTION * mean)) {
        return Err(GeomError::NonRegular { at, speed });
    }
    let params: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 200 };
    let mut lengths = vec![0.0];
    for w in params.windows(2) {
        let piece = integrate(|x| speed_of(&raw.eval(x)), w[0], w[1], &opts)?;
        lengths.push(lengths.last().copied().unwrap_or(0.0) + piece);
    }
    let total = *lengths.last().expect("lengths are non-empty");
    let guess = CubicSpline::new(lengths.clone(), params.clone(), SplineEnds::Natural)?;
    let rp = Reparam { raw: raw.clone(), params, lengths, guess };
    let curve = PlaneCurve { repr: Repr::Reparam(Arc::new(rp)), total_length: total, closed: raw.closed };
    if let Repr::Reparam(rp) = &curve.repr {
        for k in 0..(2 * n) {
            let s = total * k as f64 / (2 * n) as f64;
            let p = rp.eval(s);
            let defect = (p.ud * p.ud + p.vd * p.vd - 1.0).abs();
            if defect > tol {
                return Err(GeomError::Invalid(format!("unit-speed defect {defect:e} at s = {s}")));
            }
            let back = rp.length_to(rp.param_at(s));
            if (back - s).abs() > tol * total.max(1.0) {
                return Err(GeomError::Invalid(format!("arc-length inversion failed at s = {s}")));
            }
        }
    }
    Ok(curve)
}

/// Cartesian data and the derived scalars at arc length `s`.
pub fn curve_data(curve: &PlaneCurve, s: f64) -> CurveData {
    let p = curve.eval(s);
    CurveData {
        u: p.u,
        v: p.v,
        ud: p.ud,
        vd: p.vd,
        udd: p.udd,
        vdd: p.vdd,
        r2: p.u * p.u + p.v * p.v,
        a: p.u * p.ud + p.v * p.vd,
        b: p.u * p.vd - p.v * p.ud,
    }
}

/// Geodesic curvature of the curve in the round sphere,
/// `((u' v'' - v' u'')(r^2 + 1) - 2 (u v' - v u')) / 2`.
pub fn geodesic_curvature(curve: &PlaneCurve, s: f64) -> f64 {
    let d = curve_data(curve, s);
    ((d.ud * d.vdd - d.vd * d.udd) * (d.r2 + 1.0) - 2.0 * d.b) / 2.0
}

/// Complex 2x2 matrix `[[a, b], [c, d]]` acting by `z -> (a z + b)/(c z + d)`.
pub type Mobius = [[Complex64; 2]; 2];

/// Largest entry of `A^dagger A - Id`.
pub fn unitarity_defect(m: &Mobius) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += m[k][i].conj() * m[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

/// Denominators `|c z + d|` below this value count as a pole crossing.
const POLE_THRESHOLD: f64 = 1e-6;

/// Applies a unitary Mobius transform and re-parametrizes the image by arc length.
pub fn mobius_apply(m: &Mobius, curve: &PlaneCurve, tol: f64) -> Result<PlaneCurve> {
    let defect = unitarity_defect(m);
    if defect > tol.max(1e-12) {
        return Err(GeomError::NotUnitary { defect });
    }
    let [[a, b], [c, d]] = *m;
    if b.norm() <= 1e-15 && c.norm() <= 1e-15 {
        return Ok(curve.rotated(a / d));
    }
    let len = curve.total_length();
    let probe = 8192;
    let denom = |s: f64| {
        let p = curve.eval(s);
        (c * Complex64::new(p.u, p.v) + d).norm()
    };
    let mut worst = (0.0, f64::INFINITY);
    for k in 0..=probe {
        let s = len * k as f64 / probe as f64;
        let v = denom(s);
        if v < worst.1 {
            worst = (s, v);
        }
    }
    let h = len / probe as f64;
    let (mut lo, mut hi) = ((worst.0 - h).max(0.0), (worst.0 + h).min(len));
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if denom(m1) < denom(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let s_min = 0.5 * (lo + hi);
    if denom(s_min).min(worst.1) < POLE_THRESHOLD {
        let s = if denom(s_min) < worst.1 { s_min } else { worst.0 };
        return Err(GeomError::PoleCrossing { s });
    }
    let base = curve.clone();
    let det = a * d - b * c;
    let raw = RawCurve::new(0.0, len, curve.is_closed(), move |s| {
        let p = base.eval(s);
        let z = Complex64::new(p.u, p.v);
        let dz = Complex64::new(p.ud, p.vd);
        let ddz = Complex64::new(p.udd, p.vdd);
        let q = c * z + d;
        RawPoint {
            z: (a * z + b) / q,
            dz: det * dz / (q * q),
            ddz: det * (ddz / (q * q) - 2.0 * c * dz * dz / (q * q * q)),
        }
    })?;
    arc_length_reparametrize(&raw, 1024, tol)
}

/// JSON description of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CurveSpec {
    /// Centred circle.
    Circle {
        r0: f64,
        #[serde(default = "default_eps")]
        eps: i8,
        #[serde(default)]
        phase: f64,
    },
    /// Straight segment.
    Line {
        #[serde(default)]
        point: [f64; 2],
        #[serde(default = "default_direction")]
        direction: [f64; 2],
        #[serde(default = "default_line_length")]
        length: f64,
    },
    /// Curve through sample points.
    Samples {
        points: Vec<[f64; 2]>,
        #[serde(default = "default_closed")]
        closed: bool,
    },
}

fn default_eps() -> i8 {
    1
}
fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_line_length() -> f64 {
    10.0
}
fn default_closed() -> bool {
    true
}

impl CurveSpec {
    /// Builds the described curve.
    pub fn build(&self) -> Result<PlaneCurve> {
        match self {
            CurveSpec::Circle { r0, eps, phase } => PlaneCurve::circle(*r0, *eps, *phase),
            CurveSpec::Line { point, direction, length } => PlaneCurve::line(*point, *direction, *length),
            CurveSpec::Samples { points, closed } => {
                let raw = RawCurve::from_samples(points, *closed)?;
                arc_length_reparametrize(&raw, (8 * points.len()).max(256), 1e-10)
            }
        }
    }
}
