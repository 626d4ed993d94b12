//! Scalar Laplacian, the subharmonic exhaustion function and the
//! Rayleigh-quotient estimates for the Laplace and Dirac operators.
//!
//! The Laplacian uses the positive convention `Delta f = -div grad f`.
//! Every integrand of the Rayleigh quotients is independent of `phi`, so the
//! factor `2 pi` of the fiber integration is applied analytically.

use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::curves::{curve_data, CurveData, PlaneCurve};
use crate::error::{GeomError, Result};
use crate::hypersurface::{connection, frame, induced_metric, ChartPoint};
use crate::specfun::{integrate, integrate_semi_infinite, mollifier_mu, root_find, QuadOptions};
use crate::spinors::Provenance;

/// Value, chart gradient and chart Hessian of a scalar field in the order
/// `(s, rho, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarJet {
    pub f: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

/// Scalar field on the chart `(s, rho, phi)` with first and second partials.
pub trait ScalarField {
    /// Value and partials at `p`.
    fn eval(&self, p: &ChartPoint) -> Result<ScalarJet>;

    /// How the partials are obtained.
    fn provenance(&self) -> Provenance;
}

/// Scalar field given by values only; partials come from Richardson
/// extrapolated central differences with step `1e-3 max(1, rho)`.
pub struct FdScalarField<F> {
    f: F,
}

impl<F: Fn(&ChartPoint) -> Result<f64>> FdScalarField<F> {
    /// Wraps a value function.
    pub fn new(f: F) -> Self {
        Self { f }
    }

    fn at(&self, p: &ChartPoint, shift: [f64; 3]) -> Result<f64> {
        (self.f)(&ChartPoint { s: p.s + shift[0], rho: p.rho + shift[1], phi: p.phi + shift[2] })
    }

    fn first(&self, p: &ChartPoint, i: usize, h: f64) -> Result<f64> {
        let central = |h: f64| -> Result<f64> {
            let mut e = [0.0; 3];
            e[i] = h;
            let plus = self.at(p, e)?;
            e[i] = -h;
            Ok((plus - self.at(p, e)?) / (2.0 * h))
        };
        Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
    }

    fn second(&self, p: &ChartPoint, i: usize, j: usize, h: f64, f0: f64) -> Result<f64> {
        let central = |h: f64| -> Result<f64> {
            if i == j {
                let mut e = [0.0; 3];
                e[i] = h;
                let plus = self.at(p, e)?;
                e[i] = -h;
                Ok((plus - 2.0 * f0 + self.at(p, e)?) / (h * h))
            } else {
                let corner = |a: f64, b: f64| {
                    let mut e = [0.0; 3];
                    e[i] = a;
                    e[j] = b;
                    self.at(p, e)
                };
                Ok((corner(h, h)? - corner(h, -h)? - corner(-h, h)? + corner(-h, -h)?) / (4.0 * h * h))
            }
        };
        Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
    }
}

impl<F: Fn(&ChartPoint) -> Result<f64>> ScalarField for FdScalarField<F> {
    fn eval(&self, p: &ChartPoint) -> Result<ScalarJet> {
        let h = (1e-3 * p.rho.max(1.0)).min(0.25 * p.rho);
        let f0 = (self.f)(p)?;
        let mut grad = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for i in 0..3 {
            grad[i] = self.first(p, i, h)?;
            for j in 0..=i {
                let v = self.second(p, i, j, h, f0)?;
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
        Ok(ScalarJet { f: f0, grad, hess })
    }

    fn provenance(&self) -> Provenance {
        Provenance::FiniteDifference
    }
}

/// Chart jet of `u1 = rho^2 (r^2 + 1)` from the curve data at `s`.
fn u1_jet(d: &CurveData, rho: f64) -> ScalarJet {
    let r2p1 = d.r2 + 1.0;
    let a_s = 1.0 + d.u * d.udd + d.v * d.vdd;
    let mut hess = [[0.0; 3]; 3];
    hess[0][0] = 2.0 * rho * rho * a_s;
    hess[0][1] = 4.0 * rho * d.a;
    hess[1][0] = hess[0][1];
    hess[1][1] = 2.0 * r2p1;
    ScalarJet { f: rho * rho * r2p1, grad: [2.0 * rho * rho * d.a, 2.0 * rho * r2p1, 0.0], hess }
}

/// Jet of `g(q)` from the jet of `q` and `(g, g', g'')`.
fn compose(q: &ScalarJet, g: (f64, f64, f64)) -> ScalarJet {
    let (g0, g1, g2) = g;
    ScalarJet {
        f: g0,
        grad: q.grad.map(|v| g1 * v),
        hess: std::array::from_fn(|i| std::array::from_fn(|j| g2 * q.grad[i] * q.grad[j] + g1 * q.hess[i][j])),
    }
}

/// The function `phi* = rho sqrt(r^2 + 1)` with closed-form partials.
#[derive(Debug, Clone)]
pub struct PhiStar {
    curve: PlaneCurve,
}

impl PhiStar {
    /// `phi*` over `curve`.
    pub fn new(curve: &PlaneCurve) -> Self {
        Self { curve: curve.clone() }
    }
}

impl ScalarField for PhiStar {
    fn eval(&self, p: &ChartPoint) -> Result<ScalarJet> {
        let d = curve_data(&self.curve, p.s);
        let q = u1_jet(&d, p.rho);
        let x = q.f.sqrt();
        Ok(compose(&q, (x, 0.5 / x, -0.25 / (x * q.f))))
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// The power `H_eps^alpha` of `H_eps = sqrt2 / (u1^2 + eps^4)^{1/4}` with
/// closed-form partials.
#[derive(Debug, Clone)]
pub struct MeanCurvatureProxy {
    curve: PlaneCurve,
    pub eps: f64,
    pub alpha: f64,
}

impl MeanCurvatureProxy {
    /// `H_eps^alpha` over `curve`; `eps` must be positive.
    pub fn new(curve: &PlaneCurve, eps: f64, alpha: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(GeomError::Domain(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { curve: curve.clone(), eps, alpha })
    }

    /// `(g, g', g'')` of `g(u1) = 2^{alpha/2} (u1^2 + eps^4)^{-alpha/4}`.
    pub fn profile(&self, u1: f64) -> (f64, f64, f64) {
        let e4 = self.eps.powi(4);
        let w = u1 * u1 + e4;
        let g = 2f64.powf(0.5 * self.alpha) * w.powf(-0.25 * self.alpha);
        let c = -0.5 * self.alpha;
        let g1 = c * u1 / w * g;
        let g2 = c * (e4 - u1 * u1) / (w * w) * g + c * u1 / w * g1;
        (g, g1, g2)
    }
}

impl ScalarField for MeanCurvatureProxy {
    fn eval(&self, p: &ChartPoint) -> Result<ScalarJet> {
        let d = curve_data(&self.curve, p.s);
        let q = u1_jet(&d, p.rho);
        Ok(compose(&q, self.profile(q.f)))
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// Chart partials `(d_s, d_rho)` of the coefficients `D, E, F` of the third
/// frame vector, which do not depend on `phi`.
fn frame_coefficient_partials(d: &CurveData, t: f64, rho: f64) -> [[f64; 2]; 3] {
    let r2p1 = d.r2 + 1.0;
    let u1 = rho * rho * r2p1;
    let w = u1 * u1 + t.powi(4);
    let c = w.powf(-0.25) / SQRT_2;
    let c_s = -0.25 * c * 4.0 * d.a * rho.powi(4) * r2p1 / w;
    let c_rho = -0.25 * c * 4.0 * rho.powi(3) * r2p1 * r2p1 / w;
    let a_s = 1.0 + d.u * d.udd + d.v * d.vdd;
    let b_s = d.u * d.vdd - d.v * d.udd;
    [
        [2.0 * d.a * c + r2p1 * c_s, r2p1 * c_rho],
        [-(a_s * rho * c + d.a * rho * c_s), -(d.a * c + d.a * rho * c_rho)],
        [-(b_s * c + d.b * c_s), -d.b * c_rho],
    ]
}

/// Frame derivatives `Y_i(f)` of a jet.
pub fn frame_gradient(curve: &PlaneCurve, t: f64, p: &ChartPoint, jet: &ScalarJet) -> Result<[f64; 3]> {
    let fr = frame(curve, t, p)?;
    Ok(fr.y.map(|y| (0..3).map(|k| y[k] * jet.grad[k]).sum()))
}

/// `|grad f|^2 = sum_i Y_i(f)^2`.
pub fn gradient_norm_sq(curve: &PlaneCurve, t: f64, p: &ChartPoint, jet: &ScalarJet) -> Result<f64> {
    Ok(frame_gradient(curve, t, p, jet)?.iter().map(|v| v * v).sum())
}

/// `Delta f = -sum_i (Y_i Y_i f - (nabla_{Y_i} Y_i) f)` at `p`.
pub fn laplacian_scalar(field: &dyn ScalarField, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<f64> {
    let jet = field.eval(p)?;
    let fr = frame(curve, t, p)?;
    let conn = connection(curve, t, p)?;
    let forms = conn.forms_on_frame();
    let d = curve_data(curve, p.s);
    let second = |y: &[f64; 3]| -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                acc += y[a] * y[b] * jet.hess[a][b];
            }
        }
        acc
    };
    let m = induced_metric(curve, t, p)?;
    let lk = crate::hypersurface::log_k_rho(m.u1, t, p.rho);
    let y1y1 = second(&fr.y[0]) - 0.5 * lk / m.h22 * jet.grad[1];
    let y2y2 = second(&fr.y[1]);
    let dp = frame_coefficient_partials(&d, t, p.rho);
    let y3 = fr.y[2];
    let y3_coeff: [f64; 3] = std::array::from_fn(|k| y3[0] * dp[k][0] + y3[1] * dp[k][1]);
    let y3y3 = second(&y3) + (0..3).map(|k| y3_coeff[k] * jet.grad[k]).sum::<f64>();
    let yf: [f64; 3] = fr.y.map(|y| (0..3).map(|k| y[k] * jet.grad[k]).sum());
    let mut drift = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            drift += forms[i][j][i] * yf[j];
        }
    }
    Ok(-(y1y1 + y2y2 + y3y3) + drift)
}

/// Closed form of `Delta phi*` over circles centred at the origin:
/// `sqrt(W) / (2 rho^3 (r^2+1)^{3/2}) (t^4 / W - 2)`.
pub fn phi_star_laplacian_radial(rho: f64, r2p1: f64, t: f64) -> f64 {
    let t4 = t.powi(4);
    let w = (rho * rho * r2p1).powi(2) + t4;
    w.sqrt() / (2.0 * rho.powi(3) * r2p1.powf(1.5)) * (t4 / w - 2.0)
}

/// `|grad phi*|^2 = 1 / K = sqrt(W) / (2 rho^2 (r^2 + 1))` over circles.
pub fn phi_star_grad_sq_radial(rho: f64, r2p1: f64, t: f64) -> f64 {
    let w = (rho * rho * r2p1).powi(2) + t.powi(4);
    w.sqrt() / (2.0 * rho * rho * r2p1)
}

/// Value of the exhaustion function `phi = rho sqrt(r^2+1) mu(rho)` and
/// whether `p` lies in the compact core `{rho <= 1, s <= s0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exhaustion {
    pub value: f64,
    pub in_core: bool,
}

/// Exhaustion function at `p` with core parameter `s0`.
pub fn exhaustion_phi(curve: &PlaneCurve, p: &ChartPoint, s0: f64) -> Exhaustion {
    let r2p1 = curve_data(curve, p.s).r2 + 1.0;
    Exhaustion { value: p.rho * r2p1.sqrt() * mollifier_mu(p.rho), in_core: p.rho <= 1.0 && p.s <= s0 }
}

/// Uniform grid over `[min, max]` with `count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    /// Grid nodes; a single node sits at `min`.
    pub fn nodes(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + k as f64 * step).collect()
    }
}

/// One grid point of [`subharmonic_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubharmonicRow {
    pub s: f64,
    pub rho: f64,
    pub laplacian: f64,
    pub grad_sq: f64,
    pub inverse_k: f64,
}

/// `Delta phi*` and `|grad phi*|^2` over an `(s, rho)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubharmonicReport {
    pub rows: Vec<SubharmonicRow>,
    /// `Delta phi* < 0` at every grid point.
    pub subharmonic: bool,
    /// `|grad phi*|^2 >= 1/K` at every grid point, with equality over circles.
    pub gradient_bounded: bool,
    /// `phi*` increases along every `rho` column of the grid.
    pub proper: bool,
}

/// Evaluates `phi*` on the grid.
pub fn subharmonic_report(curve: &PlaneCurve, t: f64, s: &AxisRange, rho: &AxisRange) -> Result<SubharmonicReport> {
    let field = PhiStar::new(curve);
    let mut rows = Vec::new();
    let mut proper = true;
    let mut gradient_bounded = true;
    for &sv in &s.nodes() {
        let mut prev = f64::NEG_INFINITY;
        for &rv in &rho.nodes() {
            let p = ChartPoint::new(sv, rv, 0.0)?;
            let jet = field.eval(&p)?;
            let lap = laplacian_scalar(&field, curve, t, &p)?;
            let grad_sq = gradient_norm_sq(curve, t, &p, &jet)?;
            let m = induced_metric(curve, t, &p)?;
            let inverse_k = (m.u1 * m.u1 + t.powi(4)).sqrt() / (2.0 * m.u1);
            gradient_bounded &= grad_sq >= inverse_k * (1.0 - 1e-12);
            proper &= jet.f > prev;
            prev = jet.f;
            rows.push(SubharmonicRow { s: sv, rho: rv, laplacian: lap, grad_sq, inverse_k });
        }
    }
    let subharmonic = rows.iter().all(|r| r.laplacian < 0.0);
    Ok(SubharmonicReport { rows, subharmonic, gradient_bounded, proper })
}

fn require_closed(curve: &PlaneCurve) -> Result<()> {
    if curve.is_closed() {
        Ok(())
    } else {
        Err(GeomError::Domain("Rayleigh quotients need a closed curve".into()))
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeomError::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// `2 pi int_0^L int_0^inf f(s, rho) d rho ds` with the inner integral taken
/// on the natural scale `scale / sqrt(r^2 + 1)`.
fn fiber_integral<F: Fn(&CurveData, f64) -> f64>(curve: &PlaneCurve, scale: f64, f: F, tol: f64) -> Result<f64> {
    let opts = QuadOptions::relative(tol);
    let inner = |s: f64| -> Result<f64> {
        let d = curve_data(curve, s);
        let sc = scale / (d.r2 + 1.0).sqrt();
        let near = integrate(|rho| if rho > 0.0 { f(&d, rho) } else { 0.0 }, 0.0, sc, &opts)?;
        let far = integrate_semi_infinite(|rho| f(&d, rho), sc, sc, &opts)?;
        Ok(near + far)
    };
    if curve.circle_params().is_some() {
        return Ok(2.0 * PI * curve.total_length() * inner(0.0)?);
    }
    let err = std::cell::RefCell::new(None);
    let total = integrate(
        |s| match inner(s) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        curve.total_length(),
        &QuadOptions::relative(tol),
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(2.0 * PI * total?)
}

/// Rayleigh quotient of `f = H_eps^2` for the scalar Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceRayleigh {
    pub eps: f64,
    pub t: f64,
    /// `int |grad f|^2 dM`.
    pub numerator: f64,
    /// `int f^2 dM`.
    pub denominator: f64,
    pub quotient: f64,
    /// `8 / (21 eps^2)`.
    pub bound: f64,
    /// `(8 sqrt8 pi / eps) int ds / (r^2 + 1)`.
    pub denominator_lower: f64,
    /// `(64 sqrt8 pi / (21 eps^3)) int ds / (r^2 + 1)`.
    pub numerator_upper: f64,
}

/// Rayleigh quotient of `H_eps^2` over a closed curve.
pub fn laplace_rayleigh(eps: f64, t: f64, curve: &PlaneCurve, quad_tol: f64) -> Result<LaplaceRayleigh> {
    require_closed(curve)?;
    require_positive("eps", eps)?;
    if !(t >= 0.0) {
        return Err(GeomError::Domain(format!("t must be nonnegative, got {t}")));
    }
    let field = MeanCurvatureProxy::new(curve, eps, 2.0)?;
    let t4 = t.powi(4);
    let sqrt_det = |d: &CurveData, rho: f64| {
        let r2p1 = d.r2 + 1.0;
        let u1 = rho * rho * r2p1;
        2.0 * SQRT_2 * rho.powi(3) * r2p1 * (u1 * u1 + t4).powf(-0.25)
    };
    let scale = eps.max(t).sqrt();
    let denominator = fiber_integral(
        curve,
        scale,
        |d, rho| {
            let u1 = rho * rho * (d.r2 + 1.0);
            field.profile(u1).0.powi(2) * sqrt_det(d, rho)
        },
        quad_tol,
    )?;
    let numerator = fiber_integral(
        curve,
        scale,
        |d, rho| {
            let q = u1_jet(d, rho);
            let jet = compose(&q, field.profile(q.f));
            let r2p1 = d.r2 + 1.0;
            let w = q.f * q.f + t4;
            let k = 2.0 * q.f / w.sqrt();
            let h22 = r2p1 * k;
            let c = w.powf(-0.25) / SQRT_2;
            let y1 = jet.grad[1] / h22.sqrt();
            let y3 = r2p1 * c * jet.grad[0] - d.a * rho * c * jet.grad[1];
            (y1 * y1 + y3 * y3) * sqrt_det(d, rho)
        },
        quad_tol,
    )?;
    let inv_r = if curve.circle_params().is_some() {
        curve.total_length() / (curve_data(curve, 0.0).r2 + 1.0)
    } else {
        integrate(|s| 1.0 / (curve_data(curve, s).r2 + 1.0), 0.0, curve.total_length(), &QuadOptions::relative(quad_tol))?
    };
    let sqrt8 = 8f64.sqrt();
    Ok(LaplaceRayleigh {
        eps,
        t,
        numerator,
        denominator,
        quotient: numerator / denominator,
        bound: 8.0 / (21.0 * eps * eps),
        denominator_lower: 8.0 * sqrt8 * PI / eps * inv_r,
        numerator_upper: 64.0 * sqrt8 * PI / (21.0 * eps.powi(3)) * inv_r,
    })
}

/// Rayleigh quotient of the approximating spinors `psi_eps` with
/// `|C_1|^2 + |C_2|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracRayleigh {
    pub eps: f64,
    pub t: f64,
    /// `||psi_eps||^2`.
    pub norm_sq: f64,
    /// `||D psi_eps||^2`.
    pub dirac_norm_sq: f64,
    pub quotient: f64,
}

/// `-S_eps p_eps` and `-S_eps p_eps q_eps` at `rho` over the curve data.
fn dirac_densities(d: &CurveData, eps: f64, t: f64, rho: f64) -> (f64, f64) {
    let r2p1 = d.r2 + 1.0;
    let e4 = eps.powi(4);
    let x = rho * r2p1.sqrt();
    let x4 = x.powi(4);
    let w = x4 + t.powi(4);
    let minus_s = x4 / (x4 + e4).powf(1.5);
    let sqrt_det = 2.0 * SQRT_2 * rho.powi(3) * r2p1 * w.powf(-0.25);
    let p_eps = sqrt_det * (-6.0 * e4 * x).exp();
    let h22 = r2p1 * 2.0 * x * x / w.sqrt();
    let q_eps = 9.0 * e4 * e4 / (h22 * rho * rho) * (1.0 / (x4 + e4) - x).powi(2);
    (minus_s * p_eps, minus_s * p_eps * q_eps)
}

/// Rayleigh quotient `||D psi_eps||^2 / ||psi_eps||^2` over a closed curve.
pub fn dirac_rayleigh(eps: f64, t: f64, curve: &PlaneCurve, quad_tol: f64) -> Result<DiracRayleigh> {
    require_closed(curve)?;
    require_positive("eps", eps)?;
    require_positive("t", t)?;
    let norm_sq = fiber_integral(curve, eps.sqrt(), |d, rho| dirac_densities(d, eps, t, rho).0, quad_tol)?;
    let near = fiber_integral(curve, eps.sqrt(), |d, rho| dirac_densities(d, eps, t, rho).1, quad_tol)?;
    Ok(DiracRayleigh { eps, t, norm_sq, dirac_norm_sq: near, quotient: near / norm_sq })
}

/// Named constants of the Dirac Rayleigh bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub eps: f64,
    pub t: f64,
    pub r: f64,
    /// Slope threshold.
    pub a: f64,
    /// Cutting point `mu / sqrt(r^2 + 1)`.
    #[serde(rename = "Pa")]
    pub p_a: f64,
    /// `(2 sqrt2 (6 eps^4 + t^4) / a)^{1/5}`.
    pub mu: f64,
    /// `2 sqrt2 mu^7 / ((mu^4 + eps^4)^{3/2} (mu^4 + t^4)^{1/4})`.
    #[serde(rename = "M")]
    pub m: f64,
    /// `t / (sqrt2 (t^4 - eps^4)^{1/4})`.
    #[serde(rename = "N")]
    pub n: f64,
    /// Root of `rho sqrt(r^2+1) (rho^4 (r^2+1)^2 + eps^4) = 1`.
    #[serde(rename = "Q")]
    pub q: f64,
    /// `(6^6 / 5^5)^{1/4}`.
    pub kappa: f64,
}

/// `(6^6 / 5^5)^{1/4}`.
pub fn kappa() -> f64 {
    (6f64.powi(6) / 5f64.powi(5)).powf(0.25)
}

/// Default slope threshold `a = t / 100`.
pub fn default_slope(t: f64) -> f64 {
    0.01 * t
}

/// Positive root `x` of `x (x^4 + eps^4) = 1`.
pub fn quintic_root(eps: f64) -> Result<f64> {
    let e4 = eps.powi(4);
    root_find(|x| x * (x.powi(4) + e4) - 1.0, 0.0, 1.0, 1e-15)
}

/// Bound constants at `(eps, t, a)` over a base point with `|Gamma| = r`.
pub fn bound_constants(eps: f64, t: f64, a: f64, r: f64) -> Result<BoundConstants> {
    require_positive("eps", eps)?;
    require_positive("t", t)?;
    require_positive("a", a)?;
    if !(eps < t) {
        return Err(GeomError::Domain(format!("bound constants need eps < t, got eps = {eps}, t = {t}")));
    }
    let e4 = eps.powi(4);
    let t4 = t.powi(4);
    let sq = (r * r + 1.0).sqrt();
    let mu = (2.0 * SQRT_2 * (6.0 * e4 + t4) / a).powf(0.2);
    let mu4 = mu.powi(4);
    let m = 2.0 * SQRT_2 * mu.powi(7) / ((mu4 + e4).powf(1.5) * (mu4 + t4).powf(0.25));
    let n = t / (SQRT_2 * (t4 - e4).powf(0.25));
    let q = quintic_root(eps)? / sq;
    Ok(BoundConstants { eps, t, r, a, p_a: mu / sq, mu, m, n, q, kappa: kappa() })
}

/// Limits of `mu` and `M` as `eps -> 0`.
pub fn bound_constants_limit(t: f64, a: f64) -> (f64, f64) {
    let mu = (2.0 * SQRT_2 * t.powi(4) / a).powf(0.2);
    let x = (2.0 * SQRT_2 / (a * t)).powf(0.8);
    (mu, 2.0 * SQRT_2 * (x / (x + 1.0)).powf(0.25))
}

/// Assembled upper bound for the Dirac Rayleigh quotient:
/// `9 sqrt2 N t / M (eps^-3 kappa^-2 (1 - e^{-6 Q eps^4 sqrt(r^2+1)}) +
/// eps^7 e^{-6 Q eps^4 sqrt(r^2+1)}) / e^{-6 P_a eps^4 sqrt(r^2+1)}`.
///
/// `Q sqrt(r^2+1)` and `P_a sqrt(r^2+1)` do not depend on `r`, so the
/// bound is the same for every base curve. Requires `2 eps^4 < t^4`.
pub fn dirac_bound(c: &BoundConstants) -> Result<f64> {
    let e4 = c.eps.powi(4);
    if !(2.0 * e4 < c.t.powi(4)) {
        return Err(GeomError::Domain(format!("the bound needs 2 eps^4 < t^4, got eps = {}, t = {}", c.eps, c.t)));
    }
    let sq = (c.r * c.r + 1.0).sqrt();
    let eq = (-6.0 * c.q * e4 * sq).exp();
    let ep = (-6.0 * c.p_a * e4 * sq).exp();
    let inner = (1.0 - eq) / (c.eps.powi(3) * c.kappa * c.kappa) + c.eps.powi(7) * eq;
    Ok(9.0 * SQRT_2 * c.n * c.t / c.m * inner / ep)
}

/// Lower Ricci bound and the resulting bound on the bottom of the Laplace
/// spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicciBounds {
    /// `inf R_33 = -2 / t^2`.
    pub ricci_lower: f64,
    /// `t^-2`.
    pub mu0_upper: f64,
}

/// Ricci bounds at `t`; fails for `t = 0`, where the Ricci curvature is
/// unbounded below.
pub fn ricci_spectral_bounds(t: f64) -> Result<RicciBounds> {
    if t == 0.0 {
        return Err(GeomError::Domain("Ricci curvature is unbounded below at t = 0".into()));
    }
    require_positive("t", t)?;
    Ok(RicciBounds { ricci_lower: -2.0 / (t * t), mu0_upper: 1.0 / (t * t) })
}

/// JSON report of the Dirac Rayleigh estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub eps: f64,
    pub t: f64,
    pub quotient: f64,
    pub analytic_bound: f64,
    pub constants: ReportConstants,
}

/// Constants listed in a [`SpectralReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportConstants {
    #[serde(rename = "Pa")]
    pub p_a: f64,
    pub mu: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

/// Dirac Rayleigh quotient together with its analytic bound; constants are
/// evaluated over the curve point at `s = 0`.
pub fn spectral_report(eps: f64, t: f64, a: f64, curve: &PlaneCurve, quad_tol: f64) -> Result<SpectralReport> {
    let r = curve_data(curve, 0.0).r2.sqrt();
    let c = bound_constants(eps, t, a, r)?;
    let ray = dirac_rayleigh(eps, t, curve, quad_tol)?;
    Ok(SpectralReport {
        eps,
        t,
        quotient: ray.quotient,
        analytic_bound: dirac_bound(&c)?,
        constants: ReportConstants { p_a: c.p_a, mu: c.mu, m: c.m, n: c.n, q: c.q },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_root_value() {
        let x = quintic_root(1.0).unwrap();
        assert!((x.powi(5) + x - 1.0).abs() < 1e-14);
        let c = bound_constants(0.5, 1.0, 0.01, 1.0).unwrap();
        assert!((c.q * 2f64.sqrt() - quintic_root(0.5).unwrap()).abs() < 1e-15);
        assert!(c.q > 0.0 && c.q < 1.0 / 2f64.sqrt());
    }

    #[test]
    fn phi_star_radial_value() {
        let v = phi_star_laplacian_radial(1.0, 2.0, 1.0);
        let expected = 5f64.sqrt() / (2.0 * 2.0 * 2f64.sqrt()) * (0.2 - 2.0);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn ricci_bounds_exact() {
        let b = ricci_spectral_bounds(1.0).unwrap();
        assert_eq!((b.ricci_lower, b.mu0_upper), (-2.0, 1.0));
        assert!(ricci_spectral_bounds(0.0).is_err());
    }
}
