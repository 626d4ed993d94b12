//! Spinors on the hypersurfaces in the global frame `(Y_1, Y_2, Y_3)`.
//!
//! Spinors are pairs of complex numbers. The frame vectors act by the fixed
//! matrices `Y_1 = diag(i, -i)`, `Y_2 = [[0, i], [i, 0]]` and
//! `Y_3 = [[0, -1], [1, 0]]`, and the spin connection is
//! `nabla psi = d psi + (1/2) sum_{i<j} omega_ij Y_i Y_j psi`.
//! The module provides the Dirac operator, explicit spinor families, the
//! weak Killing (WK) field equation and its integrability condition, the
//! energy-momentum tensor, transport along chart paths, and the radial ODE
//! system obtained by separating variables over centred circles.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::curves::{curve_data, PlaneCurve};
use crate::error::{GeomError, Result};
use crate::hypersurface::{connection, curvature, frame, induced_metric, log_k_rho, second_form, ChartPoint};
use crate::ode::{dopri5, OdeOptions};
use crate::specfun::{integrate, integrate_semi_infinite, QuadOptions};

/// Element of the spin representation `C^2`.
pub type Spinor = [Complex64; 2];

/// 2x2 complex matrix acting on spinors.
pub type SpinMatrix = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Matrix of the frame vector `Y_{i+1}` for `i` in `0..3`.
pub fn clifford_generator(i: usize) -> SpinMatrix {
    match i {
        0 => [[I, ZERO], [ZERO, -I]],
        1 => [[ZERO, I], [I, ZERO]],
        2 => [[ZERO, -ONE], [ONE, ZERO]],
        _ => panic!("frame index {i} out of range"),
    }
}

/// Applies a matrix to a spinor.
pub fn mat_apply(m: &SpinMatrix, psi: &Spinor) -> Spinor {
    [m[0][0] * psi[0] + m[0][1] * psi[1], m[1][0] * psi[0] + m[1][1] * psi[1]]
}

/// Clifford product `X . psi` for `X = sum_i x_i Y_i`.
pub fn clifford_mul(x: &[f64; 3], psi: &Spinor) -> Spinor {
    let mut out = [ZERO; 2];
    for (i, xi) in x.iter().enumerate() {
        let y = mat_apply(&clifford_generator(i), psi);
        out[0] += y[0] * xi;
        out[1] += y[1] * xi;
    }
    out
}

/// Action of the volume element `Y_1 Y_2 Y_3`.
pub fn volume_element(psi: &Spinor) -> Spinor {
    let e = |i: usize, v: &Spinor| mat_apply(&clifford_generator(i), v);
    e(0, &e(1, &e(2, psi)))
}

/// Hermitian product `<a, b> = a_1 conj(b_1) + a_2 conj(b_2)`.
pub fn spinor_inner(a: &Spinor, b: &Spinor) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// Squared length `|psi|^2`.
pub fn spinor_norm_sq(psi: &Spinor) -> f64 {
    psi[0].norm_sqr() + psi[1].norm_sqr()
}

fn add(a: &Spinor, b: &Spinor) -> Spinor {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: &Spinor, b: &Spinor) -> Spinor {
    [a[0] - b[0], a[1] - b[1]]
}

fn scale(c: Complex64, a: &Spinor) -> Spinor {
    [c * a[0], c * a[1]]
}

fn scale_re(c: f64, a: &Spinor) -> Spinor {
    [a[0] * c, a[1] * c]
}

/// Origin of the partial derivatives supplied by a spinor field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    ClosedForm,
    FiniteDifference,
}

/// Value of a spinor field and its chart partials at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorJet {
    pub psi: Spinor,
    pub ds: Spinor,
    pub drho: Spinor,
    pub dphi: Spinor,
}

impl SpinorJet {
    /// Directional derivative along a chart vector `(v_s, v_rho, v_phi)`.
    pub fn along(&self, v: &[f64; 3]) -> Spinor {
        add(&add(&scale_re(v[0], &self.ds), &scale_re(v[1], &self.drho)), &scale_re(v[2], &self.dphi))
    }
}

/// Spinor field on the chart `(s, rho, phi)` together with its first partials.
pub trait SpinorField {
    /// Value and partials at `p`.
    fn eval(&self, p: &ChartPoint) -> Result<SpinorJet>;

    /// How the partials are obtained.
    fn provenance(&self) -> Provenance;
}

/// Spinor field given by values only; partials come from Richardson
/// extrapolated central differences with step `1e-5 max(1, rho)`.
pub struct FdSpinorField<F> {
    f: F,
}

impl<F: Fn(&ChartPoint) -> Result<Spinor>> FdSpinorField<F> {
    /// Wraps a value function.
    pub fn new(f: F) -> Self {
        Self { f }
    }

    fn partial(&self, p: &ChartPoint, idx: usize, h: f64) -> Result<Spinor> {
        let at = |d: f64| {
            let mut c = p.coords();
            c[idx] += d;
            (self.f)(&ChartPoint { s: c[0], rho: c[1], phi: c[2] })
        };
        let central = |h: f64| -> Result<Spinor> { Ok(scale_re(0.5 / h, &sub(&at(h)?, &at(-h)?))) };
        let coarse = central(h)?;
        let fine = central(0.5 * h)?;
        Ok(scale_re(1.0 / 3.0, &sub(&scale_re(4.0, &fine), &coarse)))
    }
}

impl<F: Fn(&ChartPoint) -> Result<Spinor>> SpinorField for FdSpinorField<F> {
    fn eval(&self, p: &ChartPoint) -> Result<SpinorJet> {
        let h = 1e-5 * p.rho.max(1.0);
        Ok(SpinorJet {
            psi: (self.f)(p)?,
            ds: self.partial(p, 0, h)?,
            drho: self.partial(p, 1, h.min(0.25 * p.rho))?,
            dphi: self.partial(p, 2, h)?,
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::FiniteDifference
    }
}

/// Spin-connection term `(1/2) sum_{a<b} omega_ab(X) Y_a Y_b psi` for the
/// frame vector `X = Y_{i+1}`.
fn connection_term(forms: &[[[f64; 3]; 3]; 3], i: usize, psi: &Spinor) -> Spinor {
    let mut out = [ZERO; 2];
    for a in 0..3 {
        for b in (a + 1)..3 {
            let w = forms[a][b][i];
            if w != 0.0 {
                let yb = mat_apply(&clifford_generator(b), psi);
                let yab = mat_apply(&clifford_generator(a), &yb);
                out = add(&out, &scale_re(0.5 * w, &yab));
            }
        }
    }
    out
}

/// Covariant derivatives `nabla_{Y_i} psi` for `i = 1, 2, 3` from a jet.
pub fn covariant_derivatives(curve: &PlaneCurve, t: f64, p: &ChartPoint, jet: &SpinorJet) -> Result<[Spinor; 3]> {
    let fr = frame(curve, t, p)?;
    let forms = connection(curve, t, p)?.forms_on_frame();
    Ok(std::array::from_fn(|i| add(&jet.along(&fr.y[i]), &connection_term(&forms, i, &jet.psi))))
}

/// Spinor covariant derivative `nabla_{Y_{i+1}} psi` of a field.
pub fn spin_cov_deriv(field: &dyn SpinorField, i: usize, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<Spinor> {
    if i > 2 {
        return Err(GeomError::Invalid(format!("frame index {i} out of range")));
    }
    let jet = field.eval(p)?;
    Ok(covariant_derivatives(curve, t, p, &jet)?[i])
}

/// Dirac operator in the explicit matrix form
/// `(i Y1 psi1 + i Y2 psi2 - Y3 psi2, -i Y1 psi2 + i Y2 psi1 + Y3 psi1)
/// + i/(rho sqrt(h22)) diag(1, -1) psi`, where `Y_k psi_j` are frame
/// derivatives of the components.
pub fn dirac_apply(field: &dyn SpinorField, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<Spinor> {
    let jet = field.eval(p)?;
    let fr = frame(curve, t, p)?;
    let h22 = induced_metric(curve, t, p)?.h22;
    let d: [Spinor; 3] = std::array::from_fn(|k| jet.along(&fr.y[k]));
    let psi = jet.psi;
    let c = I / (p.rho * h22.sqrt());
    Ok([
        I * d[0][0] + I * d[1][1] - d[2][1] + c * psi[0],
        -I * d[0][1] + I * d[1][0] + d[2][0] - c * psi[1],
    ])
}

/// Dirac operator as the frame sum `sum_i Y_i . nabla_{Y_i} psi`.
pub fn dirac_frame_sum(field: &dyn SpinorField, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<Spinor> {
    let jet = field.eval(p)?;
    let nabla = covariant_derivatives(curve, t, p, &jet)?;
    let mut out = [ZERO; 2];
    for (i, n) in nabla.iter().enumerate() {
        out = add(&out, &mat_apply(&clifford_generator(i), n));
    }
    Ok(out)
}

/// `sqrt(r^2 + 1)` and `a = u u' + v v'` (half the arc-length derivative of
/// `r^2`) of the base curve at `s`.
fn base_scalars(curve: &PlaneCurve, s: f64) -> (f64, f64) {
    let d = curve_data(curve, s);
    ((d.r2 + 1.0).sqrt(), d.a)
}

/// Jet of `g(x) c` where `x = rho sqrt(r^2 + 1)`, given `g(x)` and `g'(x)`.
fn jet_of_x(curve: &PlaneCurve, p: &ChartPoint, g: Spinor, dg: Spinor) -> SpinorJet {
    let (sq, a) = base_scalars(curve, p.s);
    SpinorJet { psi: g, ds: scale_re(p.rho * a / sq, &dg), drho: scale_re(sq, &dg), dphi: [ZERO; 2] }
}

/// The harmonic spinors `(C_1, C_2) / (rho sqrt(r^2 + 1))`.
#[derive(Debug, Clone)]
pub struct HarmonicConstant {
    curve: PlaneCurve,
    c: Spinor,
}

/// Harmonic spinor `(c1, c2) / (rho sqrt(r^2 + 1))` over `curve`.
pub fn harmonic_constant(curve: &PlaneCurve, c1: Complex64, c2: Complex64) -> HarmonicConstant {
    HarmonicConstant { curve: curve.clone(), c: [c1, c2] }
}

impl SpinorField for HarmonicConstant {
    fn eval(&self, p: &ChartPoint) -> Result<SpinorJet> {
        let (sq, _) = base_scalars(&self.curve, p.s);
        let x = p.rho * sq;
        Ok(jet_of_x(&self.curve, p, scale_re(1.0 / x, &self.c), scale_re(-1.0 / (x * x), &self.c)))
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// The spinors `psi_beta = e^{i beta phi_Gamma} rho^{-1} t^{-2 delta}
/// (u1 + sqrt(u1^2 + t^4))^delta (B_1, B_2)` over the centred circle of
/// radius `r0`, with `delta = eps (r0^2 + 1) beta / (2 r0)`.
#[derive(Debug, Clone)]
pub struct HarmonicBeta {
    pub beta: i64,
    pub b: Spinor,
    pub r0: f64,
    pub t: f64,
    pub eps: i8,
    pub delta: f64,
    curve: PlaneCurve,
}

/// Builds `psi_beta`; `beta` must be negative and `t`, `r0` positive.
pub fn harmonic_spinor_beta(beta: i64, b1: Complex64, b2: Complex64, r0: f64, t: f64, eps: i8) -> Result<HarmonicBeta> {
    if beta >= 0 {
        return Err(GeomError::Domain(format!("psi_beta is square integrable only for beta < 0, got {beta}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(GeomError::Domain(format!("psi_beta needs t > 0, got {t}")));
    }
    let curve = PlaneCurve::circle(r0, eps, 0.0)?;
    let delta = f64::from(eps) * (r0 * r0 + 1.0) * beta as f64 / (2.0 * r0);
    Ok(HarmonicBeta { beta, b: [b1, b2], r0, t, eps, delta, curve })
}

impl HarmonicBeta {
    /// Base circle.
    pub fn curve(&self) -> &PlaneCurve {
        &self.curve
    }

    /// Radial profile `chi(rho) = t^{-2 delta} (u1 + sqrt(u1^2 + t^4))^delta`.
    pub fn chi(&self, rho: f64) -> f64 {
        let u1 = rho * rho * (self.r0 * self.r0 + 1.0);
        let w = (u1 * u1 + self.t.powi(4)).sqrt();
        (self.t * self.t).powf(-self.delta) * (u1 + w).powf(self.delta)
    }

    /// Logarithmic derivative `f = 2 rho (r0^2 + 1) delta / sqrt(u1^2 + t^4)`
    /// of [`Self::chi`].
    pub fn chi_log_derivative(&self, rho: f64) -> f64 {
        let r2p1 = self.r0 * self.r0 + 1.0;
        let u1 = rho * rho * r2p1;
        2.0 * rho * r2p1 * self.delta / (u1 * u1 + self.t.powi(4)).sqrt()
    }

    fn l2_integrand(&self, rho: f64) -> f64 {
        let r2p1 = self.r0 * self.r0 + 1.0;
        let u1 = rho * rho * r2p1;
        let c = spinor_norm_sq(&self.b);
        c * self.chi(rho).powi(2) * 8f64.sqrt() * rho * r2p1 / (u1 * u1 + self.t.powi(4)).powf(0.25)
    }

    /// `||psi_beta||^2` over `rho < rho_max` (all `s` and `phi`).
    pub fn l2_norm_sq_truncated(&self, rho_max: f64, tol: f64) -> Result<f64> {
        let radial = integrate(|r| self.l2_integrand(r), 0.0, rho_max, &QuadOptions::relative(tol))?;
        Ok(TAU * TAU * self.r0 * radial)
    }

    /// `||psi_beta||^2` over the whole hypersurface.
    pub fn l2_norm_sq(&self, tol: f64) -> Result<f64> {
        let radial = integrate_semi_infinite(|r| self.l2_integrand(r), 0.0, 1.0, &QuadOptions::relative(tol))?;
        Ok(TAU * TAU * self.r0 * radial)
    }
}

impl SpinorField for HarmonicBeta {
    fn eval(&self, p: &ChartPoint) -> Result<SpinorJet> {
        let phase = Complex64::from_polar(1.0, self.beta as f64 * f64::from(self.eps) * p.s / self.r0);
        let psi = scale(phase * (self.chi(p.rho) / p.rho), &self.b);
        let ds = scale(I * (self.beta as f64 * f64::from(self.eps) / self.r0), &psi);
        let drho = scale_re(self.chi_log_derivative(p.rho) - 1.0 / p.rho, &psi);
        Ok(SpinorJet { psi, ds, drho, dphi: [ZERO; 2] })
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// The approximating spinors `psi_eps = sqrt(-S_eps) e^{-3 eps^4 rho
/// sqrt(r^2+1)} (C_1, C_2)`, where `-S_eps = x^4 / (x^4 + eps^4)^{3/2}` and
/// `x = rho sqrt(r^2 + 1)`.
#[derive(Debug, Clone)]
pub struct ApproximateSpinor {
    curve: PlaneCurve,
    pub eps: f64,
    pub c: Spinor,
}

/// Builds `psi_eps` over `curve`; `eps` must be positive.
pub fn approximate_spinor(curve: &PlaneCurve, eps: f64, c1: Complex64, c2: Complex64) -> Result<ApproximateSpinor> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(GeomError::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok(ApproximateSpinor { curve: curve.clone(), eps, c: [c1, c2] })
}

impl ApproximateSpinor {
    fn profile(&self, x: f64) -> (f64, f64) {
        let e4 = self.eps.powi(4);
        let x4 = x.powi(4);
        let g = x * x * (x4 + e4).powf(-0.75) * (-3.0 * e4 * x).exp();
        (g, g * (2.0 / x - 3.0 * x.powi(3) / (x4 + e4) - 3.0 * e4))
    }

    /// Closed form `D psi_eps = 3 eps^4 i / (rho sqrt(h22)) (1/(x^4 + eps^4)
    /// - x) g(x) (C_1, -C_2)`.
    pub fn dirac_closed_form(&self, t: f64, p: &ChartPoint) -> Result<Spinor> {
        let h22 = induced_metric(&self.curve, t, p)?.h22;
        let (sq, _) = base_scalars(&self.curve, p.s);
        let x = p.rho * sq;
        let e4 = self.eps.powi(4);
        let (g, _) = self.profile(x);
        let pre = I * (3.0 * e4 / (p.rho * h22.sqrt()) * (1.0 / (x.powi(4) + e4) - x) * g);
        Ok([pre * self.c[0], -pre * self.c[1]])
    }
}

impl SpinorField for ApproximateSpinor {
    fn eval(&self, p: &ChartPoint) -> Result<SpinorJet> {
        let (sq, _) = base_scalars(&self.curve, p.s);
        let (g, dg) = self.profile(p.rho * sq);
        Ok(jet_of_x(&self.curve, p, scale_re(g, &self.c), scale_re(dg, &self.c)))
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// The `t = 0` WK spinor `(e^{-i lambda sqrt(2) x}, e^{i lambda sqrt(2) x}) / x`
/// with `x = rho sqrt(r^2 + 1)`.
#[derive(Debug, Clone)]
pub struct WkSpinorT0 {
    curve: PlaneCurve,
    pub lambda: f64,
}

/// Builds the WK spinor of WK number `lambda`; only the `t = 0` geometry
/// carries it.
pub fn wk_spinor_t0(lambda: f64, curve: &PlaneCurve, t: f64) -> Result<WkSpinorT0> {
    if t != 0.0 {
        return Err(GeomError::Domain(format!("the explicit WK spinor lives on the t = 0 hypersurface, got t = {t}")));
    }
    Ok(WkSpinorT0 { curve: curve.clone(), lambda })
}

impl WkSpinorT0 {
    /// The normalized Einstein spinor `psi / (rho sqrt(2 (r^2+1) |lambda|))`
    /// scaled from `psi / (rho sqrt(r^2+1))`, i.e. `psi sqrt(-S / (|lambda| |psi|^2))`.
    pub fn einstein_spinor(&self, p: &ChartPoint) -> Result<Spinor> {
        if self.lambda == 0.0 {
            return Err(GeomError::Domain("the Einstein spinor needs lambda != 0".into()));
        }
        let psi = self.eval(p)?.psi;
        Ok(scale_re(1.0 / (2.0 * self.lambda.abs()).sqrt(), &psi))
    }
}

impl SpinorField for WkSpinorT0 {
    fn eval(&self, p: &ChartPoint) -> Result<SpinorJet> {
        let (sq, _) = base_scalars(&self.curve, p.s);
        let x = p.rho * sq;
        let k = self.lambda * SQRT_2;
        let psi = [Complex64::from_polar(1.0 / x, -k * x), Complex64::from_polar(1.0 / x, k * x)];
        let dg = [psi[0] * (-1.0 / x - I * k), psi[1] * (-1.0 / x + I * k)];
        Ok(jet_of_x(&self.curve, p, psi, dg))
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// `Y_1(S) = -rho^3 (r^2+1)^2 (4 t^4 - 2 u1^2) / (sqrt(h22) W^{5/2})`; the
/// other two frame derivatives of `S` vanish.
pub fn scalar_curvature_y1(rho: f64, r2p1: f64, t: f64) -> f64 {
    let u1 = rho * rho * r2p1;
    let t4 = t.powi(4);
    let w = u1 * u1 + t4;
    let h22 = r2p1 * 2.0 * u1 / w.sqrt();
    -rho.powi(3) * r2p1 * r2p1 * (4.0 * t4 - 2.0 * u1 * u1) / (h22.sqrt() * w.powf(2.5))
}

/// Laplacian `Delta S = (8 t^8 - 18 u1^2 t^4 + u1^4) / W^3` of the scalar
/// curvature (positive convention `Delta = -div grad`).
pub fn scalar_curvature_laplacian(u1: f64, t: f64) -> f64 {
    let t4 = t.powi(4);
    let w = u1 * u1 + t4;
    (8.0 * t4 * t4 - 18.0 * u1 * u1 * t4 + u1.powi(4)) / w.powi(3)
}

/// Residual of the WK field equation
/// `nabla_X psi = 3 dS(X) psi / (4S) + lambda (2 Ric(X) - S X) . psi / S
/// + X . dS . psi / (4S)` in each frame direction (Euclidean norm of the
/// difference).
pub fn wk_equation_residual(field: &dyn SpinorField, lambda: f64, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<[f64; 3]> {
    let jet = field.eval(p)?;
    let nabla = covariant_derivatives(curve, t, p, &jet)?;
    let c = curvature(curve, t, p)?;
    let r2p1 = curve_data(curve, p.s).r2 + 1.0;
    let ds = [scalar_curvature_y1(p.rho, r2p1, t), 0.0, 0.0];
    let s = c.s;
    let psi = jet.psi;
    let ds_psi = clifford_mul(&ds, &psi);
    Ok(std::array::from_fn(|i| {
        let mut x = [0.0; 3];
        x[i] = 1.0;
        let mut ric_x = [0.0; 3];
        ric_x[i] = 2.0 * c.ric[i] - s;
        let rhs = add(
            &add(&scale_re(3.0 * ds[i] / (4.0 * s), &psi), &scale_re(lambda / s, &clifford_mul(&ric_x, &psi))),
            &scale_re(1.0 / (4.0 * s), &clifford_mul(&x, &ds_psi)),
        );
        let d = sub(&nabla[i], &rhs);
        spinor_norm_sq(&d).sqrt()
    }))
}

/// Both sides of the WK integrability condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkIntegrability {
    /// `lambda^2 (-12 t^8 - 2 u1^2 t^4)`.
    pub lhs: f64,
    /// `S (t^8 - 6 u1^2 t^4)`.
    pub rhs: f64,
    pub residual: f64,
    /// `8 lambda^2 (2 S^2 - 4 |Ric|^2)`.
    pub full_lhs: f64,
    /// `2 S^3 + 3 |dS|^2 + 4 S Delta S`.
    pub full_rhs: f64,
    /// `(full_lhs - full_rhs) W^3 / 16`, equal to `lhs - rhs / 2` identically.
    pub full_residual_scaled: f64,
}

/// Evaluates the reduced and the full integrability condition at
/// `(rho, r, t)` for WK number `lambda`.
pub fn wk_integrability_residual(rho: f64, r: f64, t: f64, lambda: f64) -> Result<WkIntegrability> {
    if !(rho > 0.0) || !(t >= 0.0) {
        return Err(GeomError::Domain(format!("need rho > 0 and t >= 0, got rho = {rho}, t = {t}")));
    }
    let r2p1 = r * r + 1.0;
    let u1 = rho * rho * r2p1;
    let t4 = t.powi(4);
    let w = u1 * u1 + t4;
    let s = crate::hypersurface::scalar_curvature_radial(u1, t);
    let lhs = lambda * lambda * (-12.0 * t4 * t4 - 2.0 * u1 * u1 * t4);
    let rhs = s * (t4 * t4 - 6.0 * u1 * u1 * t4);
    let ric = crate::hypersurface::ricci_radial(u1, t);
    let ric_sq: f64 = ric.iter().map(|x| x * x).sum();
    let ds = scalar_curvature_y1(rho, r2p1, t);
    let full_lhs = 8.0 * lambda * lambda * (2.0 * s * s - 4.0 * ric_sq);
    let full_rhs = 2.0 * s.powi(3) + 3.0 * ds * ds + 4.0 * s * scalar_curvature_laplacian(u1, t);
    Ok(WkIntegrability {
        lhs,
        rhs,
        residual: lhs - rhs,
        full_lhs,
        full_rhs,
        full_residual_scaled: (full_lhs - full_rhs) * w.powi(3) / 16.0,
    })
}

/// Energy-momentum tensor `T(Y_a, Y_b) = Re <Y_a . nabla_b psi + Y_b .
/// nabla_a psi, psi>` from the covariant derivatives of `psi`.
pub fn energy_momentum_from(psi: &Spinor, nabla: &[Spinor; 3]) -> [[f64; 3]; 3] {
    let mut tm = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let ya = mat_apply(&clifford_generator(a), &nabla[b]);
            let yb = mat_apply(&clifford_generator(b), &nabla[a]);
            tm[a][b] = spinor_inner(&add(&ya, &yb), psi).re;
        }
    }
    tm
}

/// Energy-momentum tensor of a field at `p` in the orthonormal frame.
pub fn energy_momentum(field: &dyn SpinorField, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<[[f64; 3]; 3]> {
    let jet = field.eval(p)?;
    let nabla = covariant_derivatives(curve, t, p, &jet)?;
    Ok(energy_momentum_from(&jet.psi, &nabla))
}

/// Energy-momentum tensor of the normalized spinor `psi / |psi|`.
pub fn energy_momentum_normalized(field: &dyn SpinorField, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<[[f64; 3]; 3]> {
    let jet = field.eval(p)?;
    let n2 = spinor_norm_sq(&jet.psi);
    if n2 == 0.0 {
        return Err(GeomError::Domain("normalized energy-momentum tensor of a zero spinor".into()));
    }
    let nabla = covariant_derivatives(curve, t, p, &jet)?;
    Ok(energy_momentum_from(&jet.psi, &nabla).map(|row| row.map(|x| x / n2)))
}

/// Right-hand side `-(1/2) II(X) . psi` of the T-Killing equation for the
/// frame vector `Y_{i+1}`.
pub fn tkilling_rhs(ii_frame: &[[f64; 3]; 3], i: usize, psi: &Spinor) -> Spinor {
    scale_re(-0.5, &clifford_mul(&ii_frame[i], psi))
}

/// Closed path in the chart parametrized by `tau` in `[0, 1]`.
pub trait ChartPath {
    /// Point at `tau`.
    fn point(&self, tau: f64) -> ChartPoint;
    /// Chart velocity at `tau`.
    fn velocity(&self, tau: f64) -> [f64; 3];
}

/// The fiber circle `phi -> (s, rho, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiLoop {
    pub s: f64,
    pub rho: f64,
}

impl ChartPath for PhiLoop {
    fn point(&self, tau: f64) -> ChartPoint {
        ChartPoint { s: self.s, rho: self.rho, phi: TAU * tau }
    }

    fn velocity(&self, _tau: f64) -> [f64; 3] {
        [0.0, 0.0, TAU]
    }
}

/// Outcome of transporting a spinor along a closed path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportResult {
    #[serde(skip)]
    pub psi_final: Spinor,
    /// `|psi_final - psi_0| / |psi_0|`.
    pub holonomy_defect: f64,
    /// Largest relative deviation of `|psi|` from `|psi_0|` at the nodes.
    pub norm_drift: f64,
}

fn pack(psi: &Spinor) -> [f64; 4] {
    [psi[0].re, psi[0].im, psi[1].re, psi[1].im]
}

fn unpack(y: &[f64; 4]) -> Spinor {
    [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])]
}

/// Integrates `nabla_X psi = -(1/2) II(X) . psi` along `path`.
pub fn tkilling_transport(curve: &PlaneCurve, t: f64, path: &dyn ChartPath, psi0: &Spinor, tol: f64) -> Result<TransportResult> {
    let n0 = spinor_norm_sq(psi0).sqrt();
    if n0 == 0.0 {
        return Err(GeomError::Invalid("transport of a zero spinor".into()));
    }
    let rhs = |tau: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let p = path.point(tau);
        if !(p.rho > 0.0) {
            return Err(GeomError::Domain(format!("path leaves the chart at tau = {tau} (rho = {})", p.rho)));
        }
        let v = path.velocity(tau);
        let fr = frame(curve, t, &p)?;
        let forms = connection(curve, t, &p)?.forms_on_frame();
        let ii = second_form(curve, t, &p)?.ii_frame;
        let psi = unpack(y);
        let mut out = [ZERO; 2];
        for i in 0..3 {
            let xi: f64 = (0..3).map(|a| fr.coframe[i][a] * v[a]).sum();
            if xi == 0.0 {
                continue;
            }
            let drive = sub(&tkilling_rhs(&ii, i, &psi), &connection_term(&forms, i, &psi));
            out = add(&out, &scale_re(xi, &drive));
        }
        Ok(pack(&out))
    };
    let opts = OdeOptions { tol, initial_step: 1e-3, ..OdeOptions::default() };
    let sol = dopri5(rhs, 0.0, pack(psi0), 1.0, &opts)?;
    let psi_final = unpack(&sol.last().1);
    let norm_drift = sol.y.iter().map(|y| (spinor_norm_sq(&unpack(y)).sqrt() / n0 - 1.0).abs()).fold(0.0, f64::max);
    Ok(TransportResult { psi_final, holonomy_defect: spinor_norm_sq(&sub(&psi_final, psi0)).sqrt() / n0, norm_drift })
}

/// Separated Dirac equation `D psi = lambda psi` for
/// `psi = e^{i alpha phi} e^{i beta phi_Gamma(s)} R(rho)` over the centred
/// circle of radius `r0` with orientation `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialDiracProblem {
    pub alpha: i64,
    pub beta: i64,
    /// `delta = ((r0^2 + 1) beta - r0^2 alpha) phi_Gamma' / 2`.
    pub delta: f64,
    pub lambda: f64,
    pub r0: f64,
    pub t: f64,
    pub eps: i8,
}

impl RadialDiracProblem {
    /// Problem for the given separation constants.
    pub fn new(alpha: i64, beta: i64, lambda: f64, r0: f64, t: f64, eps: i8) -> Result<Self> {
        if !(r0 > 0.0) || !(t >= 0.0) || (eps != 1 && eps != -1) {
            return Err(GeomError::Domain(format!("need r0 > 0, t >= 0 and eps = +-1, got r0 = {r0}, t = {t}, eps = {eps}")));
        }
        let phid = f64::from(eps) / r0;
        let delta = ((r0 * r0 + 1.0) * beta as f64 - r0 * r0 * alpha as f64) * phid / 2.0;
        Ok(Self { alpha, beta, delta, lambda, r0, t, eps })
    }

    fn r2p1(&self) -> f64 {
        self.r0 * self.r0 + 1.0
    }

    /// `K` and `K_rho` at `rho`.
    pub fn k(&self, rho: f64) -> (f64, f64) {
        let u1 = rho * rho * self.r2p1();
        let k = 2.0 * u1 / (u1 * u1 + self.t.powi(4)).sqrt();
        (k, k * log_k_rho(u1, self.t, rho))
    }

    /// `sqrt(h22) = sqrt((r0^2 + 1) K)`.
    pub fn sqrt_h22(&self, rho: f64) -> f64 {
        (self.r2p1() * self.k(rho).0).sqrt()
    }

    /// `f = (delta K - i alpha) / rho`.
    pub fn f(&self, rho: f64) -> Complex64 {
        Complex64::new(self.delta * self.k(rho).0, -(self.alpha as f64)) / rho
    }

    /// `g = (delta K + i alpha) / rho`.
    pub fn g(&self, rho: f64) -> Complex64 {
        Complex64::new(self.delta * self.k(rho).0, self.alpha as f64) / rho
    }

    /// First-order coefficient `p = 1/rho - delta K_rho / (delta K - i alpha)
    /// - 2 i lambda sqrt(h22)` of the second-order equation for `chi_1`.
    pub fn p(&self, rho: f64) -> Complex64 {
        let (k, kr) = self.k(rho);
        let den = Complex64::new(self.delta * k, -(self.alpha as f64));
        let mut p = Complex64::new(1.0 / rho, 0.0) - I * 2.0 * self.lambda * self.sqrt_h22(rho);
        if den.norm() > 0.0 {
            p -= self.delta * kr / den;
        }
        p
    }

    /// Zeroth-order coefficient `q = -(delta^2 K^2 + alpha^2) / rho^2`.
    pub fn q(&self, rho: f64) -> f64 {
        let k = self.k(rho).0;
        -((self.delta * k).powi(2) + (self.alpha as f64).powi(2)) / (rho * rho)
    }

    /// Hartman indicator `Re[-q - |p|^2 / 4]`.
    pub fn hartman_indicator(&self, rho: f64) -> f64 {
        -self.q(rho) - 0.25 * self.p(rho).norm_sqr()
    }
}

/// Solution of the radial system on a span of `rho`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub rho: Vec<f64>,
    /// `rho R(rho)` (the system without the `e^{+-i lambda theta}` phases).
    #[serde(skip)]
    pub x: Vec<Spinor>,
    /// `chi = (e^{i lambda theta} x_1, e^{-i lambda theta} x_2)` with
    /// `theta = int_0^rho sqrt(h22)`.
    #[serde(skip)]
    pub chi: Vec<Spinor>,
    pub theta: Vec<f64>,
    /// Smallest Hartman indicator over the nodes.
    pub hartman_min: f64,
    /// Smallest second divided difference of `|chi_1|^2` and `|chi_2|^2`,
    /// divided by the largest value of `|chi|^2` on the span.
    pub convexity_min: f64,
    /// Hartman condition holds at every node.
    pub hartman_holds: bool,
    /// `convexity_min >= -tol`.
    pub convex: bool,
}

/// Integrates `x' = [[-i lambda sqrt(h22), f], [g, i lambda sqrt(h22)]] x`
/// from `span.0` to `span.1` starting from `x0`.
pub fn radial_dirac_solve(prob: &RadialDiracProblem, span: (f64, f64), x0: Spinor, tol: f64) -> Result<RadialSolution> {
    let (a, b) = span;
    if !(a > 0.0) || !(b > 0.0) || a == b {
        return Err(GeomError::Domain(format!("radial span must lie in (0, inf) and be nondegenerate, got ({a}, {b})")));
    }
    let theta0 = integrate(|r| prob.sqrt_h22(r), 0.0, a, &QuadOptions::with_tol(tol.max(1e-14)))?;
    let rhs = |rho: f64, y: &[f64; 5]| -> Result<[f64; 5]> {
        if !(rho > 0.0) {
            return Err(GeomError::Domain(format!("radial integration reached rho = {rho}")));
        }
        let x = unpack(&[y[0], y[1], y[2], y[3]]);
        let l = I * prob.lambda * prob.sqrt_h22(rho);
        let d0 = -l * x[0] + prob.f(rho) * x[1];
        let d1 = prob.g(rho) * x[0] + l * x[1];
        Ok([d0.re, d0.im, d1.re, d1.im, prob.sqrt_h22(rho)])
    };
    let y0 = [x0[0].re, x0[0].im, x0[1].re, x0[1].im, theta0];
    let opts = OdeOptions { tol, max_step: (b - a).abs() / 400.0, initial_step: 1e-4 * a.min(b), ..OdeOptions::default() };
    let sol = dopri5(rhs, a, y0, b, &opts).map_err(|e| match e {
        GeomError::StepUnderflow { tau } => GeomError::Domain(format!("radial system became stiff near rho = {tau}")),
        other => other,
    })?;
    let x: Vec<Spinor> = sol.y.iter().map(|y| unpack(&[y[0], y[1], y[2], y[3]])).collect();
    let theta: Vec<f64> = sol.y.iter().map(|y| y[4]).collect();
    let chi: Vec<Spinor> = x
        .iter()
        .zip(&theta)
        .map(|(v, th)| {
            let ph = Complex64::from_polar(1.0, prob.lambda * th);
            [ph * v[0], ph.conj() * v[1]]
        })
        .collect();
    let hartman_min = sol.x.iter().map(|&r| prob.hartman_indicator(r)).fold(f64::INFINITY, f64::min);
    let peak = chi.iter().map(spinor_norm_sq).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut convexity_min = f64::INFINITY;
    for k in 1..sol.x.len().saturating_sub(1) {
        let (r0, r1, r2) = (sol.x[k - 1], sol.x[k], sol.x[k + 1]);
        for c in 0..2 {
            let (f0, f1, f2) = (chi[k - 1][c].norm_sqr(), chi[k][c].norm_sqr(), chi[k + 1][c].norm_sqr());
            let dd = 2.0 * ((f2 - f1) / (r2 - r1) - (f1 - f0) / (r1 - r0)) / (r2 - r0);
            convexity_min = convexity_min.min(dd / peak);
        }
    }
    Ok(RadialSolution {
        rho: sol.x,
        x,
        chi,
        theta,
        hartman_min,
        convexity_min,
        hartman_holds: hartman_min >= 0.0,
        convex: convexity_min >= -tol.sqrt(),
    })
}
