//! Induced geometry of the hypersurfaces `M_Gamma` over a plane curve.
//!
//! Points are addressed in the chart `(s, rho, phi)`, where `s` is the arc
//! length of the base curve, `rho > 0` the fiber radius and `phi` the fiber
//! angle. Everything here is a closed-form per-point evaluation; the
//! finite-difference cross-checks live in the test suites.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::ambient::{radial_potentials, AmbientPoint};
use crate::curves::{curve_data, geodesic_curvature, CurveData, PlaneCurve};
use crate::error::{GeomError, Result};
use crate::specfun::{integrate, QuadOptions};

/// Point of the hypersurface chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartPoint {
    pub s: f64,
    pub rho: f64,
    pub phi: f64,
}

impl ChartPoint {
    /// Chart point, rejecting `rho <= 0` and non-finite input.
    pub fn new(s: f64, rho: f64, phi: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() || !s.is_finite() || !phi.is_finite() {
            return Err(GeomError::Domain(format!("chart point needs finite s, phi and rho > 0, got ({s}, {rho}, {phi})")));
        }
        Ok(Self { s, rho, phi })
    }

    /// Coordinates as an array `[s, rho, phi]`.
    pub fn coords(&self) -> [f64; 3] {
        [self.s, self.rho, self.phi]
    }
}

fn check_inputs(t: f64, p: &ChartPoint) -> Result<()> {
    if !(p.rho > 0.0) {
        return Err(GeomError::Domain(format!("rho must be positive, got {}", p.rho)));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(GeomError::Domain(format!("t must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Radial scalars shared by all closed forms at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Radial {
    rho: f64,
    r2p1: f64,
    u1: f64,
    t4: f64,
    w: f64,
    g: f64,
    h: f64,
    k: f64,
}

fn radial(d: &CurveData, t: f64, rho: f64) -> Radial {
    let r2p1 = d.r2 + 1.0;
    let u1 = rho * rho * r2p1;
    let t4 = t.powi(4);
    let (g, h, k, _) = radial_potentials(u1, t);
    Radial { rho, r2p1, u1, t4, w: u1 * u1 + t4, g, h, k }
}

/// Ambient image `Psi(s, rho, phi)` of a chart point.
pub fn embed(curve: &PlaneCurve, p: &ChartPoint) -> AmbientPoint {
    let c = curve.eval(p.s);
    let (sn, cs) = p.phi.sin_cos();
    AmbientPoint::new([
        p.rho * (c.u * cs - c.v * sn),
        p.rho * (c.v * cs + c.u * sn),
        p.rho * cs,
        p.rho * sn,
    ])
}

/// Coefficients of the induced metric in the basis `(d_s, d_rho, d_phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InducedMetric {
    pub h11: f64,
    pub h12: f64,
    pub h13: f64,
    pub h22: f64,
    pub h23: f64,
    pub h33: f64,
    pub det_h: f64,
    pub u1: f64,
}

impl InducedMetric {
    /// Symmetric matrix of the metric.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.h11, self.h12, self.h13, //
            self.h12, self.h22, self.h23, //
            self.h13, self.h23, self.h33,
        )
    }

    /// `h(a, b)` for coordinate vectors.
    pub fn inner(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        (Vector3::from(*a).transpose() * self.matrix() * Vector3::from(*b))[(0, 0)]
    }
}

fn induced_from(d: &CurveData, rad: &Radial) -> InducedMetric {
    let rho = rad.rho;
    let k = rad.k;
    InducedMetric {
        h11: (k + rad.h * rho * rho) * rho * rho,
        h12: d.a * rho * k,
        h13: d.b * rho * rho * k,
        h22: rad.r2p1 * k,
        h23: 0.0,
        h33: rad.r2p1 * rho * rho * k,
        det_h: 8.0 * rho.powi(6) * rad.r2p1 * rad.r2p1 / rad.w.sqrt(),
        u1: rad.u1,
    }
}

/// Induced metric at `p`.
pub fn induced_metric(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<InducedMetric> {
    check_inputs(t, p)?;
    let d = curve_data(curve, p.s);
    Ok(induced_from(&d, &radial(&d, t, p.rho)))
}

/// Orthonormal frame `Y_1 = d_rho / sqrt(h22)`, `Y_2 = d_phi / sqrt(h33)`,
/// `Y_3 = D d_s + E d_rho + F d_phi` and its dual coframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameData {
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub sigma: f64,
    /// Frame vectors as rows in the basis `(d_s, d_rho, d_phi)`.
    pub y: [[f64; 3]; 3],
    /// Coframe one-forms as rows in the basis `(ds, drho, dphi)`.
    pub coframe: [[f64; 3]; 3],
}

impl FrameData {
    /// Matrix whose rows are the frame vectors.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.y[i][j])
    }
}

fn frame_from(m: &InducedMetric, rho: f64) -> FrameData {
    let sigma = rho / m.det_h.sqrt();
    let d = m.h22 * sigma;
    let e = -m.h12 * sigma;
    let f = -m.h13 * sigma / (rho * rho);
    let (s22, s33) = (m.h22.sqrt(), m.h33.sqrt());
    FrameData {
        d,
        e,
        f,
        sigma,
        y: [[0.0, 1.0 / s22, 0.0], [0.0, 0.0, 1.0 / s33], [d, e, f]],
        coframe: [[-s22 * e / d, s22, 0.0], [-s33 * f / d, 0.0, s33], [1.0 / d, 0.0, 0.0]],
    }
}

/// Orthonormal frame at `p`.
pub fn frame(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<FrameData> {
    let m = induced_metric(curve, t, p)?;
    Ok(frame_from(&m, p.rho))
}

/// `(log K)_rho = 2 t^4 / (W rho)` with `W = u1^2 + t^4`.
pub fn log_k_rho(u1: f64, t: f64, rho: f64) -> f64 {
    let t4 = t.powi(4);
    2.0 * t4 / ((u1 * u1 + t4) * rho)
}

/// `(log K)_rho_rho = -2 t^4 / (W rho^2) - 8 t^4 u1^2 / (rho^2 W^2)`.
pub fn log_k_rhorho(u1: f64, t: f64, rho: f64) -> f64 {
    let t4 = t.powi(4);
    let w = u1 * u1 + t4;
    -2.0 * t4 / (w * rho * rho) - 8.0 * t4 * u1 * u1 / (rho * rho * w * w)
}

/// `(log D)_rho = (log K)_rho / 2 - 1 / rho`.
pub fn log_d_rho(u1: f64, t: f64, rho: f64) -> f64 {
    0.5 * log_k_rho(u1, t, rho) - 1.0 / rho
}

/// `(log D)_rho_rho = (log K)_rho_rho / 2 + 1 / rho^2`.
pub fn log_d_rhorho(u1: f64, t: f64, rho: f64) -> f64 {
    0.5 * log_k_rhorho(u1, t, rho) + 1.0 / (rho * rho)
}

/// `(log Sigma)_rho = -1 / rho - (log K)_rho / 2`.
pub fn log_sigma_rho(u1: f64, t: f64, rho: f64) -> f64 {
    -1.0 / rho - 0.5 * log_k_rho(u1, t, rho)
}

/// Connection scalars: `omega_12 = c1 omega^2`, `omega_13 = -c2 omega^3`,
/// `omega_23 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionData {
    pub c1: f64,
    pub c2: f64,
    pub omega23_vanishes: bool,
}

impl ConnectionData {
    /// Connection one-forms `omega_ij(Y_k)` indexed `[i][j][k]`.
    pub fn forms_on_frame(&self) -> [[[f64; 3]; 3]; 3] {
        let mut w = [[[0.0; 3]; 3]; 3];
        w[0][1][1] = self.c1;
        w[1][0][1] = -self.c1;
        w[0][2][2] = -self.c2;
        w[2][0][2] = self.c2;
        w
    }
}

/// Connection scalars at `p`.
pub fn connection(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<ConnectionData> {
    let m = induced_metric(curve, t, p)?;
    let rho = p.rho;
    let s22 = m.h22.sqrt();
    Ok(ConnectionData {
        c1: (1.0 / rho + 0.5 * log_k_rho(m.u1, t, rho)) / s22,
        c2: log_d_rho(m.u1, t, rho) / s22,
        omega23_vanishes: true,
    })
}

/// Independent curvature components, Ricci diagonal and scalar curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureData {
    pub r1212: f64,
    pub r1313: f64,
    pub r2323: f64,
    pub ric: [f64; 3],
    pub s: f64,
}

/// Curvature at `p` in the orthonormal frame; `Ric_ii = -sum_j R_ijij`.
pub fn curvature(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<CurvatureData> {
    let m = induced_metric(curve, t, p)?;
    let rho = p.rho;
    let lk = log_k_rho(m.u1, t, rho);
    let lkk = log_k_rhorho(m.u1, t, rho);
    let ld = log_d_rho(m.u1, t, rho);
    let ldd = log_d_rhorho(m.u1, t, rho);
    let c = 0.5 / m.h22;
    let r1212 = c * (lk / rho + lkk);
    let r2323 = -c * (2.0 / rho + lk) * ld;
    let r1313 = c * (-2.0 * ldd + lk * ld + 2.0 * ld * ld);
    let ric = [-r1212 - r1313, -r1212 - r2323, -r1313 - r2323];
    Ok(CurvatureData { r1212, r1313, r2323, ric, s: ric.iter().sum() })
}

/// Ricci diagonal `(2 t^4, 2 t^4 - u1^2, -4 t^4 - u1^2) / (2 W^{3/2})` as a
/// function of `u1` alone.
pub fn ricci_radial(u1: f64, t: f64) -> [f64; 3] {
    let t4 = t.powi(4);
    let w32 = (u1 * u1 + t4).powf(1.5);
    [2.0 * t4 / (2.0 * w32), (2.0 * t4 - u1 * u1) / (2.0 * w32), (-4.0 * t4 - u1 * u1) / (2.0 * w32)]
}

/// Scalar curvature `-u1^2 / W^{3/2}`.
pub fn scalar_curvature_radial(u1: f64, t: f64) -> f64 {
    -u1 * u1 / (u1 * u1 + t.powi(4)).powf(1.5)
}

/// Unit normal `N = sqrt(K/(r^2+1)) (w1, -w2, -r w3, r w4) / 2` in ambient
/// coordinates.
pub fn unit_normal(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<[f64; 4]> {
    check_inputs(t, p)?;
    let d = curve_data(curve, p.s);
    let rad = radial(&d, t, p.rho);
    let (sn, cs) = p.phi.sin_cos();
    let w1 = d.vd * cs + d.ud * sn;
    let w2 = d.ud * cs - d.vd * sn;
    let rw3 = d.u * w1 - d.v * w2;
    let rw4 = d.v * w1 + d.u * w2;
    let c = 0.5 * (rad.k / rad.r2p1).sqrt();
    Ok([c * w1, -c * w2, -c * rw3, c * rw4])
}

/// Second fundamental form and its invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondForm {
    /// Components in the coordinate basis `(d_s, d_rho, d_phi)`.
    pub ii_coord: [[f64; 3]; 3],
    /// Components in the orthonormal frame.
    pub ii_frame: [[f64; 3]; 3],
    pub mean_h: f64,
    /// Principal curvatures, the first one pinned to zero.
    pub kappas: [f64; 3],
    pub sigma2: f64,
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
}

/// Second fundamental form `II(X, Y) = g(X, nabla_Y N)` at `p`.
pub fn second_form(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<SecondForm> {
    check_inputs(t, p)?;
    let d = curve_data(curve, p.s);
    let rad = radial(&d, t, p.rho);
    let rho = p.rho;
    let pre = 0.5 * rho * (rad.k / rad.r2p1).sqrt();
    let ii11 = pre * (rad.g * (d.ud * d.vdd - d.vd * d.udd) - 2.0 * rad.h * rho * rho * d.b);
    let ii13 = pre * rad.k;
    let coord = Matrix3::new(ii11, 0.0, ii13, 0.0, 0.0, 0.0, ii13, 0.0, 0.0);
    let fr = frame_from(&induced_from(&d, &rad), rho);
    let a = fr.matrix();
    let star = a * coord * a.transpose();
    let star = (star + star.transpose()) * 0.5;
    let trace = star.trace();
    let sigma2 = star[(0, 0)] * star[(1, 1)] - star[(0, 1)] * star[(1, 0)] + star[(0, 0)] * star[(2, 2)]
        - star[(0, 2)] * star[(2, 0)]
        + star[(1, 1)] * star[(2, 2)]
        - star[(1, 2)] * star[(2, 1)];
    let disc = (trace * trace - 4.0 * sigma2).max(0.0).sqrt();
    let kappas = [0.0, 0.5 * (trace - disc), 0.5 * (trace + disc)];
    Ok(SecondForm { ii_coord: to_array(&coord), ii_frame: to_array(&star), mean_h: trace, kappas, sigma2 })
}

/// Mean curvature `sqrt(2 / sqrt(W)) k_g` as a closed form.
pub fn mean_curvature(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<f64> {
    let m = induced_metric(curve, t, p)?;
    let w = m.u1 * m.u1 + t.powi(4);
    Ok((2.0 / w.sqrt()).sqrt() * geodesic_curvature(curve, p.s))
}

/// Per-point geometry: induced metric, frame, connection and curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryBundle {
    pub point: ChartPoint,
    pub metric: InducedMetric,
    pub frame: FrameData,
    pub connection: ConnectionData,
    pub curvature: CurvatureData,
}

/// Evaluates the full per-point geometry.
pub fn geometry_bundle(curve: &PlaneCurve, t: f64, p: &ChartPoint) -> Result<GeometryBundle> {
    Ok(GeometryBundle {
        point: *p,
        metric: induced_metric(curve, t, p)?,
        frame: frame(curve, t, p)?,
        connection: connection(curve, t, p)?,
        curvature: curvature(curve, t, p)?,
    })
}

/// `int |H|^alpha dM` over `rho in (0, rho_max]`, `s in [0, L)` and the
/// fiber circle.
pub fn willmore_integral(curve: &PlaneCurve, t: f64, alpha: f64, rho_max: f64, tol: f64) -> Result<f64> {
    if !(rho_max > 0.0) {
        return Err(GeomError::Domain(format!("rho_max must be positive, got {rho_max}")));
    }
    let opts = QuadOptions::relative(tol);
    let t4 = t.powi(4);
    let slice = |s: f64| -> Result<f64> {
        let d = curve_data(curve, s);
        let kg = geodesic_curvature(curve, s).abs();
        let r2p1 = d.r2 + 1.0;
        let f = |rho: f64| {
            let u1 = rho * rho * r2p1;
            let w = u1 * u1 + t4;
            let mh = (2.0 / w.sqrt()).sqrt() * kg;
            let vol = (8.0 * rho.powi(6) * r2p1 * r2p1 / w.sqrt()).sqrt();
            mh.powf(alpha) * vol
        };
        integrate(f, 0.0, rho_max, &opts)
    };
    let total = if let Some((r0, _)) = curve.circle_params() {
        slice(0.0)? * std::f64::consts::TAU * r0
    } else {
        let err = std::cell::Cell::new(None);
        let v = integrate(
            |s| match slice(s) {
                Ok(v) => v,
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            },
            0.0,
            curve.total_length(),
            &opts,
        )?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        v
    };
    Ok(std::f64::consts::TAU * total)
}
