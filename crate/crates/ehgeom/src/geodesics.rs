//! Geodesic flow of the induced metric.
//!
//! Trajectories are integrated with an adaptive Dormand-Prince 5(4) scheme
//! whose right-hand side uses finite-difference Christoffel symbols of the
//! closed-form induced metric. The energy and, over circles, the two Noether
//! momenta are monitored but never enforced.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::Serialize;

use crate::curves::PlaneCurve;
use crate::error::{GeomError, Result};
use crate::hypersurface::{induced_metric, ChartPoint};
use crate::ode::tableau::*;
use crate::oracle::{fd_christoffels, Mat, Tensor3};
use crate::specfun::{hyp2f1_radial_antiderivative, root_find};

/// Default radial floor below which a trajectory is stopped.
pub const RHO_FLOOR: f64 = 1e-6;

/// Point on a trajectory: affine parameter, position and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    pub tau: f64,
    pub q: ChartPoint,
    /// Velocity `(s', rho', phi')`.
    pub qdot: [f64; 3],
}

/// Energy and Noether momenta of a velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstIntegrals {
    pub e: f64,
    pub m1: f64,
    /// `h(d_s, v)`, a conserved quantity only over centred circles.
    pub m2: Option<f64>,
    pub eps: Option<i8>,
    /// `2E - (K (r^2+1) rho'^2 + M1 phi' + M2 s')`, present with `m2`.
    pub residual: Option<f64>,
}

/// Christoffel symbols `[k][i][j]` of the induced metric in the chart
/// `(s, rho, phi)` by Richardson-extrapolated central differences with an
/// absolute step `h_step` in every coordinate.
pub fn induced_christoffels(curve: &PlaneCurve, t: f64, p: &ChartPoint, h_step: f64) -> Result<Tensor3<3>> {
    if !(h_step > 0.0) || !(p.rho > 2.0 * h_step) {
        return Err(GeomError::Domain(format!("step {h_step} too large for rho = {}", p.rho)));
    }
    let (s0, phi0) = (p.s, p.phi);
    let metric = |q: &[f64; 3]| -> Mat<3> {
        let cp = ChartPoint { s: s0 + q[0], rho: q[1], phi: phi0 + q[2] };
        induced_metric(curve, t, &cp).map(|m| m.matrix()).unwrap_or_else(|_| Mat::<3>::from_element(f64::NAN))
    };
    let rel = h_step / p.rho.max(1.0);
    fd_christoffels(&metric, &[0.0, p.rho, 0.0], rel)
}

/// Default finite-difference step `max(1e-4, 1e-3 rho)`.
pub fn default_step(rho: f64) -> f64 {
    (1e-3 * rho).max(1e-4).min(0.25 * rho)
}

/// First integrals of a state; the momentum `M2` is reported only for
/// centred circles.
pub fn first_integrals(curve: &PlaneCurve, t: f64, state: &GeodesicState) -> Result<FirstIntegrals> {
    let m = induced_metric(curve, t, &state.q)?;
    let v = state.qdot;
    let e = 0.5 * m.inner(&v, &v);
    let m1 = m.h13 * v[0] + m.h33 * v[2];
    let circle = curve.circle_params();
    let m2 = circle.map(|_| m.h11 * v[0] + m.h13 * v[2]);
    let residual = m2.map(|m2| 2.0 * e - (m.h22 * v[1] * v[1] + m1 * v[2] + m2 * v[0]));
    Ok(FirstIntegrals { e, m1, m2, eps: circle.map(|c| c.1), residual })
}

/// Radial equation over a circle of radius `r0`:
/// `rho'^2 = sqrt(W) E / (rho^2 R^2) - (t^4 M1^2 / (rho^4 R^3) + (M1 - eps M2 r0)^2 + M2^2) / (4 rho^2 R)`
/// with `R = r0^2 + 1` and `W = rho^4 R^2 + t^4`.
pub fn radial_rho_dot_sq(rho: f64, r0: f64, t: f64, e: f64, m1: f64, m2: f64, eps: i8) -> f64 {
    let rr = r0 * r0 + 1.0;
    let t4 = t.powi(4);
    let w = rho.powi(4) * rr * rr + t4;
    let eps = f64::from(eps);
    let bracket = t4 * m1 * m1 / (rho.powi(4) * rr.powi(3)) + (m1 - eps * m2 * r0).powi(2) + m2 * m2;
    w.sqrt() * e / (rho * rho * rr * rr) - bracket / (4.0 * rho * rho * rr)
}

/// Largest turning radius below `rho_start`, the root of the radial
/// equation that bounds trajectories with `M1 != 0` away from the zero
/// section. Returns `None` when the radial equation stays nonnegative.
pub fn rho_crit(rho_start: f64, r0: f64, t: f64, e: f64, m1: f64, m2: f64, eps: i8) -> Result<Option<f64>> {
    let f = |rho: f64| radial_rho_dot_sq(rho, r0, t, e, m1, m2, eps);
    if f(rho_start) < 0.0 {
        return Err(GeomError::Domain(format!("rho = {rho_start} lies in the forbidden region")));
    }
    let mut hi = rho_start;
    while hi > 1e-12 {
        let lo = 0.5 * hi;
        if f(lo) < 0.0 {
            return root_find(f, lo, hi, 1e-14).map(Some);
        }
        hi = lo;
    }
    Ok(None)
}

/// Distance of `Psi(s, rho0, phi)` to the zero section over a circle of
/// radius `r0`, `u1 F(1/2, 1/4, 3/2, -u1^2/t^4) / (t sqrt 2)`.
pub fn distance_to_zero_section(rho0: f64, r0: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(GeomError::Domain("distance via 2F1 requires t > 0; use distance_to_zero_section_t0".into()));
    }
    if !(rho0 >= 0.0) {
        return Err(GeomError::Domain(format!("rho0 must be nonnegative, got {rho0}")));
    }
    let u1 = rho0 * rho0 * (r0 * r0 + 1.0);
    Ok(hyp2f1_radial_antiderivative(u1, 1.0, t)? / SQRT_2)
}

/// Distance to the zero section for `t = 0`, `sqrt(2 u1)`.
pub fn distance_to_zero_section_t0(rho0: f64, r0: f64) -> f64 {
    (2.0 * rho0 * rho0 * (r0 * r0 + 1.0)).sqrt()
}

/// Parameters of a torus geodesic winding `n` times along the base circle
/// and `m` times along the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedGeodesic {
    pub m1: f64,
    pub m2: f64,
    /// Energy from the turning-point relation at `rho0`.
    pub e: f64,
    /// Velocity `(s', 0, phi')` reconstructed from the momenta.
    pub velocity: [f64; 3],
    /// Energy `h(v, v) / 2` of the reconstructed velocity.
    pub e_velocity: f64,
    /// Affine length after which both windings are complete.
    pub period: f64,
}

/// Momenta, energy and period of the torus geodesic with winding `(n, m)`.
pub fn closed_geodesic_params(rho0: f64, r0: f64, t: f64, n: i64, m: i64, eps: i8) -> Result<ClosedGeodesic> {
    if n == 0 && m == 0 {
        return Err(GeomError::Invalid("winding (0, 0) is the trivial geodesic".into()));
    }
    if !(rho0 > 0.0) || !(r0 > 0.0) {
        return Err(GeomError::Domain("rho0 and r0 must be positive".into()));
    }
    let rr = r0 * r0 + 1.0;
    let t4 = t.powi(4);
    let u1sq = rho0.powi(4) * rr * rr;
    let epsf = f64::from(eps);
    let (nf, mf) = (n as f64, m as f64);
    let m1 = (mf * rr / 4.0 + epsf * nf * r0 * r0) / (u1sq + t4) * u1sq;
    let m2 = r0 / rr * (nf + epsf * m1);
    let bracket = t4 * m1 * m1 / (rho0.powi(4) * rr.powi(3)) + (m1 - epsf * m2 * r0).powi(2) + m2 * m2;
    let e = rr / (4.0 * (u1sq + t4).sqrt()) * bracket;
    if !(e > 0.0) {
        return Err(GeomError::Invalid(format!("closed geodesic energy must be positive, got {e}")));
    }
    let curve = PlaneCurve::circle(r0, eps, 0.0)?;
    let h = induced_metric(&curve, t, &ChartPoint::new(0.0, rho0, 0.0)?)?;
    let det = h.h11 * h.h33 - h.h13 * h.h13;
    let sdot = (h.h33 * m2 - h.h13 * m1) / det;
    let phidot = (h.h11 * m1 - h.h13 * m2) / det;
    let velocity = [sdot, 0.0, phidot];
    let e_velocity = 0.5 * h.inner(&velocity, &velocity);
    let period = if m != 0 { (TAU * mf / phidot).abs() } else { (TAU * r0 * nf / sdot).abs() };
    if !(period.is_finite() && period > 0.0) {
        return Err(GeomError::Invalid(format!("winding ({n}, {m}) gives no positive period ({period})")));
    }
    Ok(ClosedGeodesic { m1, m2, e, velocity, e_velocity, period })
}

/// Volume of the tube `rho <= rho_r` over a circle of radius `r0`,
/// `4 pi^2 r0 sqrt 8 ((rho_r^4 R^2 + t^4)^{3/4} - t^3) / (3 R)`.
pub fn tube_volume(rho_r: f64, r0: f64, t: f64) -> f64 {
    let rr = r0 * r0 + 1.0;
    4.0 * PI * PI * r0 * 8f64.sqrt() / (3.0 * rr) * ((rho_r.powi(4) * rr * rr + t.powi(4)).powf(0.75) - t.powi(3))
}

/// Fiber radius whose distance to the zero section equals `dist`.
pub fn rho_at_distance(dist: f64, r0: f64, t: f64) -> Result<f64> {
    if !(dist > 0.0) {
        return Err(GeomError::Domain(format!("distance must be positive, got {dist}")));
    }
    let d = |rho: f64| if t > 0.0 { distance_to_zero_section(rho, r0, t) } else { Ok(distance_to_zero_section_t0(rho, r0)) };
    let mut hi = dist / (2.0 * (r0 * r0 + 1.0)).sqrt() + 1.0;
    while d(hi)? < dist {
        hi *= 2.0;
    }
    root_find(|rho| d(rho).map(|v| v - dist).unwrap_or(f64::NAN), 0.0, hi, 1e-14 * hi)
}

/// Growth rates `(1/R) log vol` of the tubes of radius `R` over a circle.
pub fn exponential_growth_estimate(r0: f64, t: f64, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GeomError::Invalid("radii must be strictly increasing".into()));
    }
    radii
        .iter()
        .map(|&r| {
            let rho = rho_at_distance(r, r0, t)?;
            Ok((r, tube_volume(rho, r0, t).ln() / r))
        })
        .collect()
}

/// Settings of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub tol: f64,
    pub rho_floor: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { tol: 1e-10, rho_floor: RHO_FLOOR, max_steps: 200_000, initial_step: 1e-3 }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StopReason {
    Completed,
    RhoFloor { tau: f64, rho: f64 },
}

/// Accepted steps of an integration with cubic Hermite dense output.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    #[serde(skip)]
    accel: Vec<[f64; 3]>,
    pub stop: StopReason,
}

impl Trajectory {
    /// Last accepted state.
    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Converts a floor stop into an error.
    pub fn into_result(self) -> Result<Self> {
        match self.stop {
            StopReason::Completed => Ok(self),
            StopReason::RhoFloor { tau, rho } => Err(GeomError::RhoFloor { tau, rho }),
        }
    }

    /// State at an intermediate affine parameter by Hermite interpolation.
    pub fn state_at(&self, tau: f64) -> GeodesicState {
        let n = self.states.len();
        let idx = self.states.partition_point(|s| s.tau <= tau).clamp(1, n.max(2) - 1);
        if n < 2 {
            return self.states[0];
        }
        let (a, b) = (&self.states[idx - 1], &self.states[idx]);
        let (fa, fb) = (&self.accel[idx - 1], &self.accel[idx]);
        let h = b.tau - a.tau;
        let x = ((tau - a.tau) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) =
            (2.0 * x.powi(3) - 3.0 * x * x + 1.0, x.powi(3) - 2.0 * x * x + x, -2.0 * x.powi(3) + 3.0 * x * x, x.powi(3) - x * x);
        let qa = a.q.coords();
        let qb = b.q.coords();
        let mut q = [0.0; 3];
        let mut v = [0.0; 3];
        for i in 0..3 {
            q[i] = h00 * qa[i] + h10 * h * a.qdot[i] + h01 * qb[i] + h11 * h * b.qdot[i];
            v[i] = h00 * a.qdot[i] + h10 * h * fa[i] + h01 * b.qdot[i] + h11 * h * fb[i];
        }
        GeodesicState { tau, q: ChartPoint { s: q[0], rho: q[1], phi: q[2] }, qdot: v }
    }
}

fn acceleration(curve: &PlaneCurve, t: f64, q: &[f64; 3], v: &[f64; 3]) -> Result<[f64; 3]> {
    let p = ChartPoint { s: q[0], rho: q[1], phi: q[2] };
    let gam = induced_christoffels(curve, t, &p, default_step(q[1]))?;
    let mut a = [0.0; 3];
    for (k, ak) in a.iter_mut().enumerate() {
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                sum += gam[k][i][j] * v[i] * v[j];
            }
        }
        *ak = -sum;
    }
    Ok(a)
}

type Phase = [f64; 6];

fn rhs(curve: &PlaneCurve, t: f64, y: &Phase) -> Result<Phase> {
    let q = [y[0], y[1], y[2]];
    let v = [y[3], y[4], y[5]];
    let a = acceleration(curve, t, &q, &v)?;
    Ok([v[0], v[1], v[2], a[0], a[1], a[2]])
}

fn axpy(y: &Phase, terms: &[(f64, &Phase)], h: f64) -> Phase {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..6 {
            out[i] += h * c * k[i];
        }
    }
    out
}


/// Integrates the geodesic equations from `init` up to `tau_end`.
///
/// A trajectory that reaches `rho_floor` stops there and reports
/// [`StopReason::RhoFloor`] with the last accepted state kept.
pub fn integrate(
    curve: &PlaneCurve,
    t: f64,
    init: &GeodesicState,
    tau_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(init.q.rho > opts.rho_floor) {
        return Err(GeomError::Domain(format!("initial rho {} is below the floor", init.q.rho)));
    }
    if !(tau_end > init.tau) {
        return Err(GeomError::Invalid("tau_end must exceed the initial tau".into()));
    }
    let mut y: Phase = [init.q.s, init.q.rho, init.q.phi, init.qdot[0], init.qdot[1], init.qdot[2]];
    let mut tau = init.tau;
    let mut k1 = rhs(curve, t, &y)?;
    let mut states = vec![*init];
    let mut accel = vec![[k1[3], k1[4], k1[5]]];
    let mut h = opts.initial_step.min(tau_end - tau);
    let state_of = |tau: f64, y: &Phase| GeodesicState {
        tau,
        q: ChartPoint { s: y[0], rho: y[1], phi: y[2] },
        qdot: [y[3], y[4], y[5]],
    };
    for _ in 0..opts.max_steps {
        if tau >= tau_end {
            return Ok(Trajectory { states, accel, stop: StopReason::Completed });
        }
        h = h.min(tau_end - tau);
        if h < 1e-14 * tau.abs().max(1.0) {
            return Err(GeomError::StepUnderflow { tau });
        }
        let stages = (|| -> Result<(Phase, Phase)> {
            let k2 = rhs(curve, t, &axpy(&y, &[(A21, &k1)], h))?;
            let k3 = rhs(curve, t, &axpy(&y, &[(A31, &k1), (A32, &k2)], h))?;
            let k4 = rhs(curve, t, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h))?;
            let k5 = rhs(curve, t, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h))?;
            let k6 = rhs(curve, t, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h))?;
            let y5 = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
            let k7 = rhs(curve, t, &y5)?;
            let mut err = [0.0; 6];
            for i in 0..6 {
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            Ok((y5, err))
        })();
        let (y5, err) = match stages {
            Ok(v) => v,
            Err(_) => {
                h *= 0.25;
                continue;
            }
        };
        let mut norm: f64 = 0.0;
        for i in 0..6 {
            let scale = opts.tol * (1.0 + y[i].abs().max(y5[i].abs()));
            norm = norm.max(err[i].abs() / scale);
        }
        if !norm.is_finite() {
            h *= 0.25;
            continue;
        }
        if norm <= 1.0 {
            if y5[1] <= opts.rho_floor {
                return Ok(Trajectory { states, accel, stop: StopReason::RhoFloor { tau: tau + h, rho: y5[1] } });
            }
            tau += h;
            y = y5;
            k1 = rhs(curve, t, &y)?;
            states.push(state_of(tau, &y));
            accel.push([k1[3], k1[4], k1[5]]);
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(GeomError::StepUnderflow { tau })
}
