//! The `verify` command: oracle cross-checks over the configured curve and
//! grid, reported as a pass/fail table.

use ehgeom::ambient::{christoffels_second, metric, AmbientPoint};
use ehgeom::curves::{geodesic_curvature, PlaneCurve};
use ehgeom::geodesics::{distance_to_zero_section, first_integrals, integrate, GeodesicState, IntegratorOptions};
use ehgeom::hypersurface::{curvature, embed, frame, induced_metric, second_form, unit_normal, ChartPoint};
use ehgeom::oracle::{fd_laplacian, fd_pullback_metric, fd_ricci, fd_shape_operator, STEP_FIRST, STEP_SECOND};
use ehgeom::spectral::{laplace_rayleigh, laplacian_scalar, subharmonic_report, PhiStar, ScalarField};
use ehgeom::specfun::{hyp2f1, integrate as quad, Hyp2F1Args, QuadOptions};
use ehgeom::spinors::{dirac_apply, harmonic_constant, spinor_norm_sq, wk_equation_residual, wk_spinor_t0, SpinorField};
use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;

use crate::commands::{build_curve, grid_points};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{Cell, Output, Table};

/// Outcome of one cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, passed: value < threshold }
    }
}

fn ambient(t: f64) -> impl Fn(&[f64; 4]) -> Matrix4<f64> {
    move |x: &[f64; 4]| {
        let m = metric(&AmbientPoint::new(*x), t).expect("ambient metric off the zero section");
        Matrix4::from_fn(|i, j| m.g[i][j])
    }
}

fn centred(s0: f64, q: &[f64; 3]) -> ChartPoint {
    ChartPoint { s: s0 + q[0], rho: q[1], phi: q[2] }
}

fn max_over<F: FnMut(&ChartPoint) -> CliResult<f64>>(points: &[ChartPoint], mut f: F) -> CliResult<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(f(p)?);
    }
    Ok(worst)
}

fn geometry_checks(curve: &PlaneCurve, t: f64, points: &[ChartPoint], out: &mut Vec<Check>) -> CliResult<()> {
    let g = ambient(t);
    let v = max_over(points, |p| Ok(fd_ricci(&g, &embed(curve, p).x, STEP_SECOND)?.amax()))?;
    out.push(Check::below("ambient_ricci_flat", v, 1e-4));
    let v = max_over(points, |p| Ok((metric(&embed(curve, p), t)?.det() - 16.0).abs()))?;
    out.push(Check::below("ambient_det_16", v, 1e-9));
    let v = max_over(points, |p| {
        let emb = |q: &[f64; 3]| embed(curve, &centred(p.s, q)).x;
        let fd = fd_pullback_metric(&emb, &g, &[0.0, p.rho, p.phi], STEP_FIRST);
        let m = induced_metric(curve, t, p)?.matrix();
        Ok((m - fd).amax() / m.amax())
    })?;
    out.push(Check::below("induced_metric_vs_pullback", v, 1e-8));
    let v = max_over(points, |p| {
        let h = induced_metric(curve, t, p)?;
        let f = frame(curve, t, p)?;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((h.inner(&f.y[i], &f.y[j]) - delta).abs());
            }
        }
        Ok(worst)
    })?;
    out.push(Check::below("frame_orthonormal", v, 1e-12));
    let v = max_over(points, |p| {
        let h = |q: &[f64; 3]| induced_metric(curve, t, &centred(p.s, q)).expect("induced metric").matrix();
        let ric = fd_ricci(&h, &[0.0, p.rho, p.phi], STEP_SECOND)?;
        let a = frame(curve, t, p)?.matrix();
        let ric_frame: Matrix3<f64> = a * ric * a.transpose();
        let c = curvature(curve, t, p)?;
        let closed = Matrix3::from_diagonal(&nalgebra::Vector3::from(c.ric));
        Ok((ric_frame - closed).amax() / closed.amax())
    })?;
    out.push(Check::below("ricci_vs_oracle", v, 1e-5));
    let v = max_over(points, |p| {
        let c = curvature(curve, t, p)?;
        Ok((c.s - c.ric.iter().sum::<f64>()).abs())
    })?;
    out.push(Check::below("scalar_is_ricci_trace", v, 1e-12));
    let gamma = |x: &[f64; 4]| christoffels_second(&AmbientPoint::new(*x), t);
    let v = max_over(points, |p| {
        let emb = |q: &[f64; 3]| embed(curve, &centred(p.s, q)).x;
        let nrm = |q: &[f64; 3]| unit_normal(curve, t, &centred(p.s, q)).expect("unit normal");
        let fd = fd_shape_operator(&emb, &nrm, &g, &gamma, &[0.0, p.rho, p.phi], STEP_FIRST)?;
        let sf = second_form(curve, t, p)?;
        let m = Matrix3::from_fn(|i, j| sf.ii_coord[i][j]);
        Ok((m - fd).amax() / m.amax())
    })?;
    out.push(Check::below("second_form_vs_oracle", v, 1e-5));
    let v = max_over(points, |p| Ok(Matrix3::from_fn(|i, j| second_form(curve, t, p).expect("second form").ii_frame[i][j]).determinant().abs()))?;
    out.push(Check::below("second_form_degenerate", v, 1e-10));
    let v = max_over(points, |p| Ok((second_form(curve, t, p)?.sigma2 - curvature(curve, t, p)?.s / 8.0).abs()))?;
    out.push(Check::below("sigma2_equals_s_over_8", v, 1e-10));
    let v = max_over(points, |p| Ok((second_form(curve, t, p)?.sigma2 - curvature(curve, t, p)?.s / 2.0).abs()))?;
    out.push(Check::below("sigma2_equals_s_over_2", v, 1e-10));
    let v = max_over(points, |p| {
        let u1 = induced_metric(curve, t, p)?.u1;
        let want = (2.0 / (u1 * u1 + t.powi(4)).sqrt()).sqrt() * geodesic_curvature(curve, p.s);
        Ok((second_form(curve, t, p)?.mean_h - want).abs())
    })?;
    out.push(Check::below("mean_curvature_vs_geodesic_curvature", v, 1e-10));
    Ok(())
}

fn analysis_checks(config: &RunConfig, curve: &PlaneCurve, points: &[ChartPoint], out: &mut Vec<Check>) -> CliResult<()> {
    let t = config.t;
    let phi_star = PhiStar::new(curve);
    let v = max_over(points, |p| {
        let at = |q: &[f64; 3]| centred(p.s, q);
        let f = |q: &[f64; 3]| phi_star.eval(&at(q)).map_or(f64::NAN, |j| j.f);
        let h = |q: &[f64; 3]| induced_metric(curve, t, &at(q)).expect("induced metric").matrix();
        let fd = fd_laplacian(&f, &h, &[0.0, p.rho, p.phi], STEP_SECOND)?;
        let closed = laplacian_scalar(&phi_star, curve, t, p)?;
        Ok((closed - fd).abs() / (1.0 + closed.abs()))
    })?;
    out.push(Check::below("laplacian_vs_oracle", v, 1e-4));
    let report = subharmonic_report(curve, t, &config.grid.s, &config.grid.rho)?;
    let v = report.rows.iter().map(|r| r.laplacian).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check { name: "phi_star_subharmonic", value: v, threshold: 0.0, passed: report.subharmonic && v < 0.0 });
    let field = harmonic_constant(curve, Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.8));
    let v = max_over(points, |p| {
        let d = spinor_norm_sq(&dirac_apply(&field, curve, t, p)?).sqrt();
        let scale = spinor_norm_sq(&field.eval(p)?.psi).sqrt() / p.rho;
        Ok(d / (1.0 + scale))
    })?;
    out.push(Check::below("dirac_constant_kernel", v, 1e-10));
    let mut worst: f64 = 0.0;
    for (m, b) in [(0.5, 0.25), (2.0, 0.75), (2.5, 1.3)] {
        for z in [-0.3, -0.95, -1.05, -4.0] {
            let f = hyp2f1(Hyp2F1Args::new(m, b, b, z), 1e-15)?;
            let exact = (1.0f64 - z).powf(-m);
            worst = worst.max((f - exact).abs() / exact);
        }
    }
    out.push(Check::below("hyp2f1_binomial_identity", worst, 1e-10));
    if t == 0.0 {
        let wk = wk_spinor_t0(config.lambda, curve, 0.0)?;
        let v = max_over(points, |p| Ok(wk_equation_residual(&wk, config.lambda, curve, 0.0, p)?.into_iter().fold(0.0, f64::max)))?;
        out.push(Check::below("wk_spinor_t0_residual", v, 1e-8));
    } else {
        let v = max_over(points, |p| Ok(-curvature(curve, t, p)?.ric[2]))?;
        out.push(Check::below("ricci_lower_bound", v, 2.0 / (t * t) + 1e-12));
    }
    if curve.is_closed() && t <= config.eps {
        let l = laplace_rayleigh(config.eps, t, curve, config.tolerances.quad)?;
        out.push(Check::below("laplace_rayleigh_within_bound", l.quotient / l.bound, 1.0 + 1e-8));
    }
    Ok(())
}

fn circle_checks(config: &RunConfig, curve: &PlaneCurve, out: &mut Vec<Check>) -> CliResult<()> {
    let Some((r0, _)) = curve.circle_params() else {
        return Ok(());
    };
    let t = config.t;
    let init = GeodesicState { tau: 0.0, q: ChartPoint::new(0.3, 1.2, 0.1)?, qdot: [0.4, 0.2, -0.3] };
    let opts = IntegratorOptions { tol: config.tolerances.ode, ..IntegratorOptions::default() };
    let traj = integrate(curve, t, &init, 10.0, &opts)?.into_result()?;
    let f0 = first_integrals(curve, t, &init)?;
    let mut drift: f64 = 0.0;
    for st in &traj.states {
        let f = first_integrals(curve, t, st)?;
        drift = drift.max((f.e - f0.e).abs() / f0.e.abs()).max((f.m1 - f0.m1).abs() / f0.m1.abs().max(1e-300));
        if let (Some(m), Some(m0)) = (f.m2, f0.m2) {
            drift = drift.max((m - m0).abs() / m0.abs().max(1e-300));
        }
    }
    out.push(Check::below("geodesic_first_integrals", drift, 1e-8));
    if t > 0.0 {
        let rho0 = config.grid.rho.max;
        let d = distance_to_zero_section(rho0, r0, t)?;
        let u1 = rho0 * rho0 * (r0 * r0 + 1.0);
        let q = quad(|u: f64| (u * u + t.powi(4)).powf(-0.25), 0.0, u1, &QuadOptions::relative(1e-13))? / std::f64::consts::SQRT_2;
        out.push(Check::below("distance_hyp2f1_vs_quadrature", (d - q).abs() / q, 1e-6));
    }
    Ok(())
}

/// Runs every check that applies to the configured curve and `t`.
pub fn run_checks(config: &RunConfig) -> CliResult<Vec<Check>> {
    let curve = build_curve(config)?;
    let points = grid_points(config, &curve)?;
    let mut checks = Vec::new();
    geometry_checks(&curve, config.t, &points, &mut checks)?;
    analysis_checks(config, &curve, &points, &mut checks)?;
    circle_checks(config, &curve, &mut checks)?;
    Ok(checks)
}

/// Pass/fail table of [`run_checks`] and the number of failures.
pub fn cmd_verify(config: &RunConfig) -> CliResult<(Output, usize)> {
    let checks = run_checks(config)?;
    let mut table = Table::new(&["check", "status", "value", "threshold"]);
    for c in &checks {
        table.push(vec![
            Cell::from(c.name),
            Cell::from(if c.passed { "PASS" } else { "FAIL" }),
            Cell::Num(c.value),
            Cell::Num(c.threshold),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok((Output::Table(table), failed))
}
