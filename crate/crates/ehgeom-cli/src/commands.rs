//! The `geometry`, `geodesic`, `spectral` and `spinor` commands.

use ehgeom::curves::PlaneCurve;
use ehgeom::geodesics::{closed_geodesic_params, first_integrals, integrate, GeodesicState, IntegratorOptions, StopReason};
use ehgeom::hypersurface::{curvature, induced_metric, second_form, ChartPoint};
use ehgeom::spectral::{laplace_rayleigh, ricci_spectral_bounds, spectral_report};
use ehgeom::spinors::{
    dirac_apply, harmonic_constant, harmonic_spinor_beta, spinor_norm_sq, tkilling_transport, wk_equation_residual,
    wk_spinor_t0, PhiLoop, SpinorField,
};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{GeodesicInit, RunConfig, SpinorSpec};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Output, Table};

/// Grid points in `s`-major, then `rho`, then `phi` order.
pub fn grid_points(config: &RunConfig, curve: &PlaneCurve) -> CliResult<Vec<ChartPoint>> {
    let len = curve.total_length();
    let mut points = Vec::new();
    for s in config.grid.s.nodes() {
        if !curve.is_closed() && s > len {
            return Err(CliError::Usage(format!("grid.s node {s} exceeds the curve length {len}")));
        }
        for rho in config.grid.rho.nodes() {
            for phi in config.grid.phi.nodes() {
                points.push(ChartPoint::new(s, rho, phi)?);
            }
        }
    }
    Ok(points)
}

/// Builds the configured base curve.
pub fn build_curve(config: &RunConfig) -> CliResult<PlaneCurve> {
    config.curve.build().map_err(|e| CliError::Usage(format!("invalid curve: {e}")))
}

/// Induced metric, Ricci diagonal, scalar and mean curvature and `sigma2`
/// over the grid.
pub fn cmd_geometry(config: &RunConfig) -> CliResult<Output> {
    let curve = build_curve(config)?;
    let t = config.t;
    let mut table = Table::new(&[
        "s", "rho", "phi", "h11", "h12", "h13", "h22", "h23", "h33", "R11", "R22", "R33", "S", "meanH", "sigma2",
    ]);
    for p in grid_points(config, &curve)? {
        let h = induced_metric(&curve, t, &p)?;
        let c = curvature(&curve, t, &p)?;
        let sf = second_form(&curve, t, &p)?;
        table.push(
            [p.s, p.rho, p.phi, h.h11, h.h12, h.h13, h.h22, h.h23, h.h33, c.ric[0], c.ric[1], c.ric[2], c.s, sf.mean_h, sf.sigma2]
                .into_iter()
                .map(Cell::Num)
                .collect(),
        );
    }
    Ok(Output::Table(table))
}

fn circle_params(curve: &PlaneCurve, what: &str) -> CliResult<(f64, i8)> {
    curve.circle_params().ok_or_else(|| CliError::Usage(format!("{what} requires a circle curve")))
}

/// Integrates the configured geodesic and tabulates every accepted step
/// with its first integrals.
pub fn cmd_geodesic(config: &RunConfig) -> CliResult<Output> {
    let curve = build_curve(config)?;
    let t = config.t;
    let mut opts = IntegratorOptions { tol: config.tolerances.ode, ..IntegratorOptions::default() };
    let (init, tau_end) = match &config.geodesic {
        GeodesicInit::State { position, velocity, tau_end } => {
            let q = ChartPoint::new(position[0], position[1], position[2])?;
            (GeodesicState { tau: 0.0, q, qdot: *velocity }, *tau_end)
        }
        GeodesicInit::Radial { rho0 } => {
            let q = ChartPoint::new(0.0, *rho0, 0.0)?;
            let h22 = induced_metric(&curve, t, &q)?.h22;
            opts.rho_floor = 1e-4 * rho0;
            let reach = 2.0 * (2.0 * rho0 * rho0 * h22).sqrt() + 1.0;
            (GeodesicState { tau: 0.0, q, qdot: [0.0, -1.0 / h22.sqrt(), 0.0] }, reach)
        }
        GeodesicInit::Closed { rho0, n, m } => {
            let (r0, eps) = circle_params(&curve, "a closed geodesic")?;
            let g = closed_geodesic_params(*rho0, r0, t, *n, *m, eps)?;
            (GeodesicState { tau: 0.0, q: ChartPoint::new(0.0, *rho0, 0.0)?, qdot: g.velocity }, g.period)
        }
    };
    if !(tau_end > 0.0) {
        return Err(CliError::Usage(format!("geodesic tau_end must be positive, got {tau_end}")));
    }
    let traj = integrate(&curve, t, &init, tau_end, &opts)?;
    if let StopReason::RhoFloor { tau, rho } = traj.stop {
        eprintln!("note: trajectory reached rho = {rho:e} at tau = {tau}");
    }
    let mut table =
        Table::new(&["tau", "s", "rho", "phi", "sdot", "rhodot", "phidot", "E", "M1", "M2"]);
    for st in &traj.states {
        let f = first_integrals(&curve, t, st)?;
        table.push(vec![
            st.tau.into(),
            st.q.s.into(),
            st.q.rho.into(),
            st.q.phi.into(),
            st.qdot[0].into(),
            st.qdot[1].into(),
            st.qdot[2].into(),
            f.e.into(),
            f.m1.into(),
            f.m2.into(),
        ]);
    }
    Ok(Output::Table(table))
}

/// JSON report of the Laplace and Dirac Rayleigh quotients, the bound
/// constants and the Ricci bounds.
pub fn cmd_spectral(config: &RunConfig) -> CliResult<Output> {
    let curve = build_curve(config)?;
    let (t, eps, tol) = (config.t, config.eps, config.tolerances.quad);
    let laplace = laplace_rayleigh(eps, t, &curve, tol)?;
    let mut dirac = Vec::new();
    for &e in &config.spectral.dirac_eps {
        dirac.push(spectral_report(e, t, config.slope(), &curve, tol)?);
    }
    let mut by_eps: Vec<(f64, f64)> = dirac.iter().map(|r| (r.eps, r.quotient)).collect();
    by_eps.sort_by(|x, y| y.0.total_cmp(&x.0));
    let decreasing = by_eps.windows(2).all(|w| w[1].1 < w[0].1);
    let ricci = if t > 0.0 { Some(ricci_spectral_bounds(t)?) } else { None };
    let report = json!({
        "t": t,
        "a": config.slope(),
        "laplace": laplace,
        "laplace_bound_applies": t <= eps,
        "laplace_within_bound": laplace.quotient <= laplace.bound * (1.0 + tol),
        "dirac": dirac,
        "dirac_decreasing_in_eps": decreasing,
        "ricci": ricci,
    });
    Ok(Output::Report(report))
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Spinor values, Dirac and WK residuals and fiber-loop holonomy over the
/// grid.
pub fn cmd_spinor(config: &RunConfig) -> CliResult<Output> {
    let base = build_curve(config)?;
    let t = config.t;
    let (field, curve): (Box<dyn SpinorField>, PlaneCurve) = match config.spinor {
        SpinorSpec::Constant { c1, c2 } => (Box::new(harmonic_constant(&base, complex(c1), complex(c2))), base.clone()),
        SpinorSpec::Beta { beta, b1, b2 } => {
            let (r0, eps) = circle_params(&base, "the beta spinor")?;
            let f = harmonic_spinor_beta(beta, complex(b1), complex(b2), r0, t, eps)?;
            let c = f.curve().clone();
            (Box::new(f), c)
        }
        SpinorSpec::Wk => (Box::new(wk_spinor_t0(config.lambda, &base, t)?), base.clone()),
    };
    let mut table = Table::new(&[
        "s", "rho", "phi", "re_psi1", "im_psi1", "re_psi2", "im_psi2", "dirac_norm", "wk_residual", "holonomy_defect",
    ]);
    for p in grid_points(config, &curve)? {
        let psi = field.eval(&p)?.psi;
        let d = spinor_norm_sq(&dirac_apply(field.as_ref(), &curve, t, &p)?).sqrt();
        let wk = wk_equation_residual(field.as_ref(), config.lambda, &curve, t, &p)?.into_iter().fold(0.0, f64::max);
        let hol = tkilling_transport(&curve, t, &PhiLoop { s: p.s, rho: p.rho }, &psi, config.tolerances.ode)?;
        table.push(
            [p.s, p.rho, p.phi, psi[0].re, psi[0].im, psi[1].re, psi[1].im, d, wk, hol.holonomy_defect]
                .into_iter()
                .map(Cell::Num)
                .collect(),
        );
    }
    Ok(Output::Table(table))
}
