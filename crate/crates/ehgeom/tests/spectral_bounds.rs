//! Scalar Laplacian against the finite-difference oracle, the exhaustion
//! function and the Rayleigh-quotient bounds.

use ehgeom::curves::{arc_length_reparametrize, curve_data, PlaneCurve, RawCurve};
use ehgeom::hypersurface::{curvature, induced_metric, ChartPoint};
use ehgeom::oracle::{fd_laplacian, STEP_SECOND};
use ehgeom::spectral::*;
use ehgeom::specfun::{integrate_semi_infinite, QuadOptions};
use ehgeom::spinors::{approximate_spinor, dirac_apply, spinor_norm_sq, Provenance, SpinorField};
use ehgeom::GeomError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ellipse() -> PlaneCurve {
    arc_length_reparametrize(&RawCurve::ellipse(2.0, 1.0).unwrap(), 2048, 1e-10).unwrap()
}

fn curves() -> Vec<PlaneCurve> {
    vec![
        PlaneCurve::circle(1.0, 1, 0.0).unwrap(),
        PlaneCurve::circle(0.6, -1, 0.4).unwrap(),
        PlaneCurve::line([0.3, -0.5], [1.0, 2.0], 6.0).unwrap(),
        ellipse(),
    ]
}

fn random_point(rng: &mut ChaCha8Rng, curve: &PlaneCurve) -> ChartPoint {
    let len = curve.total_length();
    let s = if curve.is_closed() { rng.gen_range(0.0..len) } else { rng.gen_range(0.1 * len..0.9 * len) };
    ChartPoint::new(s, rng.gen_range(0.3..2.5), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap()
}

fn oracle_laplacian(field: &dyn ScalarField, curve: &PlaneCurve, t: f64, p: &ChartPoint) -> f64 {
    let at = |q: &[f64; 3]| ChartPoint { s: p.s + q[0], rho: q[1], phi: q[2] };
    let f = |q: &[f64; 3]| field.eval(&at(q)).unwrap().f;
    let metric = |q: &[f64; 3]| induced_metric(curve, t, &at(q)).unwrap().matrix();
    fd_laplacian(&f, &metric, &[0.0, p.rho, p.phi], STEP_SECOND).unwrap()
}

/// Test field depending on every chart coordinate.
struct Mixed;

impl ScalarField for Mixed {
    fn eval(&self, p: &ChartPoint) -> ehgeom::Result<ScalarJet> {
        let (ss, cs) = p.s.sin_cos();
        let (sp, cp) = p.phi.sin_cos();
        let e = (-0.5 * p.rho).exp();
        let f = ss * e + p.rho * p.rho * cp + cs * sp;
        Ok(ScalarJet {
            f,
            grad: [cs * e - ss * sp, -0.5 * ss * e + 2.0 * p.rho * cp, -p.rho * p.rho * sp + cs * cp],
            hess: [
                [-ss * e - cs * sp, -0.5 * cs * e, -ss * cp],
                [-0.5 * cs * e, 0.25 * ss * e + 2.0 * cp, -2.0 * p.rho * sp],
                [-ss * cp, -2.0 * p.rho * sp, -p.rho * p.rho * cp - cs * sp],
            ],
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

#[test]
fn laplacian_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for curve in curves() {
        let phi_star = PhiStar::new(&curve);
        let h_eps = MeanCurvatureProxy::new(&curve, 0.7, 2.0).unwrap();
        let fields: [&dyn ScalarField; 3] = [&Mixed, &phi_star, &h_eps];
        for _ in 0..6 {
            let p = random_point(&mut rng, &curve);
            let t = rng.gen_range(0.0..1.5);
            for field in fields {
                let closed = laplacian_scalar(field, &curve, t, &p).unwrap();
                let fd = oracle_laplacian(field, &curve, t, &p);
                assert!((closed - fd).abs() < 1e-4 * (1.0 + fd.abs()), "{closed} vs {fd} at {p:?}, t = {t}");
            }
        }
    }
}

#[test]
fn closed_form_jets_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for curve in curves() {
        let phi_star = PhiStar::new(&curve);
        let h_eps = MeanCurvatureProxy::new(&curve, 0.5, 2.0).unwrap();
        let fields: [&dyn ScalarField; 3] = [&Mixed, &phi_star, &h_eps];
        for field in fields {
            assert_eq!(field.provenance(), Provenance::ClosedForm);
            let fd = FdScalarField::new(|p: &ChartPoint| Ok(field.eval(p)?.f));
            assert_eq!(fd.provenance(), Provenance::FiniteDifference);
            for _ in 0..5 {
                let p = random_point(&mut rng, &curve);
                let a = field.eval(&p).unwrap();
                let b = fd.eval(&p).unwrap();
                for i in 0..3 {
                    assert!((a.grad[i] - b.grad[i]).abs() < 1e-8 * (1.0 + a.grad[i].abs()));
                    for j in 0..3 {
                        assert!((a.hess[i][j] - b.hess[i][j]).abs() < 1e-6 * (1.0 + a.hess[i][j].abs()), "{i}{j}");
                    }
                }
            }
        }
    }
}

#[test]
fn laplacian_of_constants_vanishes_and_of_scalar_curvature_matches() {
    let curve = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let p = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
    let one = FdScalarField::new(|_: &ChartPoint| Ok(1.0));
    assert!(laplacian_scalar(&one, &curve, 1.0, &p).unwrap().abs() < 1e-12);
    let s = FdScalarField::new(|q: &ChartPoint| Ok(curvature(&curve, 1.0, q)?.s));
    let v = laplacian_scalar(&s, &curve, 1.0, &p).unwrap();
    assert!((v + 0.384).abs() < 1e-6, "{v}");
}

#[test]
fn laplacian_sign_convention_is_positive() {
    let curve = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let bump = FdScalarField::new(|q: &ChartPoint| Ok(-(q.rho - 1.0).powi(2)));
    let v = laplacian_scalar(&bump, &curve, 1.0, &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
    assert!(v >= 0.0, "{v}");
}

#[test]
fn phi_star_closed_forms() {
    let curve = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let field = PhiStar::new(&curve);
    let p = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
    let lap = laplacian_scalar(&field, &curve, 1.0, &p).unwrap();
    assert!((lap - (-0.711_512_473_537_885)).abs() < 1e-12, "{lap}");
    assert!((lap - phi_star_laplacian_radial(1.0, 2.0, 1.0)).abs() < 1e-12);
    for r0 in [0.5, 1.0, 3.0] {
        let c = PlaneCurve::circle(r0, 1, 0.0).unwrap();
        let f = PhiStar::new(&c);
        for rho in [0.1, 1.0, 10.0, 1e3] {
            for t in [0.0, 0.5, 2.0] {
                let p = ChartPoint::new(0.7, rho, 0.3).unwrap();
                let jet = f.eval(&p).unwrap();
                let g = gradient_norm_sq(&c, t, &p, &jet).unwrap();
                let r2p1 = r0 * r0 + 1.0;
                assert!((g - phi_star_grad_sq_radial(rho, r2p1, t)).abs() < 1e-12 * g);
                let lap = laplacian_scalar(&f, &c, t, &p).unwrap();
                let closed = phi_star_laplacian_radial(rho, r2p1, t);
                assert!((lap - closed).abs() < 1e-10 * closed.abs());
            }
        }
    }
    let far = PhiStar::new(&curve).eval(&ChartPoint::new(0.0, 1e4, 0.0).unwrap()).unwrap();
    let g = gradient_norm_sq(&curve, 1.0, &ChartPoint::new(0.0, 1e4, 0.0).unwrap(), &far).unwrap();
    assert!((g - 0.5).abs() < 1e-9);
}

#[test]
fn phi_star_is_subharmonic_on_circles() {
    for (r0, t) in [(1.0, 1.0), (0.4, 0.3), (2.5, 2.0), (1.0, 0.0)] {
        let curve = PlaneCurve::circle(r0, 1, 0.0).unwrap();
        let s = AxisRange { min: 0.0, max: curve.total_length() * 0.95, count: 20 };
        let rho = AxisRange { min: 0.05, max: 20.0, count: 20 };
        let rep = subharmonic_report(&curve, t, &s, &rho).unwrap();
        assert_eq!(rep.rows.len(), 400);
        assert!(rep.subharmonic && rep.gradient_bounded && rep.proper);
        for row in &rep.rows {
            assert!((row.grad_sq - row.inverse_k).abs() < 1e-12 * row.inverse_k);
            assert!(row.laplacian <= -1e-12);
        }
    }
}

#[test]
fn exhaustion_function_is_proper_and_cut_off() {
    let curve = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let at = |rho: f64, s: f64| exhaustion_phi(&curve, &ChartPoint::new(s, rho, 0.0).unwrap(), 1.0);
    assert_eq!(at(1e-3, 0.5).value, 0.0);
    assert!(at(0.5, 0.5).in_core && !at(0.5, 2.0).in_core && !at(1.5, 0.5).in_core);
    assert!((at(2.0, 3.0).value - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    let mut prev = -1.0;
    for k in 1..200 {
        let v = at(0.05 * k as f64, 0.0).value;
        assert!(v >= prev);
        prev = v;
    }
    assert!(at(100.0, 0.0).value > 100.0);
}

#[test]
fn constants_have_infinite_volume_integral() {
    let sqrt_det = |rho: f64| induced_metric(&PlaneCurve::circle(1.0, 1, 0.0).unwrap(), 1.0, &ChartPoint::new(0.0, rho, 0.0).unwrap()).unwrap().det_h.sqrt();
    let r = integrate_semi_infinite(sqrt_det, 1.0, 1.0, &QuadOptions::relative(1e-8));
    assert!(matches!(r, Err(GeomError::Divergent(_))), "{r:?}");
}

#[test]
fn laplace_rayleigh_below_bound() {
    let unit = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    for (eps, t) in [(1.0, 1.0), (1.0, 0.5), (2.0, 1.0), (0.5, 0.25), (0.7, 0.0)] {
        let r = laplace_rayleigh(eps, t, &unit, 1e-10).unwrap();
        assert!(r.quotient <= r.bound * (1.0 + 1e-8), "eps {eps} t {t}: {} vs {}", r.quotient, r.bound);
        assert!(r.denominator >= r.denominator_lower * (1.0 - 1e-8));
        assert!(r.numerator <= r.numerator_upper * (1.0 + 1e-8));
    }
    let tight = laplace_rayleigh(1.0, 1.0, &unit, 1e-11).unwrap();
    assert!((tight.quotient - 8.0 / 21.0).abs() < 1e-8, "{}", tight.quotient);
    assert!((tight.denominator - tight.denominator_lower).abs() < 1e-8 * tight.denominator);
    assert!((tight.numerator - tight.numerator_upper).abs() < 1e-8 * tight.numerator);
}

#[test]
fn laplace_rayleigh_scales_with_eps() {
    for curve in [PlaneCurve::circle(1.5, -1, 0.2).unwrap(), ellipse()] {
        for eps in [0.5, 1.0, 2.0] {
            let r = laplace_rayleigh(eps, 0.5 * eps, &curve, 1e-9).unwrap();
            assert!(r.quotient * eps * eps <= 8.0 / 21.0 * (1.0 + 1e-7), "{:?}", r);
            assert!(r.quotient > 0.0);
        }
    }
}

#[test]
fn laplace_rayleigh_numerator_matches_pointwise_gradient() {
    let curve = ellipse();
    let field = MeanCurvatureProxy::new(&curve, 0.8, 2.0).unwrap();
    let (eps, t): (f64, f64) = (0.8, 0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..5 {
        let p = random_point(&mut rng, &curve);
        let jet = field.eval(&p).unwrap();
        let g = gradient_norm_sq(&curve, t, &p, &jet).unwrap();
        let d = curve_data(&curve, p.s);
        let u1 = p.rho * p.rho * (d.r2 + 1.0);
        let radial = 4.0 * u1 * u1 / (2.0 * (u1 * u1 + eps.powi(4)).powi(2)) * (u1 * u1 + t.powi(4)).sqrt() * jet.f * jet.f;
        assert!(g >= radial * (1.0 - 1e-12));
    }
    let unit = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let f = MeanCurvatureProxy::new(&unit, eps, 2.0).unwrap();
    let p = ChartPoint::new(0.0, 0.9, 0.0).unwrap();
    let jet = f.eval(&p).unwrap();
    let u1 = 0.81 * 2.0;
    let radial = 4.0 * u1 * u1 / (2.0 * (u1 * u1 + eps.powi(4)).powi(2)) * (u1 * u1 + t.powi(4)).sqrt() * jet.f * jet.f;
    assert!((gradient_norm_sq(&unit, t, &p, &jet).unwrap() - radial).abs() < 1e-13);
}

#[test]
fn rayleigh_quotients_need_closed_curves() {
    let line = PlaneCurve::line([0.0, 0.0], [1.0, 0.0], 1.0).unwrap();
    assert!(laplace_rayleigh(1.0, 1.0, &line, 1e-8).is_err());
    assert!(dirac_rayleigh(0.2, 0.5, &line, 1e-8).is_err());
    assert!(dirac_rayleigh(0.0, 0.5, &PlaneCurve::circle(1.0, 1, 0.0).unwrap(), 1e-8).is_err());
}

#[test]
fn dirac_rayleigh_decreases_and_respects_bound() {
    let unit = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let t = 0.5;
    let mut prev = f64::INFINITY;
    for eps in [0.3, 0.2, 0.1] {
        let r = dirac_rayleigh(eps, t, &unit, 1e-10).unwrap();
        let c = bound_constants(eps, t, default_slope(t), 1.0).unwrap();
        let bound = dirac_bound(&c).unwrap();
        assert!(r.quotient < prev, "eps {eps}: {} !< {prev}", r.quotient);
        assert!(r.quotient <= bound, "eps {eps}: {} > {bound}", r.quotient);
        prev = r.quotient;
    }
}

#[test]
fn dirac_rayleigh_density_matches_spinor_field() {
    let curve = ellipse();
    let (eps, t) = (0.4, 0.9);
    let psi = approximate_spinor(&curve, eps, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
    let report = dirac_rayleigh(eps, t, &curve, 1e-9).unwrap();
    assert!(report.quotient > 0.0 && report.norm_sq > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for _ in 0..5 {
        let p = random_point(&mut rng, &curve);
        let n = spinor_norm_sq(&psi.eval(&p).unwrap().psi);
        let dn = spinor_norm_sq(&dirac_apply(&psi, &curve, t, &p).unwrap());
        let d = curve_data(&curve, p.s);
        let x = p.rho * (d.r2 + 1.0).sqrt();
        let minus_s = x.powi(4) / (x.powi(4) + eps.powi(4)).powf(1.5);
        assert!((n - minus_s * (-6.0 * eps.powi(4) * x).exp()).abs() < 1e-13);
        let h22 = induced_metric(&curve, t, &p).unwrap().h22;
        let q = 9.0 * eps.powi(8) / (h22 * p.rho * p.rho) * (1.0 / (x.powi(4) + eps.powi(4)) - x).powi(2);
        assert!((dn - n * q).abs() < 1e-10 * (1.0 + dn));
    }
}

#[test]
fn dirac_rayleigh_depends_on_circle_only_through_length_over_r2p1() {
    let a = dirac_rayleigh(0.3, 0.5, &PlaneCurve::circle(1.0, 1, 0.0).unwrap(), 1e-10).unwrap();
    let b = dirac_rayleigh(0.3, 0.5, &PlaneCurve::circle(3.0, -1, 1.0).unwrap(), 1e-10).unwrap();
    assert!((a.quotient - b.quotient).abs() < 1e-8 * a.quotient);
    assert!((a.norm_sq / b.norm_sq - 5.0 / 3.0).abs() < 1e-8);
}

#[test]
fn bound_constants_values_and_limits() {
    let c = bound_constants(0.5, 1.0, 0.01, 1.0).unwrap();
    let x = ehgeom::spectral::quintic_root(1.0).unwrap();
    assert!((x - 0.754_877_666_246_692_7).abs() < 1e-12);
    assert!((x / 2f64.sqrt() - 0.533_780).abs() < 1e-6);
    assert!((c.p_a * 2f64.sqrt() - c.mu).abs() < 1e-14);
    assert!((kappa() - (6f64.powi(6) / 5f64.powi(5)).powf(0.25)).abs() < 1e-15);
    let (mu0, m0) = bound_constants_limit(0.8, 0.008);
    let tiny = bound_constants(1e-4, 0.8, 0.008, 0.0).unwrap();
    assert!((tiny.mu - mu0).abs() < 1e-12 * mu0);
    assert!((tiny.m - m0).abs() < 1e-12 * m0);
    assert!((tiny.n - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    let small_a = bound_constants(1e-3, 0.5, 1e-9, 0.0).unwrap();
    assert!((small_a.m - 2.0 * 2f64.sqrt()).abs() < 1e-3);
    assert!(bound_constants(1.0, 0.5, 0.01, 1.0).is_err());
    assert!(bound_constants(0.1, 0.5, 0.0, 1.0).is_err());
}

#[test]
fn dirac_bound_vanishes_as_eps_shrinks() {
    let t = 0.5;
    let bound = |eps: f64| dirac_bound(&bound_constants(eps, t, default_slope(t), 1.0).unwrap()).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05, 0.02, 0.01] {
        let b = bound(eps);
        assert!(b < prev);
        prev = b;
    }
    let ratio = bound(1e-3) / bound(2e-3);
    assert!((ratio - 0.5).abs() < 1e-3, "{ratio}");
    let r_free: Vec<f64> = [0.0, 1.0, 4.0].iter().map(|&r| dirac_bound(&bound_constants(0.1, t, 0.005, r).unwrap()).unwrap()).collect();
    assert!((r_free[0] - r_free[1]).abs() < 1e-12 * r_free[0] && (r_free[0] - r_free[2]).abs() < 1e-12 * r_free[0]);
    assert!(dirac_bound(&bound_constants(0.45, 0.5, 0.005, 1.0).unwrap()).is_err());
}

#[test]
fn ricci_bounds_and_monotone_r33() {
    let b = ricci_spectral_bounds(1.0).unwrap();
    assert_eq!((b.ricci_lower, b.mu0_upper), (-2.0, 1.0));
    let b2 = ricci_spectral_bounds(2.0).unwrap();
    assert_eq!((b2.ricci_lower, b2.mu0_upper), (-0.5, 0.25));
    assert!(ricci_spectral_bounds(0.0).is_err());
    for t in [0.5, 1.0, 2.0] {
        let lower = ricci_spectral_bounds(t).unwrap().ricci_lower;
        let curve = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=500 {
            let rho = 0.01 + k as f64 * (10.0 - 0.01) / 500.0;
            let ric = curvature(&curve, t, &ChartPoint::new(0.0, rho, 0.0).unwrap()).unwrap().ric;
            assert!(ric.iter().all(|&v| v >= lower - 1e-12));
            assert!(ric[2] > prev);
            prev = ric[2];
        }
    }
}

#[test]
fn spectral_report_serializes_named_constants() {
    let unit = PlaneCurve::circle(1.0, 1, 0.0).unwrap();
    let rep = spectral_report(0.2, 0.5, 0.005, &unit, 1e-9).unwrap();
    assert!(rep.quotient <= rep.analytic_bound);
    let v = serde_json::to_value(rep).unwrap();
    for key in ["Pa", "mu", "M", "N", "Q"] {
        assert!(v["constants"][key].is_f64(), "{key}");
    }
    for key in ["eps", "t", "quotient", "analytic_bound"] {
        assert!(v[key].is_f64(), "{key}");
    }
}
