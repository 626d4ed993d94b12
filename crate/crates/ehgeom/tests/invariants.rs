//! Property-based invariants over randomly drawn points, parameters and
//! spinors.

use ehgeom::ambient::{metric, AmbientPoint};
use ehgeom::curves::{geodesic_curvature, PlaneCurve};
use ehgeom::geodesics::distance_to_zero_section;
use ehgeom::hypersurface::{curvature, frame, induced_metric, ricci_radial, scalar_curvature_radial, second_form, ChartPoint};
use ehgeom::spectral::{bound_constants, quintic_root, ricci_spectral_bounds};
use ehgeom::specfun::{hyp2f1, mollifier_mu, Hyp2F1Args};
use ehgeom::spinors::{clifford_mul, dirac_apply, harmonic_constant, spinor_inner, spinor_norm_sq};
use num_complex::Complex64;
use proptest::prelude::*;

fn circle() -> impl Strategy<Value = PlaneCurve> {
    (0.2f64..4.0, prop::bool::ANY, 0.0f64..6.0).prop_map(|(r0, pos, phase)| PlaneCurve::circle(r0, if pos { 1 } else { -1 }, phase).unwrap())
}

fn chart() -> impl Strategy<Value = ChartPoint> {
    (0.0f64..6.0, 0.05f64..20.0, 0.0f64..6.28).prop_map(|(s, rho, phi)| ChartPoint::new(s, rho, phi).unwrap())
}

fn spinor() -> impl Strategy<Value = [Complex64; 2]> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(|v| [Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ambient_determinant_is_sixteen(x in prop::array::uniform4(-3.0f64..3.0), t in 0.0f64..2.5) {
        let p = AmbientPoint::new(x);
        prop_assume!(p.u1() > 1e-3);
        let g = metric(&p, t).unwrap();
        prop_assert!((g.det() - 16.0).abs() < 1e-9 * 16.0);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((g.g[i][j] - g.g[j][i]).abs() < 1e-14 * (1.0 + g.g[i][j].abs()));
            }
        }
    }

    #[test]
    fn frame_is_orthonormal(curve in circle(), p in chart(), t in 0.0f64..2.0) {
        let h = induced_metric(&curve, t, &p).unwrap();
        let f = frame(&curve, t, &p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((h.inner(&f.y[i], &f.y[j]) - delta).abs() < 1e-10);
            }
        }
        prop_assert!(h.det_h > 0.0);
    }

    #[test]
    fn ricci_is_radial_and_bounded_below(curve in circle(), p in chart(), t in 0.1f64..2.0) {
        let c = curvature(&curve, t, &p).unwrap();
        let u1 = induced_metric(&curve, t, &p).unwrap().u1;
        let radial = ricci_radial(u1, t);
        let scale = 1.0 + c.s.abs();
        for i in 0..3 {
            prop_assert!((c.ric[i] - radial[i]).abs() < 1e-9 * scale);
        }
        prop_assert!((c.s - scalar_curvature_radial(u1, t)).abs() < 1e-9 * scale);
        prop_assert!((c.s - c.ric.iter().sum::<f64>()).abs() < 1e-12 * scale);
        prop_assert!(c.s < 0.0);
        prop_assert!(c.ric[0] >= c.ric[1] && c.ric[1] >= c.ric[2]);
        let lower = ricci_spectral_bounds(t).unwrap().ricci_lower;
        prop_assert!(c.ric[2] >= lower - 1e-12);
    }

    #[test]
    fn second_form_is_degenerate_with_trace_mean_curvature(curve in circle(), p in chart(), t in 0.0f64..2.0) {
        let sf = second_form(&curve, t, &p).unwrap();
        let m = nalgebra::Matrix3::from_fn(|i, j| sf.ii_frame[i][j]);
        let scale = 1.0 + m.amax().powi(3);
        prop_assert!(m.determinant().abs() < 1e-10 * scale);
        prop_assert!((m.trace() - sf.mean_h).abs() < 1e-12 * (1.0 + sf.mean_h.abs()));
        let u1 = induced_metric(&curve, t, &p).unwrap().u1;
        let expected = (2.0 / (u1 * u1 + t.powi(4)).sqrt()).sqrt() * geodesic_curvature(&curve, p.s);
        prop_assert!((sf.mean_h - expected).abs() < 1e-10 * (1.0 + expected.abs()));
    }

    #[test]
    fn clifford_multiplication_is_skew_and_isometric(x in prop::array::uniform3(-2.0f64..2.0), psi in spinor()) {
        let y = clifford_mul(&x, &psi);
        let x2: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!(spinor_inner(&y, &psi).re.abs() < 1e-12 * (1.0 + spinor_norm_sq(&psi)));
        prop_assert!((spinor_norm_sq(&y) - x2 * spinor_norm_sq(&psi)).abs() < 1e-12 * (1.0 + x2 * spinor_norm_sq(&psi)));
        let yy = clifford_mul(&x, &y);
        for k in 0..2 {
            prop_assert!((yy[k] + psi[k] * x2).norm() < 1e-12 * (1.0 + x2));
        }
    }

    #[test]
    fn constant_harmonic_spinors_stay_harmonic(curve in circle(), p in chart(), t in 0.0f64..2.0, c in spinor()) {
        let field = harmonic_constant(&curve, c[0], c[1]);
        let d = dirac_apply(&field, &curve, t, &p).unwrap();
        let scale = spinor_norm_sq(&c).sqrt() / (p.rho * p.rho);
        prop_assert!(spinor_norm_sq(&d).sqrt() < 1e-10 * (1.0 + scale));
    }

    #[test]
    fn hypergeometric_reduces_to_binomial(m in 0.1f64..3.0, b in 0.3f64..4.0, z in -8.0f64..0.0) {
        let f = hyp2f1(Hyp2F1Args::new(m, b, b, z), 1e-14).unwrap();
        let exact = (1.0 - z).powf(-m);
        prop_assert!((f - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn quintic_root_lies_in_range(eps in 0.01f64..2.0, r in 0.0f64..5.0) {
        let x = quintic_root(eps).unwrap();
        prop_assert!((x * (x.powi(4) + eps.powi(4)) - 1.0).abs() < 1e-13);
        let c = bound_constants(eps, eps * 1.5, 0.01, r).unwrap();
        let sq = (r * r + 1.0).sqrt();
        prop_assert!(c.q > 0.0 && c.q < 1.0 / sq);
        prop_assert!((c.p_a * sq - c.mu).abs() < 1e-12 * c.mu);
        prop_assert!(c.m > 0.0 && c.m < 2.0 * 2f64.sqrt());
    }

    #[test]
    fn mollifier_is_monotone(a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (ml, mh) = (mollifier_mu(lo), mollifier_mu(hi));
        prop_assert!(ml <= mh + 1e-15);
        prop_assert!((0.0..=1.0).contains(&ml) && (0.0..=1.0).contains(&mh));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distance_grows_with_rho(rho in 0.1f64..5.0, r0 in 0.2f64..3.0, t in 0.1f64..2.0, dr in 0.01f64..1.0) {
        let a = distance_to_zero_section(rho, r0, t).unwrap();
        let b = distance_to_zero_section(rho + dr, r0, t).unwrap();
        prop_assert!(a > 0.0 && b > a);
        let sq = (r0 * r0 + 1.0).sqrt();
        prop_assert!(b - a <= 2f64.sqrt() * sq * dr * (1.0 + 1e-9));
    }
}
