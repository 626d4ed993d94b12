//! Cross-checks of the closed-form ambient and hypersurface geometry against
//! the finite-difference oracle at seeded random points.

use ehgeom::ambient::{christoffels_first, christoffels_second, metric, AmbientPoint};
use ehgeom::curves::{arc_length_reparametrize, PlaneCurve, RawCurve};
use ehgeom::hypersurface::{
    connection, curvature, embed, frame, induced_metric, second_form, unit_normal, ChartPoint,
};
use ehgeom::oracle::{
    fd_christoffels, fd_christoffels_first, fd_exterior_derivative, fd_pullback_metric, fd_ricci,
    fd_shape_operator, metric_compatibility_defect, ricci_from_christoffels, Mat, STEP_FIRST, STEP_SECOND,
};
use nalgebra::{Matrix3, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ambient_metric(t: f64) -> impl Fn(&[f64; 4]) -> Matrix4<f64> {
    move |x: &[f64; 4]| {
        let m = metric(&AmbientPoint::new(*x), t).expect("ambient metric");
        Matrix4::from_fn(|i, j| m.g[i][j])
    }
}

fn curves() -> Vec<PlaneCurve> {
    let ellipse = arc_length_reparametrize(&RawCurve::ellipse(2.0, 1.0).unwrap(), 2048, 1e-10).unwrap();
    vec![
        PlaneCurve::circle(1.0, 1, 0.0).unwrap(),
        PlaneCurve::circle(0.6, -1, 0.4).unwrap(),
        PlaneCurve::line([0.3, -0.5], [1.0, 2.0], 6.0).unwrap(),
        ellipse,
    ]
}

fn random_chart(rng: &mut ChaCha8Rng, curve: &PlaneCurve) -> ChartPoint {
    let len = curve.total_length();
    let s = if curve.is_closed() { rng.gen_range(0.0..len) } else { rng.gen_range(0.1 * len..0.9 * len) };
    ChartPoint::new(s, rng.gen_range(0.3..2.0), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap()
}

/// Chart centred at arc length `s0`, so finite-difference steps in `s` do
/// not grow with the distance from the curve's start.
fn centred(s0: f64, q: &[f64; 3]) -> ChartPoint {
    ChartPoint { s: s0 + q[0], rho: q[1], phi: q[2] }
}

fn local(p: &ChartPoint) -> [f64; 3] {
    [0.0, p.rho, p.phi]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn ambient_christoffels_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
        let t = rng.gen_range(0.0..1.5);
        let g = ambient_metric(t);
        let p = AmbientPoint::new(x);
        let first = christoffels_first(&p, t).unwrap();
        let second = christoffels_second(&p, t).unwrap();
        let fd1 = fd_christoffels_first(&g, &x, STEP_FIRST).unwrap();
        let fd2 = fd_christoffels(&g, &x, STEP_FIRST).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert!(rel(first[i][j][k], fd1[i][j][k]) < 1e-7, "first {i}{j}{k} at {x:?}");
                    assert!(rel(second[k][i][j], fd2[k][i][j]) < 1e-7, "second {k}{i}{j} at {x:?}");
                }
            }
        }
    }
}

#[test]
fn ambient_metric_is_ricci_flat_and_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.2..1.2));
        let t = rng.gen_range(0.2..1.2);
        let g = ambient_metric(t);
        let ric = fd_ricci(&g, &x, STEP_SECOND).unwrap();
        assert!(ric.amax() < 1e-5, "fd ricci {} at {x:?}", ric.amax());
        let gamma = |y: &[f64; 4]| christoffels_second(&AmbientPoint::new(*y), t);
        let ric2 = ricci_from_christoffels(&gamma, &x, STEP_FIRST).unwrap();
        assert!(ric2.amax() < 1e-7, "closed-form ricci {}", ric2.amax());
        assert!(metric_compatibility_defect(&g, &gamma, &x, STEP_FIRST).unwrap() < 1e-8);
    }
}

#[test]
fn induced_metric_is_the_pullback() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for curve in curves() {
        for _ in 0..25 {
            let p = random_chart(&mut rng, &curve);
            let t = rng.gen_range(0.0..1.5);
            let emb = |q: &[f64; 3]| embed(&curve, &centred(p.s, q)).x;
            let fd: Mat<3> = fd_pullback_metric(&emb, &ambient_metric(t), &local(&p), STEP_FIRST);
            let h = induced_metric(&curve, t, &p).unwrap();
            let m = h.matrix();
            for i in 0..3 {
                for j in 0..3 {
                    assert!(rel(m[(i, j)], fd[(i, j)]) < 1e-8, "h{i}{j} {} vs {}", m[(i, j)], fd[(i, j)]);
                }
            }
            assert!(rel(m.determinant(), h.det_h) < 1e-10);
        }
    }
}

#[test]
fn frame_is_orthonormal_and_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for curve in curves() {
        for _ in 0..25 {
            let p = random_chart(&mut rng, &curve);
            let t = rng.gen_range(0.0..1.5);
            let h = induced_metric(&curve, t, &p).unwrap();
            let f = frame(&curve, t, &p).unwrap();
            assert!(f.d > 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    assert!((h.inner(&f.y[i], &f.y[j]) - delta).abs() < 1e-12);
                    let pairing: f64 = (0..3).map(|k| f.coframe[i][k] * f.y[j][k]).sum();
                    assert!((pairing - delta).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn cartan_structure_equations_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for curve in curves() {
        for _ in 0..8 {
            let p = random_chart(&mut rng, &curve);
            let t = rng.gen_range(0.1..1.5);
            let q = local(&p);
            let f = frame(&curve, t, &p).unwrap();
            let forms = connection(&curve, t, &p).unwrap().forms_on_frame();
            let conn_coord = |i: usize, j: usize| -> [f64; 3] {
                std::array::from_fn(|a| (0..3).map(|k| forms[i][j][k] * f.coframe[k][a]).sum())
            };
            for i in 0..3 {
                let w = |y: &[f64; 3]| frame(&curve, t, &centred(p.s, y)).unwrap().coframe[i];
                let dw = fd_exterior_derivative(&w, &q, STEP_FIRST);
                for a in 0..3 {
                    for b in 0..3 {
                        let mut rhs = 0.0;
                        for j in 0..3 {
                            let c = conn_coord(i, j);
                            rhs += c[a] * f.coframe[j][b] - c[b] * f.coframe[j][a];
                        }
                        assert!((dw[(a, b)] - rhs).abs() < 1e-5, "d omega^{i} ({a},{b}): {} vs {rhs}", dw[(a, b)]);
                    }
                }
            }
        }
    }
}

#[test]
fn frame_ricci_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for curve in curves() {
        for _ in 0..5 {
            let p = random_chart(&mut rng, &curve);
            let t = rng.gen_range(0.2..1.5);
            let h = |q: &[f64; 3]| induced_metric(&curve, t, &centred(p.s, q)).unwrap().matrix();
            let ric = fd_ricci(&h, &local(&p), STEP_SECOND).unwrap();
            let a = frame(&curve, t, &p).unwrap().matrix();
            let ric_frame: Matrix3<f64> = a * ric * a.transpose();
            let c = curvature(&curve, t, &p).unwrap();
            for i in 0..3 {
                assert!((ric_frame[(i, i)] - c.ric[i]).abs() < 1e-5, "Ric{i}{i} {} vs {} {:?} {p:?} t={t}", ric_frame[(i, i)], c.ric[i], curve.family());
                for j in 0..3 {
                    if i != j {
                        assert!(ric_frame[(i, j)].abs() < 1e-5, "Ric{i}{j} = {}", ric_frame[(i, j)]);
                    }
                }
            }
        }
    }
}

#[test]
fn unit_normal_is_unit_and_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for curve in curves() {
        for _ in 0..25 {
            let p = random_chart(&mut rng, &curve);
            let t = rng.gen_range(0.0..1.5);
            let n = unit_normal(&curve, t, &p).unwrap();
            let g = metric(&embed(&curve, &p), t).unwrap();
            assert!((g.inner(&n, &n) - 1.0).abs() < 1e-10);
            let emb = |q: &[f64; 3]| embed(&curve, &centred(p.s, q)).x;
            let tangents = ehgeom::oracle::fd_tangents(&emb, &local(&p), STEP_FIRST);
            for v in tangents {
                assert!(g.inner(&v, &n).abs() < 1e-10, "{} {:?} {p:?}", g.inner(&v, &n), curve.family());
            }
        }
    }
}

#[test]
fn second_form_matches_shape_operator_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for curve in curves() {
        for _ in 0..10 {
            let p = random_chart(&mut rng, &curve);
            let t = rng.gen_range(0.0..1.5);
            let chart = |q: &[f64; 3]| centred(p.s, q);
            let emb = |q: &[f64; 3]| embed(&curve, &chart(q)).x;
            let nrm = |q: &[f64; 3]| unit_normal(&curve, t, &chart(q)).unwrap();
            let gamma = |x: &[f64; 4]| christoffels_second(&AmbientPoint::new(*x), t);
            let fd = fd_shape_operator(&emb, &nrm, &ambient_metric(t), &gamma, &local(&p), STEP_FIRST).unwrap();
            let sf = second_form(&curve, t, &p).unwrap();
            let scale = 1.0 + sf.ii_coord.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..3 {
                for j in 0..3 {
                    assert!((sf.ii_coord[i][j] - fd[(i, j)]).abs() < 1e-5 * scale, "II{i}{j} {} vs {}", sf.ii_coord[i][j], fd[(i, j)]);
                }
            }
        }
    }
}
