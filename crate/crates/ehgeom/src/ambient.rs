//! The Eguchi-Hanson metric `g_t` in the real coordinates `(x1, x2, x3, x4)`.
//!
//! The metric is assembled from the scalar potentials `G`, `H`, `K` of
//! `u1 = |x|^2`. Christoffel symbols of both kinds are generated from a
//! handful of base symbols by the index relations of the coordinate pairs
//! `(x1, x2)` and `(x3, x4)`; the generation tables are checked against the
//! finite-difference oracle in the test suite.

use crate::error::{GeomError, Result};

/// Rank-3 array indexed `[i][j][k]`.
pub type Tensor4 = [[[f64; 4]; 4]; 4];

/// Point of the ambient chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    pub x: [f64; 4],
}

impl AmbientPoint {
    /// Wraps coordinates.
    pub fn new(x: [f64; 4]) -> Self {
        Self { x }
    }

    /// Squared Euclidean norm `u1`.
    pub fn u1(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    /// Point with the coordinate pairs exchanged, `(x3, x4, x1, x2)`.
    pub fn swapped(&self) -> Self {
        let [a, b, c, d] = self.x;
        Self { x: [c, d, a, b] }
    }
}

/// Scalar potentials of the metric at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials {
    pub t: f64,
    pub u1: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
    pub i: f64,
    pub c: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

fn check_domain(p: &AmbientPoint, t: f64) -> Result<f64> {
    let u1 = p.u1();
    if !(u1 > 0.0) || !u1.is_finite() {
        return Err(GeomError::Domain(format!("u1 must be positive, got {u1}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(GeomError::Domain(format!("t must be nonnegative, got {t}")));
    }
    Ok(u1)
}

/// `G`, `H`, `K` and `I` as functions of `u1` alone.
pub fn radial_potentials(u1: f64, t: f64) -> (f64, f64, f64, f64) {
    let t4 = t.powi(4);
    let w = u1 * u1 + t4;
    let sw = w.sqrt();
    let g = 2.0 * sw / u1;
    let h = 2.0 * t4 / (u1 * u1 * sw);
    let k = 2.0 * u1 / sw;
    let i = 2.0 * t4 * (3.0 * u1 * u1 + 2.0 * t4) / (u1.powi(3) * w * sw);
    (g, h, k, i)
}

/// Evaluates all potentials at `p`.
pub fn potentials(p: &AmbientPoint, t: f64) -> Result<Potentials> {
    let u1 = check_domain(p, t)?;
    let (g, h, k, i) = radial_potentials(u1, t);
    let [x1, x2, x3, x4] = p.x;
    let pp = x1 * x1 + x2 * x2;
    let qq = x3 * x3 + x4 * x4;
    let a1 = 0.5 * h * h * qq - 0.25 * g * (2.0 * h - i * pp);
    let a2 = 0.5 * h * h * pp - 0.25 * g * (2.0 * h - i * qq);
    let b1 = 0.25 * (g * (h - i * pp) + h * h * (pp - qq));
    let b2 = 0.25 * (g * (h - i * qq) + h * h * (qq - pp));
    let c = i * g - 2.0 * h * h;
    Ok(Potentials { t, u1, g, h, k, i, c, a1, a2, b1, b2 })
}

/// Metric matrix and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientMetric {
    pub g: [[f64; 4]; 4],
    pub g_inv: [[f64; 4]; 4],
}

impl AmbientMetric {
    /// Determinant of `g` by cofactor expansion.
    pub fn det(&self) -> f64 {
        det4(&self.g)
    }

    /// `g(a, b)`.
    pub fn inner(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += a[i] * self.g[i][j] * b[j];
            }
        }
        s
    }
}

/// Determinant of a 4x4 matrix.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut det = 0.0;
    for c in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for k in 0..4 {
                if k != c {
                    minor[r - 1][cc] = m[r][k];
                    cc += 1;
                }
            }
        }
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m[0][c] * d3;
    }
    det
}

/// Metric `g_t` and its closed-form inverse at `p`.
pub fn metric(p: &AmbientPoint, t: f64) -> Result<AmbientMetric> {
    let u1 = check_domain(p, t)?;
    let (g, h, _, _) = radial_potentials(u1, t);
    let [x1, x2, x3, x4] = p.x;
    let g1 = g - h * (x1 * x1 + x2 * x2);
    let g2 = g - h * (x3 * x3 + x4 * x4);
    let g3 = h * (x1 * x4 - x2 * x3);
    let g4 = h * (x1 * x3 + x2 * x4);
    let gm = [
        [g1, 0.0, -g4, -g3],
        [0.0, g1, g3, -g4],
        [-g4, g3, g2, 0.0],
        [-g3, -g4, 0.0, g2],
    ];
    let q = 0.25;
    let gi = [
        [q * g2, 0.0, q * g4, q * g3],
        [0.0, q * g2, -q * g3, q * g4],
        [q * g4, -q * g3, q * g1, 0.0],
        [q * g3, q * g4, 0.0, q * g1],
    ];
    Ok(AmbientMetric { g: gm, g_inv: gi })
}

/// Partner index in the other coordinate pair, `1 <-> 3`, `2 <-> 4` (0-based).
fn bar(k: usize) -> usize {
    (k + 2) % 4
}

/// Base symbols of the first kind `Gamma_{11k}` and `Gamma_{13k}` (`k = 1, 2`).
fn first_base(p: &AmbientPoint, t: f64) -> Result<([f64; 4], [f64; 2])> {
    let pot = potentials(p, t)?;
    let [x1, x2, x3, x4] = p.x;
    let (h, i) = (pot.h, pot.i);
    let pp = x1 * x1 + x2 * x2;
    let g11 = [
        -x1 * (2.0 * h - i * pp),
        x2 * (2.0 * h - i * pp),
        2.0 * i * (x1 * x2 * x4 + 0.5 * x3 * (x1 * x1 - x2 * x2)),
        -2.0 * i * (x1 * x2 * x3 + 0.5 * x4 * (x2 * x2 - x1 * x1)),
    ];
    let g13 = [-x3 * (h - i * pp), x4 * (h - i * pp)];
    Ok((g11, g13))
}

/// Index shift inside a coordinate pair: an even (1-based) index `k` takes
/// the source value at `k - 1`, an odd one minus the source value at `k + 1`.
fn shifted(src: &[f64; 4], k: usize) -> f64 {
    if k % 2 == 1 {
        src[k - 1]
    } else {
        -src[k + 1]
    }
}

/// Christoffel symbols of the first kind, `[i][j][k] = Gamma_{ijk}` with the
/// last index lowered: `Gamma_{ijk} = (d_j g_ik + d_i g_jk - d_k g_ij) / 2`.
pub fn christoffels_first(p: &AmbientPoint, t: f64) -> Result<Tensor4> {
    let (b11, b13) = first_base(p, t)?;
    let (s11, s13) = first_base(&p.swapped(), t)?;
    let mut g11 = [0.0; 4];
    let mut g33 = [0.0; 4];
    let mut g13 = [0.0; 4];
    for k in 0..4 {
        g11[k] = b11[k];
        g33[bar(k)] = s11[k];
    }
    g13[0] = b13[0];
    g13[1] = b13[1];
    g13[2] = s13[0];
    g13[3] = s13[1];
    let mut g12 = [0.0; 4];
    let mut g14 = [0.0; 4];
    let mut g34 = [0.0; 4];
    for k in 0..4 {
        g12[k] = shifted(&g11, k);
        g14[k] = shifted(&g13, k);
        g34[k] = shifted(&g33, k);
    }
    let mut out = [[[0.0; 4]; 4]; 4];
    let mut put = |i: usize, j: usize, vals: [f64; 4]| {
        out[i][j] = vals;
        out[j][i] = vals;
    };
    let neg = |v: [f64; 4]| v.map(|x| -x);
    put(0, 0, g11);
    put(0, 1, g12);
    put(0, 2, g13);
    put(0, 3, g14);
    put(1, 1, neg(g11));
    put(1, 2, g14);
    put(1, 3, neg(g13));
    put(2, 2, g33);
    put(2, 3, g34);
    put(3, 3, neg(g33));
    Ok(out)
}

/// Christoffel symbols of the second kind, `[k][i][j] = Gamma^k_{ij}`.
pub fn christoffels_second(p: &AmbientPoint, t: f64) -> Result<Tensor4> {
    let pot = potentials(p, t)?;
    let [x1, x2, x3, x4] = p.x;
    let c2 = 0.5 * pot.c;
    let u11 = [
        x1 * pot.a1,
        -x2 * pot.a1,
        c2 * (x1 * x2 * x4 + 0.5 * x3 * (x1 * x1 - x2 * x2)),
        -c2 * (x1 * x2 * x3 + 0.5 * x4 * (x2 * x2 - x1 * x1)),
    ];
    let u33 = [
        c2 * (x2 * x3 * x4 + 0.5 * x1 * (x3 * x3 - x4 * x4)),
        -c2 * (x1 * x3 * x4 + 0.5 * x2 * (x4 * x4 - x3 * x3)),
        x3 * pot.a2,
        -x4 * pot.a2,
    ];
    let u13 = [-x3 * pot.b1, x4 * pot.b1, -x1 * pot.b2, x2 * pot.b2];
    let mut u12 = [0.0; 4];
    let mut u14 = [0.0; 4];
    let mut u34 = [0.0; 4];
    for k in 0..4 {
        u12[k] = shifted(&u11, k);
        u14[k] = shifted(&u13, k);
        u34[k] = shifted(&u33, k);
    }
    let neg = |v: [f64; 4]| v.map(|x| -x);
    let pairs: [((usize, usize), [f64; 4]); 10] = [
        ((0, 0), u11),
        ((0, 1), u12),
        ((0, 2), u13),
        ((0, 3), u14),
        ((1, 1), neg(u11)),
        ((1, 2), u14),
        ((1, 3), neg(u13)),
        ((2, 2), u33),
        ((2, 3), u34),
        ((3, 3), neg(u33)),
    ];
    let mut out = [[[0.0; 4]; 4]; 4];
    for ((i, j), vals) in pairs {
        for k in 0..4 {
            out[k][i][j] = vals[k];
            out[k][j][i] = vals[k];
        }
    }
    Ok(out)
}

/// Raises the last index of first-kind symbols with `g^{-1}`.
pub fn raise_last(first: &Tensor4, g_inv: &[[f64; 4]; 4]) -> Tensor4 {
    let mut out = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                out[k][i][j] = (0..4).map(|l| g_inv[k][l] * first[i][j][l]).sum();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potentials_at_u1_two() {
        let p = AmbientPoint::new([1.0, 0.0, 1.0, 0.0]);
        let pot = potentials(&p, 1.0).unwrap();
        assert!((pot.g - 5f64.sqrt()).abs() < 1e-14);
        assert!((pot.h - 1.0 / (2.0 * 5f64.sqrt())).abs() < 1e-14);
        assert!((pot.k - 4.0 / 5f64.sqrt()).abs() < 1e-14);
        assert!((pot.g * pot.k - 4.0).abs() < 1e-12);
        assert!((pot.k - (pot.g - pot.h * pot.u1)).abs() < 1e-12);
    }

    #[test]
    fn flat_limit_at_t_zero() {
        let p = AmbientPoint::new([0.3, -1.2, 0.5, 2.0]);
        let pot = potentials(&p, 0.0).unwrap();
        assert_eq!((pot.g, pot.h, pot.k, pot.i), (2.0, 0.0, 2.0, 0.0));
        let m = metric(&p, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.g[i][j], if i == j { 2.0 } else { 0.0 });
            }
        }
        let c = christoffels_second(&p, 0.0).unwrap();
        assert!(c.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn g4_entry_example() {
        let p = AmbientPoint::new([1.0, 0.0, 1.0, 0.0]);
        let m = metric(&p, 1.0).unwrap();
        assert!((-m.g[0][2] - 1.0 / (2.0 * 5f64.sqrt())).abs() < 1e-15);
        assert!((m.det() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn origin_is_rejected() {
        assert!(potentials(&AmbientPoint::new([0.0; 4]), 1.0).is_err());
        assert!(metric(&AmbientPoint::new([1.0, 0.0, 0.0, 0.0]), -1.0).is_err());
    }

    #[test]
    fn second_kind_equals_raised_first_kind() {
        let p = AmbientPoint::new([0.4, -0.7, 1.1, 0.2]);
        let t = 1.3;
        let m = metric(&p, t).unwrap();
        let raised = raise_last(&christoffels_first(&p, t).unwrap(), &m.g_inv);
        let second = christoffels_second(&p, t).unwrap();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert!((raised[k][i][j] - second[k][i][j]).abs() < 1e-12);
                }
            }
        }
    }
}
