//! Finite-difference tensor calculus.
//!
//! Every routine here works from raw evaluations of a metric, an embedding or
//! a scalar function supplied as a closure, and never calls the closed-form
//! geometry of the other modules. Derivatives are central differences with
//! one Richardson step, so the truncation error is `O(h^4)`.

use nalgebra::SMatrix;

use crate::error::{GeomError, Result};

/// Square matrix of size `N`.
pub type Mat<const N: usize> = SMatrix<f64, N, N>;

/// Rank-3 array indexed `[i][j][k]`.
pub type Tensor3<const N: usize> = [[[f64; N]; N]; N];

/// Rank-4 array indexed `[a][b][c][d]`.
pub type Tensor4r<const N: usize> = [[[[f64; N]; N]; N]; N];

/// Default relative step for first derivatives.
pub const STEP_FIRST: f64 = 1e-3;
/// Default relative step for the outer derivative of nested differences.
pub const STEP_SECOND: f64 = 1e-2;

fn step_for(x: f64, h: f64) -> f64 {
    h * x.abs().max(1.0)
}

fn shifted<const N: usize>(x: &[f64; N], idx: usize, delta: f64) -> [f64; N] {
    let mut y = *x;
    y[idx] += delta;
    y
}

/// Richardson-extrapolated central difference of any linear-space valued
/// function along coordinate `idx` with absolute step `h`.
fn richardson<const N: usize, T, F>(f: &F, x: &[f64; N], idx: usize, h: f64) -> T
where
    F: Fn(&[f64; N]) -> T,
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let d1 = (f(&shifted(x, idx, h)) - f(&shifted(x, idx, -h))) * (0.5 / h);
    let h2 = 0.5 * h;
    let d2 = (f(&shifted(x, idx, h2)) - f(&shifted(x, idx, -h2))) * (0.5 / h2);
    d2 * (4.0 / 3.0) + d1 * (-1.0 / 3.0)
}

/// Partial derivative of a scalar function along coordinate `index`, with
/// step `h * max(1, |x_index|)`.
pub fn fd_partial<const N: usize, F>(f: F, x: &[f64; N], index: usize, h: f64) -> f64
where
    F: Fn(&[f64; N]) -> f64,
{
    richardson(&f, x, index, step_for(x[index], h))
}

/// Partial derivative of a matrix-valued function.
pub fn fd_partial_matrix<const N: usize, const M: usize, F>(f: &F, x: &[f64; N], index: usize, h: f64) -> Mat<M>
where
    F: Fn(&[f64; N]) -> Mat<M>,
{
    richardson(f, x, index, step_for(x[index], h))
}

/// Partial derivative of a vector-valued function.
pub fn fd_partial_vector<const N: usize, const M: usize, F>(f: &F, x: &[f64; N], index: usize, h: f64) -> [f64; M]
where
    F: Fn(&[f64; N]) -> [f64; M],
{
    let g = |y: &[f64; N]| nalgebra::SVector::<f64, M>::from(f(y));
    let d: nalgebra::SVector<f64, M> = richardson(&g, x, index, step_for(x[index], h));
    d.into()
}

fn spd_determinant<const N: usize>(g: &Mat<N>) -> Option<f64> {
    let l = g.cholesky()?.unpack();
    Some((0..N).map(|i| l[(i, i)] * l[(i, i)]).product())
}

fn check_metric<const N: usize>(g: &Mat<N>) -> Result<Mat<N>> {
    if g.cholesky().is_none() {
        return Err(GeomError::Domain("metric is not positive definite".into()));
    }
    g.try_inverse().ok_or_else(|| GeomError::Domain("metric is singular".into()))
}

/// First-kind symbols `[i][j][k] = (d_j g_ik + d_i g_jk - d_k g_ij) / 2`.
pub fn fd_christoffels_first<const N: usize, F>(metric: &F, x: &[f64; N], h: f64) -> Result<Tensor3<N>>
where
    F: Fn(&[f64; N]) -> Mat<N>,
{
    check_metric(&metric(x))?;
    let dg: Vec<Mat<N>> = (0..N).map(|k| fd_partial_matrix(metric, x, k, h)).collect();
    let mut out = [[[0.0; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                out[i][j][k] = 0.5 * (dg[j][(i, k)] + dg[i][(j, k)] - dg[k][(i, j)]);
            }
        }
    }
    Ok(out)
}

/// Second-kind symbols `[k][i][j] = Gamma^k_{ij}`.
pub fn fd_christoffels<const N: usize, F>(metric: &F, x: &[f64; N], h: f64) -> Result<Tensor3<N>>
where
    F: Fn(&[f64; N]) -> Mat<N>,
{
    let g_inv = check_metric(&metric(x))?;
    let first = fd_christoffels_first(metric, x, h)?;
    let mut out = [[[0.0; N]; N]; N];
    for k in 0..N {
        for i in 0..N {
            for j in 0..N {
                out[k][i][j] = (0..N).map(|l| g_inv[(k, l)] * first[i][j][l]).sum();
            }
        }
    }
    Ok(out)
}

fn tensor3_as_vec<const N: usize>(t: &Tensor3<N>) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}

/// Riemann tensor `[a][b][c][d] = R^a_{bcd}` from a Christoffel field,
/// `R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}`.
pub fn riemann_from_christoffels<const N: usize, F>(gamma: &F, x: &[f64; N], h: f64) -> Result<Tensor4r<N>>
where
    F: Fn(&[f64; N]) -> Result<Tensor3<N>>,
{
    let g0 = gamma(x)?;
    let mut dgam: Vec<Vec<f64>> = Vec::with_capacity(N);
    for c in 0..N {
        let hc = step_for(x[c], h);
        let eval = |d: f64| -> Result<Vec<f64>> { Ok(tensor3_as_vec(&gamma(&shifted(x, c, d))?)) };
        let (p1, m1, p2, m2) = (eval(hc)?, eval(-hc)?, eval(0.5 * hc)?, eval(-0.5 * hc)?);
        let d: Vec<f64> = (0..p1.len())
            .map(|i| {
                let d1 = (p1[i] - m1[i]) / (2.0 * hc);
                let d2 = (p2[i] - m2[i]) / hc;
                (4.0 * d2 - d1) / 3.0
            })
            .collect();
        dgam.push(d);
    }
    let at = |c: usize, a: usize, i: usize, j: usize| dgam[c][(a * N + i) * N + j];
    let mut r = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut v = at(c, a, d, b) - at(d, a, c, b);
                    for e in 0..N {
                        v += g0[a][c][e] * g0[e][d][b] - g0[a][d][e] * g0[e][c][b];
                    }
                    r[a][b][c][d] = v;
                }
            }
        }
    }
    Ok(r)
}

/// Ricci tensor `R_{bd} = R^a_{bad}` from a Christoffel field.
pub fn ricci_from_christoffels<const N: usize, F>(gamma: &F, x: &[f64; N], h: f64) -> Result<Mat<N>>
where
    F: Fn(&[f64; N]) -> Result<Tensor3<N>>,
{
    let r = riemann_from_christoffels(gamma, x, h)?;
    Ok(contract_ricci(&r))
}

fn contract_ricci<const N: usize>(r: &Tensor4r<N>) -> Mat<N> {
    Mat::<N>::from_fn(|b, d| (0..N).map(|a| r[a][b][a][d]).sum())
}

/// Riemann tensor of a metric by nested finite differences.
pub fn fd_riemann<const N: usize, F>(metric: &F, x: &[f64; N], h: f64) -> Result<Tensor4r<N>>
where
    F: Fn(&[f64; N]) -> Mat<N>,
{
    let inner = h * STEP_FIRST / STEP_SECOND;
    let gamma = |y: &[f64; N]| fd_christoffels(metric, y, inner);
    riemann_from_christoffels(&gamma, x, h)
}

/// Ricci tensor of a metric by nested finite differences.
pub fn fd_ricci<const N: usize, F>(metric: &F, x: &[f64; N], h: f64) -> Result<Mat<N>>
where
    F: Fn(&[f64; N]) -> Mat<N>,
{
    Ok(contract_ricci(&fd_riemann(metric, x, h)?))
}

/// Largest cyclic sum `R^a_{bcd} + R^a_{cdb} + R^a_{dbc}`.
pub fn bianchi_defect<const N: usize>(r: &Tensor4r<N>) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    worst = worst.max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                }
            }
        }
    }
    worst
}

/// Largest component of `nabla_k g_ij = d_k g_ij - G^l_{ki} g_lj - G^l_{kj} g_il`.
pub fn metric_compatibility_defect<const N: usize, F, C>(metric: &F, gamma: &C, x: &[f64; N], h: f64) -> Result<f64>
where
    F: Fn(&[f64; N]) -> Mat<N>,
    C: Fn(&[f64; N]) -> Result<Tensor3<N>>,
{
    let g = metric(x);
    let gam = gamma(x)?;
    let mut worst: f64 = 0.0;
    for k in 0..N {
        let dg = fd_partial_matrix(metric, x, k, h);
        for i in 0..N {
            for j in 0..N {
                let mut v = dg[(i, j)];
                for l in 0..N {
                    v -= gam[l][k][i] * g[(l, j)] + gam[l][k][j] * g[(i, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Tangent vectors `d Psi / d q_i` of an embedding.
pub fn fd_tangents<const M: usize, const A: usize, E>(embedding: &E, q: &[f64; M], h: f64) -> [[f64; A]; M]
where
    E: Fn(&[f64; M]) -> [f64; A],
{
    let mut out = [[0.0; A]; M];
    for (i, row) in out.iter_mut().enumerate() {
        *row = fd_partial_vector(embedding, q, i, h);
    }
    out
}

fn inner<const A: usize>(g: &Mat<A>, a: &[f64; A], b: &[f64; A]) -> f64 {
    let mut s = 0.0;
    for i in 0..A {
        for j in 0..A {
            s += a[i] * g[(i, j)] * b[j];
        }
    }
    s
}

/// Pullback metric `g(Psi_* d_i, Psi_* d_j)` of an embedding.
pub fn fd_pullback_metric<const M: usize, const A: usize, E, G>(embedding: &E, metric: &G, q: &[f64; M], h: f64) -> Mat<M>
where
    E: Fn(&[f64; M]) -> [f64; A],
    G: Fn(&[f64; A]) -> Mat<A>,
{
    let tangents = fd_tangents(embedding, q, h);
    let g = metric(&embedding(q));
    Mat::<M>::from_fn(|i, j| inner(&g, &tangents[i], &tangents[j]))
}

/// Second fundamental form `II_ij = g(Psi_* d_i, nabla_{d_j} N)` with the
/// ambient covariant derivative assembled from finite differences of the
/// normal field and the supplied ambient Christoffel symbols.
pub fn fd_shape_operator<const M: usize, const A: usize, E, Nf, G, C>(
    embedding: &E,
    normal: &Nf,
    metric: &G,
    christoffel: &C,
    q: &[f64; M],
    h: f64,
) -> Result<Mat<M>>
where
    E: Fn(&[f64; M]) -> [f64; A],
    Nf: Fn(&[f64; M]) -> [f64; A],
    G: Fn(&[f64; A]) -> Mat<A>,
    C: Fn(&[f64; A]) -> Result<Tensor3<A>>,
{
    let x = embedding(q);
    let g = metric(&x);
    let gam = christoffel(&x)?;
    let n = normal(q);
    let tangents = fd_tangents(embedding, q, h);
    let mut out = Mat::<M>::zeros();
    for j in 0..M {
        let dn = fd_partial_vector(normal, q, j, h);
        let mut cov = [0.0; A];
        for a in 0..A {
            let mut v = dn[a];
            for b in 0..A {
                for c in 0..A {
                    v += gam[a][b][c] * tangents[j][b] * n[c];
                }
            }
            cov[a] = v;
        }
        for i in 0..M {
            out[(i, j)] = inner(&g, &tangents[i], &cov);
        }
    }
    Ok(out)
}

/// Divergence `(1/sqrt g) d_i (sqrt g V^i)` of a vector field.
pub fn fd_divergence<const N: usize, V, G>(field: &V, metric: &G, x: &[f64; N], h: f64) -> Result<f64>
where
    V: Fn(&[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> Mat<N>,
{
    let det0 = spd_determinant(&metric(x))
        .ok_or_else(|| GeomError::Domain("metric is not positive definite".into()))?;
    let mut div = 0.0;
    for i in 0..N {
        let flux = |y: &[f64; N]| spd_determinant(&metric(y)).unwrap_or(0.0).sqrt() * field(y)[i];
        div += fd_partial(flux, x, i, h);
    }
    Ok(div / det0.sqrt())
}

/// Laplacian with the positive sign convention,
/// `Delta f = -(1/sqrt g) d_i (sqrt g g^{ij} d_j f)`.
pub fn fd_laplacian<const N: usize, F, G>(f: &F, metric: &G, x: &[f64; N], h: f64) -> Result<f64>
where
    F: Fn(&[f64; N]) -> f64,
    G: Fn(&[f64; N]) -> Mat<N>,
{
    let inner_h = h * STEP_FIRST / STEP_SECOND;
    let grad = |y: &[f64; N]| -> [f64; N] {
        let g_inv = metric(y).try_inverse().unwrap_or_else(Mat::<N>::zeros);
        let df: Vec<f64> = (0..N).map(|j| fd_partial(f, y, j, inner_h)).collect();
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| g_inv[(i, j)] * df[j]).sum();
        }
        out
    };
    Ok(-fd_divergence(&grad, metric, x, h)?)
}

/// Exterior derivative of a one-form, `(d w)_{ab} = d_a w_b - d_b w_a`.
pub fn fd_exterior_derivative<const N: usize, W>(form: &W, x: &[f64; N], h: f64) -> Mat<N>
where
    W: Fn(&[f64; N]) -> [f64; N],
{
    let d: Vec<[f64; N]> = (0..N).map(|a| fd_partial_vector(form, x, a, h)).collect();
    Mat::<N>::from_fn(|a, b| d[a][b] - d[b][a])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polar(x: &[f64; 2]) -> Mat<2> {
        Mat::<2>::new(1.0, 0.0, 0.0, x[0] * x[0])
    }

    fn round_sphere(x: &[f64; 2]) -> Mat<2> {
        let s = x[0].sin();
        Mat::<2>::new(1.0, 0.0, 0.0, s * s)
    }

    #[test]
    fn partial_of_square() {
        assert!((fd_partial(|x: &[f64; 1]| x[0] * x[0], &[1.0], 0, 1e-3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let flat = |_: &[f64; 3]| Mat::<3>::identity();
        let g = fd_christoffels(&flat, &[0.3, 1.0, -2.0], STEP_FIRST).unwrap();
        assert!(g.iter().flatten().flatten().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn polar_christoffels() {
        let g = fd_christoffels(&polar, &[2.0, 0.3], STEP_FIRST).unwrap();
        assert!((g[0][1][1] + 2.0).abs() < 1e-10);
        assert!((g[1][0][1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn sphere_ricci_and_bianchi() {
        let x = [0.9, 0.2];
        let ric = fd_ricci(&round_sphere, &x, STEP_SECOND).unwrap();
        let g = round_sphere(&x);
        for i in 0..2 {
            for j in 0..2 {
                assert!((ric[(i, j)] - g[(i, j)]).abs() < 1e-6);
            }
        }
        let r = fd_riemann(&round_sphere, &x, STEP_SECOND).unwrap();
        assert!(bianchi_defect(&r) < 1e-6);
        let flat = fd_ricci(&polar, &[1.5, 0.4], STEP_SECOND).unwrap();
        assert!(flat.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn sphere_shape_operator_in_flat_space() {
        let radius = 2.0;
        let emb = |q: &[f64; 2]| [radius * q[0].sin() * q[1].cos(), radius * q[0].sin() * q[1].sin(), radius * q[0].cos()];
        let nrm = |q: &[f64; 2]| [q[0].sin() * q[1].cos(), q[0].sin() * q[1].sin(), q[0].cos()];
        let flat = |_: &[f64; 3]| Mat::<3>::identity();
        let zero = |_: &[f64; 3]| Ok([[[0.0; 3]; 3]; 3]);
        let q = [1.1, 0.4];
        let ii = fd_shape_operator(&emb, &nrm, &flat, &zero, &q, STEP_FIRST).unwrap();
        let h = fd_pullback_metric(&emb, &flat, &q, STEP_FIRST);
        for i in 0..2 {
            for j in 0..2 {
                assert!((ii[(i, j)] - h[(i, j)] / radius).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn laplacian_in_polar_coordinates() {
        let f = |x: &[f64; 2]| x[0] * x[0];
        let lap = fd_laplacian(&f, &polar, &[1.3, 0.2], STEP_SECOND).unwrap();
        assert!((lap + 4.0).abs() < 1e-8);
    }

    #[test]
    fn non_positive_metric_is_rejected() {
        let bad = |_: &[f64; 2]| Mat::<2>::new(1.0, 0.0, 0.0, -1.0);
        assert!(fd_christoffels(&bad, &[0.0, 0.0], STEP_FIRST).is_err());
    }

    #[test]
    fn richardson_convergence_order() {
        let g = |x: &[f64; 2]| Mat::<2>::new(1.0, 0.0, 0.0, x[0].sin().powi(2) * (1.0 + x[0]).exp());
        let r = 0.7f64;
        let exact = -0.5 * (2.0 * r.sin() * r.cos() + r.sin().powi(2)) * (1.0 + r).exp();
        let e1 = (fd_christoffels(&g, &[0.7, 0.0], 0.2).unwrap()[0][1][1] - exact).abs();
        let e2 = (fd_christoffels(&g, &[0.7, 0.0], 0.1).unwrap()[0][1][1] - exact).abs();
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }
}
