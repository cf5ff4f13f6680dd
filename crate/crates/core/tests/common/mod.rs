//! Independent oracles shared by the integration tests. Nothing here calls the
//! library's eigensolvers.

#![allow(dead_code)]

use cfslab::linalg::{CMat, C64};

/// Characteristic polynomial coefficients `c[0] + c[1] l + ... + l^n` of
/// `det(l I - M)` by the Faddeev-LeVerrier recursion.
pub fn char_poly(m: &CMat) -> Vec<C64> {
    let n = m.rows();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let mut mk = CMat::zeros(n, n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1];
        // M_k = A M_{k-1} + c_{n-k+1} I,  c_{n-k} = -tr(A M_k) / k
        let mut base = m.matmul(&mk);
        for i in 0..n {
            base[(i, i)] += prev;
        }
        let t = m.matmul(&base);
        coeffs[n - k] = -t.trace() / k as f64;
        mk = base;
    }
    coeffs
}

fn horner(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Simultaneous root finding (Aberth-Ehrlich).
pub fn poly_roots(c: &[C64]) -> Vec<C64> {
    let n = c.len() - 1;
    let bound = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(0.5 * bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| C64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    z
}

/// Gauss-Jordan inverse written independently of the library's LU.
pub fn gj_inverse(m: &CMat) -> Option<CMat> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = CMat::identity(n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap())?;
        if a[(piv, col)].norm() == 0.0 {
            return None;
        }
        for j in 0..n {
            let t = a[(col, j)];
            a[(col, j)] = a[(piv, j)];
            a[(piv, j)] = t;
            let t = inv[(col, j)];
            inv[(col, j)] = inv[(piv, j)];
            inv[(piv, j)] = t;
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[(i, col)];
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}

/// Eigenvalues as roots of `det(M - l I)`: polynomial roots polished by Newton
/// steps on the log-determinant, `l <- l + 1 / tr((M - l I)^{-1})`.
pub fn eigen_oracle(m: &CMat) -> Vec<C64> {
    let n = m.rows();
    let roots = poly_roots(&char_poly(m));
    roots
        .into_iter()
        .map(|mut l| {
            for _ in 0..3 {
                let mut a = m.clone();
                for i in 0..n {
                    a[(i, i)] -= l;
                }
                match gj_inverse(&a) {
                    Some(inv) => {
                        let t = inv.trace();
                        if t.norm() == 0.0 || !t.norm().is_finite() {
                            break;
                        }
                        let step = C64::new(1.0, 0.0) / t;
                        if step.norm() > 1e-6 * (1.0 + l.norm()) {
                            break;
                        }
                        l += step;
                    }
                    None => break,
                }
            }
            l
        })
        .collect()
}

/// Largest distance in an optimal-by-greedy matching of two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets differ in size");
    let mut used = vec![false; b.len()];
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut done = vec![false; a.len()];
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !done[i] && !used[j] {
            done[i] = true;
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Drop the values of smallest modulus until `keep` remain.
pub fn largest(values: &[C64], keep: usize) -> Vec<C64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    v.truncate(keep);
    v
}

/// Smooth matrix family A0 + sin(w t) A1 + t^2 A2 with Frobenius norms
/// scaled so that max ||F|| on [0, 1] stays below `strength`.
pub struct SmoothPath {
    pub a: [CMat; 3],
    pub w: f64,
}

impl SmoothPath {
    pub fn random<R: rand::Rng>(g: &mut R, dim: usize, strength: f64) -> Self {
        let a: [CMat; 3] = std::array::from_fn(|_| {
            let m = cfslab::random::gaussian_matrix(g, dim, dim);
            let n = m.norm_fro();
            m.scale_re(strength / (3.0 * n))
        });
        SmoothPath { a, w: cfslab::random::uniform(g, 0.5, 3.0) }
    }
}

impl cfslab::lightcone::MatrixPath for SmoothPath {
    fn dim(&self) -> usize {
        self.a[0].rows()
    }
    fn at(&self, t: f64) -> CMat {
        let mut m = self.a[0].clone();
        m.axpy(C64::new((self.w * t).sin(), 0.0), &self.a[1]);
        m.axpy(C64::new(t * t, 0.0), &self.a[2]);
        m
    }
}

/// Adaptive Simpson quadrature on [a, b].
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Eigenpairs of a Hermitian matrix by cyclic Jacobi rotations on its real
/// 2n x 2n embedding [[Re, -Im], [Im, Re]]. Every eigenvalue appears twice.
pub fn jacobi_real_embedding(m: &CMat) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.rows();
    let d = 2 * n;
    let mut a = vec![vec![0.0; d]; d];
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..d).map(|i| a[i][i]).collect();
    let vectors = (0..d).map(|j| (0..d).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// sum over eigenvalues l with keep(l) of f(l) Pi_l, read back from the real embedding.
pub fn hermitian_spectral_sum(m: &CMat, keep: impl Fn(f64) -> bool, f: impl Fn(f64) -> f64) -> CMat {
    let n = m.rows();
    let (vals, vecs) = jacobi_real_embedding(m);
    let mut out = CMat::zeros(n, n);
    for (l, w) in vals.iter().zip(&vecs) {
        if keep(*l) {
            let s = f(*l);
            for i in 0..n {
                for j in 0..n {
                    // top-left block + i * bottom-left block of w w^T
                    out[(i, j)] += C64::new(s * w[i] * w[j], s * w[i + n] * w[j]);
                }
            }
        }
    }
    out
}
