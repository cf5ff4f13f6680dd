//! Dense eigenvalue routines.
//!
//! General matrices go through Householder reduction to Hessenberg form and a
//! single-shift complex QR iteration. Hermitian matrices go through
//! tridiagonalization and implicit QL, which also yields orthonormal
//! eigenvectors.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::{norm, CMat, C64, ONE, ZERO};

/// Largest dimension accepted by the general eigensolver.
pub const MAX_DENSE_DIM: usize = 256;

/// Relative residual above which `eigenvalues_dense` reports failure.
pub const EIG_RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalues with the worst relative residual `|Mv - lv| / |M|` over the
/// computed pairs.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<C64>,
    pub residual: f64,
}

/// Orthonormal eigendecomposition of a Hermitian matrix, ascending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Numbers of eigenvalues above `+tau |M|` and below `-tau |M|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    pub fn rank(&self) -> usize {
        self.positive + self.negative
    }
}

pub fn compare_complex(a: &C64, b: &C64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// All eigenvalues of a square matrix, sorted by (real, imaginary) part,
/// together with a residual check through inverse iteration.
pub fn eigenvalues_dense(m: &CMat) -> Result<Spectrum> {
    let values = eigenvalues(m)?;
    let residual = eigen_residual(m, &values);
    if residual > EIG_RESIDUAL_TOL {
        return Err(Error::NoConvergence { iterations: 0, residual });
    }
    Ok(Spectrum { values, residual })
}

/// Eigenvalues only, sorted by (real, imaginary) part. No residual check.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n > MAX_DENSE_DIM {
        return Err(Error::DimensionCap { dim: n, cap: MAX_DENSE_DIM });
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let mut vals = match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let (l1, l2) = eig2(a, b, c, d);
            vec![l1, l2]
        }
        _ => {
            let mut h = hessenberg(m);
            hessenberg_qr(&mut h)?
        }
    };
    vals.sort_by(compare_complex);
    Ok(vals)
}

/// Eigenvalues of [[a, b], [c, d]], computed so that the smaller one keeps
/// relative accuracy.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = if (half_tr + disc).norm() >= (half_tr - disc).norm() { half_tr + disc } else { half_tr - disc };
    let l2 = if l1 == ZERO { half_tr - disc } else { det / l1 };
    (l1, l2)
}

fn hessenberg(a: &CMat) -> CMat {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xn = norm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xn;
        let mut v = x;
        v[0] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- (I - 2vv*) H
        for j in 0..n {
            let mut s = ZERO;
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            s *= 2.0;
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * s;
            }
        }
        // H <- H (I - 2vv*)
        for i in 0..n {
            let mut s = ZERO;
            for (t, vi) in v.iter().enumerate() {
                s += h[(i, k + 1 + t)] * vi;
            }
            s *= 2.0;
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Rotation G = [[c, s], [-conj(s), c]] with G [x; y] = [r; 0].
fn givens(x: C64, y: C64) -> (f64, C64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, y.conj() / y.norm());
    }
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    (ax / r, (x / ax) * y.conj() / r)
}

fn hessenberg_qr(h: &mut CMat) -> Result<Vec<C64>> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let hnorm = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut vals = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n;
    loop {
        if hi == 0 {
            vals[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(l, l - 1)].norm() <= eps * s || h[(l, l - 1)].norm() <= 1e-300 {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            vals[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if l + 1 == hi {
            let (l1, l2) = eig2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            vals[l] = l1;
            vals[hi] = l2;
            if l == 0 {
                break;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NoConvergence { iterations: total, residual: h[(hi, hi - 1)].norm() / hnorm });
        }
        let mu = if iter % 11 == 0 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let (l1, l2) = eig2(a, b, c, d);
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            rots.push((c, s));
        }
        for (t, &(c, s)) in rots.iter().enumerate() {
            let k = l + t;
            for i in l..=(k + 2).min(hi) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(vals)
}

/// Worst relative residual over the eigenvalues, with eigenvectors obtained by
/// two steps of shifted inverse iteration.
pub fn eigen_residual(m: &CMat, values: &[C64]) -> f64 {
    let n = m.rows();
    let mnorm = m.norm_fro();
    if n == 0 || mnorm == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for &lam in values {
        let shift = lam + C64::new(1e3 * f64::EPSILON * mnorm, 1e3 * f64::EPSILON * mnorm);
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        let lu = match a.lu() {
            Ok(lu) => lu,
            Err(_) => return f64::INFINITY,
        };
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0, 0.1 * i as f64 + 0.3)).collect();
        for _ in 0..3 {
            v = lu.solve(&v);
            let vn = norm(&v);
            if !vn.is_finite() || vn == 0.0 {
                break;
            }
            for z in v.iter_mut() {
                *z /= vn;
            }
        }
        let mv = m.mul_vec(&v);
        let res: f64 = mv.iter().zip(&v).map(|(a, b)| (a - lam * b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(res / mnorm);
    }
    worst
}

pub fn spectral_weight(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).sum()
}

/// The `keep` values of largest modulus, ties broken by (re, im).
pub fn leading_values(values: &[C64], keep: usize) -> Vec<C64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(Ordering::Equal).then(compare_complex(a, b)));
    v.truncate(keep);
    v
}

/// Largest pair distance after greedily matching closest pairs first.
pub fn matched_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("multisets of size {} and {}", a.len(), b.len())));
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(Ordering::Equal).then((p.1, p.2).cmp(&(q.1, q.2))));
    let (mut left, mut right) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !left[i] && !right[j] {
            left[i] = true;
            right[j] = true;
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Eigendecomposition of a Hermitian matrix (values ascending).
pub fn eigh(m: &CMat) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    let mut a = m.hermitian_part();
    let mut q = CMat::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xn = norm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xn;
        let mut v = vec![ZERO; n];
        for (t, &xi) in x.iter().enumerate() {
            v[k + 1 + t] = xi;
        }
        v[k + 1] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        let p = a.mul_vec(&v);
        let kk: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk.re * vi).collect();
        for i in 0..n {
            let vi = v[i];
            let wi = w[i];
            if vi == ZERO && wi == ZERO {
                continue;
            }
            for j in 0..n {
                a[(i, j)] -= (vi * w[j].conj() + wi * v[j].conj()) * 2.0;
            }
        }
        for i in 0..n {
            let qv: C64 = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                q[(i, j)] -= qv * v[j].conj() * 2.0;
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phase = ONE;
    for j in 0..n {
        if j > 0 {
            let off = a[(j, j - 1)];
            let mag = off.norm();
            e[j] = mag;
            if mag > 0.0 {
                phase *= off / mag;
            }
        }
        if phase != ONE {
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    tql2(&mut d, &mut e, &mut q)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).unwrap_or(Ordering::Equal));
    let values = idx.iter().map(|&i| d[i]).collect();
    let vectors = q.select_columns(&idx);
    Ok(HermitianEigen { values, vectors })
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// subdiagonal `e[1..]`), rotating the columns of `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut CMat) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let rows = z.rows();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut guard = 0;
            loop {
                guard += 1;
                if guard > 60 {
                    return Err(Error::NoConvergence { iterations: guard, residual: e[l].abs() / tst1.max(1e-300) });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..rows {
                        let zh = z[(k, i + 1)];
                        let zi = z[(k, i)];
                        z[(k, i + 1)] = zi * s + zh * c;
                        z[(k, i)] = zi * c - zh * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Signature of a Hermitian matrix at relative threshold `tau_rank`.
pub fn signature_counts(m: &CMat, tau_rank: f64) -> Result<Signature> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let scale = m.norm_fro();
    let defect = m.hermitian_defect();
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian { defect: defect / scale.max(f64::MIN_POSITIVE) });
    }
    let eig = eigh(m)?;
    Ok(signature_of_values(&eig.values, tau_rank))
}

/// Signature of a list of real eigenvalues relative to their largest modulus.
pub fn signature_of_values(values: &[f64], tau_rank: f64) -> Signature {
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = tau_rank * top;
    Signature {
        positive: values.iter().filter(|&&v| v > cut).count(),
        negative: values.iter().filter(|&&v| v < -cut).count(),
    }
}

/// Relative eigenvalue separation below which [`modulus_gradient`] gives up.
pub const SIMPLE_GAP: f64 = 1e-6;

/// Gamma = sum_i c_i conj(l_i)/|l_i| r_i l_i^dag / (l_i^dag r_i), so that a
/// function L of the eigenvalue moduli with dL/d|l_i| = c_i varies as
/// dL = Re tr(Gamma dM).
///
/// `values` must be the eigenvalues of `m`. Returns `None` unless the spectrum
/// is simple with gaps above [`SIMPLE_GAP`] * `scale`. Eigenvalues with
/// |l| <= `zero_tol` * scale are treated as fixed zeros and skipped; without
/// `zero_tol` any eigenvalue that close to zero also yields `None`.
pub fn modulus_gradient(
    m: &CMat,
    values: &[C64],
    scale: f64,
    zero_tol: Option<f64>,
    coeff: impl Fn(C64) -> f64,
) -> Option<CMat> {
    let n = m.rows();
    if scale <= 0.0 {
        return None;
    }
    let cutoff = zero_tol.unwrap_or(SIMPLE_GAP) * scale;
    let live: Vec<C64> = values.iter().copied().filter(|v| v.norm() > cutoff).collect();
    if zero_tol.is_none() && live.len() != values.len() {
        return None;
    }
    for (i, a) in live.iter().enumerate() {
        if a.norm() <= SIMPLE_GAP * scale {
            return None;
        }
        if live.iter().skip(i + 1).any(|b| (a - b).norm() <= SIMPLE_GAP * scale) {
            return None;
        }
    }
    let madj = m.adjoint();
    let mut gamma = CMat::zeros(n, n);
    for &lam in &live {
        let r = inverse_iteration(m, lam, scale)?;
        let l = inverse_iteration(&madj, lam.conj(), scale)?;
        let lr: C64 = l.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
        if lr.norm() <= 1e-8 {
            return None;
        }
        let f = coeff(lam) * lam.conj() / lam.norm() / lr;
        for i in 0..n {
            for j in 0..n {
                gamma[(i, j)] += f * r[i] * l[j].conj();
            }
        }
    }
    Some(gamma)
}

fn inverse_iteration(m: &CMat, lam: C64, scale: f64) -> Option<Vec<C64>> {
    let n = m.rows();
    let mut a = m.clone();
    let shift = lam + C64::new(1e-13 * scale, 1e-13 * scale);
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let lu = a.lu().ok()?;
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.37 * i as f64, 0.21 * i as f64 - 0.5)).collect();
    for _ in 0..3 {
        v = lu.solve(&v);
        let nv = norm(&v);
        if !nv.is_finite() || nv == 0.0 {
            return None;
        }
        v.iter_mut().for_each(|z| *z /= nv);
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    #[test]
    fn two_by_two_nonnormal() {
        let m = CMat::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]);
        let s = eigenvalues_dense(&m).unwrap();
        assert!((s.values[0] - r(1.0)).norm() < 1e-15);
        assert!((s.values[1] - r(2.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let m = CMat::from_real_rows(&[&[0.0, -1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 5.0]]);
        let s = eigenvalues_dense(&m).unwrap();
        assert!((s.values[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((s.values[1] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((s.values[2] - r(5.0)).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_is_handled() {
        let m = CMat::from_real_rows(&[&[2.0, 1.0, 0.0, 0.0], &[0.0, 2.0, 1.0, 0.0], &[0.0, 0.0, 2.0, 1.0], &[0.0, 0.0, 0.0, 2.0]]);
        let s = eigenvalues_dense(&m).unwrap();
        for v in &s.values {
            assert!((v - r(2.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // x^4 - 10x^3 + 35x^2 - 50x + 24 = (x-1)(x-2)(x-3)(x-4)
        let m = CMat::from_real_rows(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let s = eigenvalues_dense(&m).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            assert!((v - r(k as f64 + 1.0)).norm() < 1e-12, "{v}");
        }
    }

    #[test]
    fn zero_matrix() {
        let s = eigenvalues_dense(&CMat::zeros(5, 5)).unwrap();
        assert!(s.values.iter().all(|v| *v == ZERO));
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn dimension_cap() {
        let m = CMat::identity(MAX_DENSE_DIM + 1);
        assert!(matches!(eigenvalues_dense(&m), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn nonsquare_rejected() {
        assert!(matches!(eigenvalues(&CMat::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn eigh_reconstructs() {
        let m = CMat::from_rows(&[
            vec![r(2.0), c(1.0, 1.0), c(0.0, -0.5), r(0.0)],
            vec![c(1.0, -1.0), r(-1.0), r(0.3), c(0.2, 0.2)],
            vec![c(0.0, 0.5), r(0.3), r(0.5), c(0.0, 1.0)],
            vec![r(0.0), c(0.2, -0.2), c(0.0, -1.0), r(4.0)],
        ]);
        let e = eigh(&m).unwrap();
        let v = &e.vectors;
        let back = v.matmul(&CMat::from_real_diag(&e.values)).matmul(&v.adjoint());
        assert!(CMat::dist(&back, &m) < 1e-13);
        assert!(CMat::dist(&v.adjoint_mul(v), &CMat::identity(4)) < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn signature_of_diagonal() {
        let m = CMat::from_real_diag(&[3.0, -1.0, 0.0, 1e-14, 2.0]);
        let s = signature_counts(&m, 1e-10).unwrap();
        assert_eq!(s, Signature { positive: 2, negative: 1 });
    }

    #[test]
    fn signature_rejects_nonhermitian() {
        let m = CMat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(signature_counts(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }
}
