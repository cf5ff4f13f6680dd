//! Dense complex matrices and the handful of factorizations the rest of the
//! crate needs: LU, thin QR, matrix exponential.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        CMat { rows, cols, data }
    }

    /// Build from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMat { rows: r, cols: c, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let v: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        CMat::from_rows(&v)
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        CMat::from_fn(r, c, |i, j| cols[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch {:?} x {:?}", self.shape(), other.shape());
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let orow = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        CMat { rows: n, cols: p, data: out }
    }

    /// `self^dagger * other` without forming the adjoint.
    pub fn adjoint_mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.rows, other.rows, "adjoint_mul shape mismatch");
        let (m, n, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for k in 0..m {
            let arow = &self.data[k * n..(k + 1) * n];
            let brow = &other.data[k * p..(k + 1) * p];
            for (i, a) in arow.iter().enumerate() {
                let a = a.conj();
                if a == ZERO {
                    continue;
                }
                let orow = &mut out[i * p..(i + 1) * p];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        CMat { rows: n, cols: p, data: out }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm, through the largest eigenvalue of `A^dagger A`.
    pub fn norm_2(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let g = if self.rows >= self.cols { self.adjoint_mul(self) } else { self.matmul(&self.adjoint()) };
        match crate::spectral::eigh(&g) {
            Ok(e) => e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            Err(_) => self.norm_fro(),
        }
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
        CMat::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> CMat {
        CMat::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn hermitian_defect(&self) -> f64 {
        let mut d = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                d += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        d.sqrt()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= rel_tol * self.norm_fro().max(f64::MIN_POSITIVE)
    }

    pub fn hermitian_part(&self) -> CMat {
        let a = self.adjoint();
        (self + &a).scale_re(0.5)
    }

    pub fn commutator(a: &CMat, b: &CMat) -> CMat {
        &a.matmul(b) - &b.matmul(a)
    }

    pub fn dist(a: &CMat, b: &CMat) -> f64 {
        (a - b).norm_fro()
    }

    pub fn kron(a: &CMat, b: &CMat) -> CMat {
        CMat::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
            a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
        })
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::new(self)
    }

    pub fn inverse(&self) -> Result<CMat> {
        let lu = self.lu()?;
        lu.check_nonsingular()?;
        Ok(lu.solve_mat(&CMat::identity(self.rows)))
    }

    pub fn det(&self) -> Result<C64> {
        Ok(self.lu()?.det())
    }

    pub fn expm(&self) -> Result<CMat> {
        expm(self)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMat> for CMat {
    fn sub_assign(&mut self, rhs: &CMat) {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl CMat {
    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &CMat) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: CMat,
    perm: Vec<usize>,
    sign: f64,
    scale: f64,
}

impl Lu {
    pub fn new(a: &CMat) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[(k, k)];
            if piv == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { n, lu, perm, sign, scale: a.max_abs() })
    }

    pub fn det(&self) -> C64 {
        let mut d = C64::new(self.sign, 0.0);
        for i in 0..self.n {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.n).map(|i| self.lu[(i, i)].norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn check_nonsingular(&self) -> Result<()> {
        if self.n > 0 && self.min_pivot() <= f64::EPSILON * self.scale * self.n as f64 * 1e-3 {
            return Err(Error::Singular);
        }
        Ok(())
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            let piv = self.lu[(i, i)];
            x[i] = if piv == ZERO { s / C64::new(f64::MIN_POSITIVE.sqrt(), 0.0) } else { s / piv };
        }
        x
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        let mut out = CMat::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j));
            out.set_column(j, &x);
        }
        out
    }
}

/// Thin QR by modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Columns whose residual norm falls below `rel_tol` times their original norm
/// are reported as dependent.
pub fn thin_qr(a: &CMat, rel_tol: f64) -> Result<(CMat, CMat)> {
    let (m, n) = a.shape();
    let mut q = CMat::zeros(m, n);
    let mut r = CMat::zeros(n, n);
    let scale = a.max_abs();
    for j in 0..n {
        let mut v = a.column(j);
        let orig = norm(&v);
        for _pass in 0..2 {
            for k in 0..j {
                let qk = q.column(k);
                let c = dot(&qk, &v);
                r[(k, j)] += c;
                for (vi, qi) in v.iter_mut().zip(&qk) {
                    *vi -= c * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv <= rel_tol * orig.max(scale) || nv == 0.0 {
            return Err(Error::RankDeficient);
        }
        r[(j, j)] = C64::new(nv, 0.0);
        for (i, vi) in v.iter().enumerate() {
            q[(i, j)] = vi / nv;
        }
    }
    Ok((q, r))
}

/// `u^dagger v`
pub fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm(a: &CMat) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let nrm = a.norm_1();
    if !nrm.is_finite() {
        return Err(Error::Invalid("matrix exponential of a non-finite matrix".into()));
    }
    let mut s = 0u32;
    if nrm > 0.25 {
        s = (nrm / 0.25).log2().ceil() as u32;
    }
    let scaled = a.scale_re(0.5f64.powi(s as i32));
    let mut result = CMat::identity(n);
    let mut term = CMat::identity(n);
    for k in 1..40 {
        term = term.matmul(&scaled).scale_re(1.0 / k as f64);
        result += &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * result.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        result = result.matmul(&result);
    }
    Ok(result)
}

/// Sum a sequence of values by pairwise (tree) summation, so the result does
/// not depend on how the values were produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMat {
        CMat::from_rows(&[
            vec![c(2.0, 1.0), c(0.5, -0.3), c(0.0, 1.0)],
            vec![c(-1.0, 0.0), c(3.0, 0.2), c(0.7, 0.7)],
            vec![c(0.1, -0.4), c(0.0, 0.0), c(1.5, -2.0)],
        ])
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = sample();
        let inv = a.inverse().unwrap();
        assert!(CMat::dist(&inv.matmul(&a), &CMat::identity(3)) < 1e-13);
    }

    #[test]
    fn det_of_triangular_is_product_of_diagonal() {
        let a = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(5.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 3.0)],
        ]);
        let d = a.det().unwrap();
        assert!((d - c(0.0, 6.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMat::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::Singular)));
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7;
        let g = CMat::from_real_rows(&[&[0.0, -t], &[t, 0.0]]);
        let e = g.expm().unwrap();
        let want = CMat::from_real_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        assert!(CMat::dist(&e, &want) < 1e-14);
    }

    #[test]
    fn expm_of_large_diagonal() {
        let a = CMat::from_diag(&[c(3.0, 1.0), c(-4.0, 0.0)]);
        let e = a.expm().unwrap();
        assert!((e[(0, 0)] - c(3.0, 1.0).exp()).norm() < 1e-12 * c(3.0, 1.0).exp().norm());
        assert!((e[(1, 1)] - (-4.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn thin_qr_reconstructs() {
        let a = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 1.0)],
            vec![c(0.0, 2.0), c(0.0, 0.0)],
            vec![c(1.0, -1.0), c(3.0, 0.0)],
        ]);
        let (q, r) = thin_qr(&a, 1e-12).unwrap();
        assert!(CMat::dist(&q.matmul(&r), &a) < 1e-14);
        assert!(CMat::dist(&q.adjoint_mul(&q), &CMat::identity(2)) < 1e-14);
    }

    #[test]
    fn thin_qr_flags_dependent_columns() {
        let a = CMat::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]]);
        assert!(matches!(thin_qr(&a, 1e-12), Err(Error::RankDeficient)));
    }

    #[test]
    fn pairwise_sum_matches_plain_sum_on_integers() {
        let v: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }
}
