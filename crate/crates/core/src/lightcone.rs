//! Ordered exponentials, weighted line integrals and the leading-order gauge phase.
//!
//! Ordering convention: earlier parameters stand to the left,
//!
//! ```text
//! Pexp(a, b) = 1 + int_a^b F(t0) dt0 + int_a^b dt0 F(t0) int_t0^b dt1 F(t1) + ...
//! ```
//!
//! so `Pexp(a, c) = Pexp(a, b) * Pexp(b, c)` and, as a function of the lower
//! endpoint, `d/da Pexp(a, b) = -F(a) Pexp(a, b)` with `Pexp(b, b) = 1`.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::quadrature::{integration_matrix, GaussLegendre};
use crate::sea::gamma::{Chirality, ETA};

/// Highest Dyson order accepted.
pub const MAX_DYSON_ORDER: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PexpMethod {
    /// Sum of iterated integrals up to `order`, each level on `nodes` Gauss points.
    Dyson { order: usize, nodes: usize },
    /// Adaptive Dormand-Prince integration of the endpoint equation.
    Ode { tol: f64 },
}

impl PexpMethod {
    pub fn dyson(order: usize) -> Self {
        PexpMethod::Dyson { order, nodes: 32 }
    }

    pub fn ode() -> Self {
        PexpMethod::Ode { tol: 1e-10 }
    }
}

/// A square matrix family on a parameter interval.
pub trait MatrixPath {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> CMat;
}

/// Wraps a closure as a [`MatrixPath`].
pub struct FnPath<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> CMat> FnPath<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnPath { dim, f }
    }
}

impl<F: Fn(f64) -> CMat> MatrixPath for FnPath<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn at(&self, t: f64) -> CMat {
        (self.f)(t)
    }
}

pub fn ordered_exp(path: &dyn MatrixPath, a: f64, b: f64, method: PexpMethod) -> Result<CMat> {
    if !(a <= b) {
        return Err(Error::Invalid(format!("ordered_exp needs a <= b, got a={a}, b={b}")));
    }
    match method {
        PexpMethod::Dyson { order, nodes } => Ok(dyson_terms(path, a, b, order, nodes)?.into_iter().fold(
            CMat::zeros(path.dim(), path.dim()),
            |mut acc, t| {
                acc += &t;
                acc
            },
        )),
        PexpMethod::Ode { tol } => ode_pexp(path, a, b, tol),
    }
}

/// The individual Dyson terms 0..=order (term 0 is the identity).
///
/// Phi_k(t) = int_t^b F(s) Phi_{k-1}(s) ds on a Gauss grid, via the
/// spectral integration matrix; term k is Phi_k(a).
pub fn dyson_terms(path: &dyn MatrixPath, a: f64, b: f64, order: usize, nodes: usize) -> Result<Vec<CMat>> {
    if order > MAX_DYSON_ORDER {
        return Err(Error::Invalid(format!("Dyson order {order} exceeds the cap {MAX_DYSON_ORDER}")));
    }
    if nodes < 4 {
        return Err(Error::Invalid(format!("at least 4 quadrature nodes required, got {nodes}")));
    }
    let d = path.dim();
    let mut terms = vec![CMat::identity(d)];
    if order == 0 || a == b {
        terms.resize(order + 1, CMat::zeros(d, d));
        return Ok(terms);
    }
    let rule = GaussLegendre::on(nodes, a, b);
    let j = integration_matrix(&rule, b);
    let f: Vec<CMat> = rule.nodes.iter().map(|&t| path.at(t)).collect();
    let mut phi: Vec<CMat> = vec![CMat::identity(d); nodes];
    for _ in 1..=order {
        let g: Vec<CMat> = f.iter().zip(&phi).map(|(fm, p)| fm.matmul(p)).collect();
        let mut term = CMat::zeros(d, d);
        for (w, gm) in rule.weights.iter().zip(&g) {
            term.axpy(c(*w, 0.0), gm);
        }
        phi = j
            .iter()
            .map(|row| {
                let mut m = CMat::zeros(d, d);
                for (&jw, gm) in row.iter().zip(&g) {
                    m.axpy(c(jw, 0.0), gm);
                }
                m
            })
            .collect();
        terms.push(term);
    }
    Ok(terms)
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Solves dP/dt = -F(t) P backwards from P(b) = 1 down to t = a.
fn ode_pexp(path: &dyn MatrixPath, a: f64, b: f64, tol: f64) -> Result<CMat> {
    let d = path.dim();
    let mut y = CMat::identity(d);
    if a == b {
        return Ok(y);
    }
    let rhs = |t: f64, p: &CMat| path.at(t).matmul(p).scale_re(-1.0);
    let span = b - a;
    let mut t = b;
    let mut h = -span.min(0.1 * span.max(1e-3));
    let mut k1 = rhs(t, &y);
    let mut steps = 0usize;
    while t > a {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::NoConvergence { iterations: steps, residual: (t - a).abs() });
        }
        if t + h < a {
            h = a - t;
        }
        let mut k: Vec<CMat> = vec![k1.clone()];
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if DP_A[s][j] != 0.0 {
                    ys.axpy(c(h * DP_A[s][j], 0.0), kj);
                }
            }
            if s == 6 {
                // FSAL: stage 7 is evaluated at the new solution.
                let kn = rhs(t + h, &ys);
                k.push(kn);
                let mut err = CMat::zeros(d, d);
                for (j, kj) in k.iter().enumerate() {
                    err.axpy(c(h * DP_E[j], 0.0), kj);
                }
                let mut e = 0.0f64;
                for ((ev, yo), yn) in err.as_slice().iter().zip(y.as_slice()).zip(ys.as_slice()) {
                    let sc = tol + tol * yo.norm().max(yn.norm());
                    e = e.max(ev.norm() / sc);
                }
                if e <= 1.0 {
                    t += h;
                    y = ys;
                    k1 = k.pop().expect("seven stages");
                }
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
                break;
            }
            k.push(rhs(t + DP_C[s] * h, &ys));
        }
        if (t - a).abs() <= 1e-15 * span {
            break;
        }
    }
    Ok(y)
}

/// Spec of `int_x^y [l, r | n] dz f(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineIntegralSpec {
    pub l: u32,
    pub r: u32,
    pub n: u32,
    pub nodes: usize,
}

impl LineIntegralSpec {
    pub fn new(l: u32, r: u32, n: u32) -> Self {
        LineIntegralSpec { l, r, n, nodes: 32 }
    }

    pub fn weight(&self, alpha: f64) -> f64 {
        alpha.powi(self.l as i32) * (1.0 - alpha).powi(self.r as i32) * (alpha - alpha * alpha).powi(self.n as i32)
    }

    fn rule(&self) -> Result<GaussLegendre> {
        if self.nodes < 4 {
            return Err(Error::Invalid(format!("at least 4 quadrature nodes required, got {}", self.nodes)));
        }
        Ok(GaussLegendre::on(self.nodes, 0.0, 1.0))
    }
}

fn segment(x: &[f64; 4], y: &[f64; 4], alpha: f64) -> [f64; 4] {
    std::array::from_fn(|i| alpha * y[i] + (1.0 - alpha) * x[i])
}

/// `int_0^1 a^l (1-a)^r (a - a^2)^n f(a y + (1-a) x) da` for scalar f.
pub fn line_integral(x: &[f64; 4], y: &[f64; 4], spec: LineIntegralSpec, f: impl Fn(&[f64; 4]) -> C64) -> Result<C64> {
    let g = spec.rule()?;
    Ok(g.nodes.iter().zip(&g.weights).map(|(&a, &w)| f(&segment(x, y, a)) * (w * spec.weight(a))).sum())
}

/// Matrix-valued version of [`line_integral`].
pub fn line_integral_matrix(
    x: &[f64; 4],
    y: &[f64; 4],
    spec: LineIntegralSpec,
    f: impl Fn(&[f64; 4]) -> CMat,
) -> Result<CMat> {
    let g = spec.rule()?;
    let mut acc: Option<CMat> = None;
    for (&a, &w) in g.nodes.iter().zip(&g.weights) {
        let v = f(&segment(x, y, a));
        match acc.as_mut() {
            Some(m) => m.axpy(c(w * spec.weight(a), 0.0), &v),
            None => acc = Some(v.scale_re(w * spec.weight(a))),
        }
    }
    Ok(acc.expect("at least one node"))
}

/// Beta(l+n+1, r+n+1): the line integral of f = 1.
pub fn line_integral_of_one(spec: LineIntegralSpec) -> f64 {
    let a = (spec.l + spec.n) as u64;
    let b = (spec.r + spec.n) as u64;
    // a! b! / (a+b+1)!
    let mut v = 1.0;
    for k in 1..=b {
        v *= k as f64 / (a + k) as f64;
    }
    v / (a + b + 1) as f64
}

/// `Pexp(-i int_0^1 A^j_c(a y + (1-a) x) (y-x)_j da)` where `field(c, z)`
/// returns the contravariant components A^0..A^3 at z.
pub fn gauge_phase(
    field: &dyn Fn(Chirality, &[f64; 4]) -> [CMat; 4],
    chirality: Chirality,
    x: &[f64; 4],
    y: &[f64; 4],
    method: PexpMethod,
) -> Result<CMat> {
    let xi: [f64; 4] = std::array::from_fn(|j| ETA[j] * (y[j] - x[j]));
    let dim = field(chirality, x)[0].rows();
    let path = FnPath::new(dim, |alpha: f64| {
        let a = field(chirality, &segment(x, y, alpha));
        let mut m = CMat::zeros(dim, dim);
        for j in 0..4 {
            if xi[j] != 0.0 {
                m.axpy(c(0.0, -xi[j]), &a[j]);
            }
        }
        m
    });
    ordered_exp(&path, 0.0, 1.0, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn nilpotent_path() {
        let n = CMat::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]);
        let p = FnPath::new(2, |t: f64| n.scale_re(t));
        let want = {
            let mut m = CMat::identity(2);
            m.axpy(c(0.5, 0.0), &n);
            m
        };
        for method in [PexpMethod::dyson(5), PexpMethod::ode()] {
            let got = ordered_exp(&p, 0.0, 1.0, method).unwrap();
            assert!(CMat::dist(&got, &want) < 1e-12, "{method:?}");
        }
    }

    #[test]
    fn empty_interval_is_identity() {
        let p = FnPath::new(3, |_| CMat::identity(3));
        assert_eq!(ordered_exp(&p, 1.0, 1.0, PexpMethod::ode()).unwrap(), CMat::identity(3));
        assert!(ordered_exp(&p, 1.0, 0.0, PexpMethod::ode()).is_err());
    }

    #[test]
    fn order_cap() {
        let p = FnPath::new(1, |_| CMat::identity(1));
        assert!(ordered_exp(&p, 0.0, 1.0, PexpMethod::dyson(13)).is_err());
    }

    #[test]
    fn beta_values() {
        assert_eq!(line_integral_of_one(LineIntegralSpec::new(0, 0, 0)), 1.0);
        assert_eq!(line_integral_of_one(LineIntegralSpec::new(1, 0, 0)), 0.5);
        // B(2, 3) = 1/12
        assert!((line_integral_of_one(LineIntegralSpec::new(0, 1, 1)) - 1.0 / 12.0).abs() < 1e-16);
    }
}
