//! Gauss-Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of an `n`-point rule on [a, b], nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule on [-1, 1]. Nodes by Newton iteration on P_n from the Chebyshev-like
    /// initial guess; converges in a handful of steps for any n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn on(n: usize, a: f64, b: f64) -> Self {
        GaussLegendre::new(n).mapped(a, b)
    }

    pub fn mapped(&self, a: f64, b: f64) -> Self {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        GaussLegendre {
            nodes: self.nodes.iter().map(|&x| c + h * x).collect(),
            weights: self.weights.iter().map(|&w| h * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric weights for Lagrange interpolation on `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let p: f64 = (0..nodes.len()).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
            1.0 / p
        })
        .collect()
}

/// Values of all Lagrange basis polynomials at `x`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&t| t == x) {
        let mut v = vec![0.0; nodes.len()];
        v[j] = 1.0;
        return v;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&t, &b)| b / (x - t)).collect();
    let s: f64 = terms.iter().sum();
    terms.iter().map(|t| t / s).collect()
}

/// Matrix J with (J f)_i = integral from nodes[i] to b of the interpolant of f.
/// Exact for polynomials of degree < nodes.len().
pub fn integration_matrix(rule: &GaussLegendre, b: f64) -> Vec<Vec<f64>> {
    let n = rule.len();
    let bary = barycentric_weights(&rule.nodes);
    let base = GaussLegendre::new(n);
    (0..n)
        .map(|i| {
            let sub = base.mapped(rule.nodes[i], b);
            let mut row = vec![0.0; n];
            for (&x, &w) in sub.nodes.iter().zip(&sub.weights) {
                for (r, l) in row.iter_mut().zip(lagrange_basis(&rule.nodes, &bary, x)) {
                    *r += w * l;
                }
            }
            row
        })
        .collect()
}
