//! The scalar distribution `T_{m^2}` off the light cone and its lattice counterpart.

use std::f64::consts::{LN_2, PI};

use super::lattice::{momenta, MomentumLattice, SpaceDim};
use super::vacuum::{Point, RegularizationSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, C64, ZERO};
use crate::par;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative light-cone clearance `|m^2 xi^2| >= NEAR_CONE`.
pub const NEAR_CONE: f64 = 1e-3;

/// psi(n) = -gamma + sum_{k<n} 1/k for integers n >= 1.
pub fn digamma_int(n: usize) -> f64 {
    assert!(n >= 1, "digamma_int needs n >= 1");
    -EULER_GAMMA + (1..n).map(|k| 1.0 / k as f64).sum::<f64>()
}

/// c_j = -2 ln 2 - psi(j+1) - psi(j+2), which makes the series equal to
/// `m K_1(m r) / (8 pi^3 r)` at spacelike distance r.
pub fn log_coefficients(terms: usize) -> Vec<f64> {
    (0..terms).map(|j| -2.0 * LN_2 - digamma_int(j + 1) - digamma_int(j + 2)).collect()
}

pub fn minkowski_square(xi: &Point) -> f64 {
    xi[0] * xi[0] - xi[1] * xi[1] - xi[2] * xi[2] - xi[3] * xi[3]
}

/// `T_{m^2}(x, y)` at `xi = y - x` with the first `terms` log-series terms.
pub fn continuum_t(xi: &Point, mass: f64, terms: usize) -> Result<C64> {
    continuum_t_with(xi, mass, &log_coefficients(terms))
}

/// As [`continuum_t`] with caller-supplied coefficients c_0, c_1, ...
pub fn continuum_t_with(xi: &Point, mass: f64, coeffs: &[f64]) -> Result<C64> {
    if !(mass >= 0.0) {
        return Err(Error::Invalid(format!("mass must be nonnegative, got {mass}")));
    }
    let s = minkowski_square(xi);
    let clearance = if mass > 0.0 { (mass * mass * s).abs() } else { s.abs() };
    if !(clearance >= NEAR_CONE) {
        return Err(Error::NearLightCone(s));
    }
    let mut t = c(-1.0 / (8.0 * PI.powi(3) * s), 0.0);
    if mass == 0.0 {
        return Ok(t);
    }
    let z = mass * mass * s;
    let step = if s > 0.0 { PI * xi[0].signum() } else { 0.0 };
    let log = z.abs().ln();
    let mut power = 1.0;
    let mut series = ZERO;
    for (j, cj) in coeffs.iter().enumerate() {
        if j > 0 {
            // (-1)^j (z/4)^j / (j! (j+1)!)
            power *= -z / (4.0 * j as f64 * (j + 1) as f64);
        }
        series += c(log + cj, step) * power;
    }
    t += series * (mass * mass / (32.0 * PI.powi(3)));
    Ok(t)
}

/// Lattice counterpart of `T` for the regularized sea,
/// `1/(2 pi V) sum_k e^{-2 eps omega} e^{-ik(x-y)} / (2 omega)` on the lower shell.
/// The `1/(2 pi)` matches the box normalization to the continuum measure
/// `d^4k / (2 pi)^4`. No mode cap applies.
pub fn lattice_t(lattice: &MomentumLattice, reg: &RegularizationSpec, x: &Point, y: &Point) -> C64 {
    let xi = [x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]];
    let ks = momenta(lattice.extent, lattice.points);
    let m2 = lattice.mass * lattice.mass;
    let term = |k: [f64; 3]| {
        let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + m2).sqrt();
        if omega == 0.0 {
            return ZERO;
        }
        let phase = omega * xi[0] + k[0] * xi[1] + k[1] * xi[2] + k[2] * xi[3];
        C64::from_polar(reg.damping(omega).powi(2) / (2.0 * omega), phase)
    };
    let rows: Vec<C64> = match lattice.dim {
        SpaceDim::D1 => ks.iter().map(|&a| term([a, 0.0, 0.0])).collect(),
        SpaceDim::D3 => par::map(&ks, |&a| {
            let mut acc = ZERO;
            for &b in &ks {
                for &cc in &ks {
                    acc += term([a, b, cc]);
                }
            }
            acc
        }),
    };
    rows.iter().sum::<C64>() / (2.0 * PI * lattice.volume())
}
