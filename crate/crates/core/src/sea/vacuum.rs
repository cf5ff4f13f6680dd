//! Plane-wave Dirac sea: occupied modes, regularized wave functions, the
//! kernel of the fermionic projector and local correlation operators.

use std::f64::consts::PI;

use super::gamma::GammaBasis;
use super::lattice::MomentumLattice;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ZERO};
use crate::par;
use crate::system::{Atom, CausalFermionSystem, DiscreteMeasure, OperatorPoint};

/// Largest number of occupied sea states.
pub const MODE_CAP: usize = 4096;
/// Tolerance for the sea constraints on inserted states.
pub const INSERT_TOL: f64 = 1e-8;
/// Spin dimension of the Dirac sea in the causal fermion system.
pub const SEA_SPIN_DIM: usize = 2;

/// A spacetime point `(t, x1, x2, x3)`.
pub type Point = [f64; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegularizationKind {
    /// Damping `exp(-eps |k0|)` of each plane wave.
    ExponentialIeps,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationSpec {
    pub epsilon: f64,
    pub kind: RegularizationKind,
}

impl RegularizationSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Invalid(format!("regularization length must be positive, got {epsilon}")));
        }
        Ok(RegularizationSpec { epsilon, kind: RegularizationKind::ExponentialIeps })
    }

    pub fn damping(&self, omega: f64) -> f64 {
        match self.kind {
            RegularizationKind::ExponentialIeps => (-self.epsilon * omega).exp(),
        }
    }
}

/// One plane-wave solution: momentum, energy sign and unit spinor.
#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub k: [f64; 3],
    pub omega: f64,
    /// -1 for the sea, +1 for positive energy.
    pub sign: i8,
    pub spinor: [C64; 4],
}

/// `(sigma . k) xi` for the Pauli matrices.
fn sigma_dot(k: &[f64; 3], xi: [C64; 2]) -> [C64; 2] {
    let (a, b) = (xi[0], xi[1]);
    [
        a * k[2] + b * c(k[0], -k[1]),
        a * c(k[0], k[1]) - b * k[2],
    ]
}

/// Unit eigenvector of `alpha . k + beta m` with eigenvalue `sign * omega`,
/// built from the two-spinor `xi`.
pub fn plane_wave_spinor(k: &[f64; 3], mass: f64, sign: i8, xi: [C64; 2]) -> [C64; 4] {
    let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + mass * mass).sqrt();
    let s = sigma_dot(k, xi);
    let norm = ((omega + mass) / (2.0 * omega)).sqrt();
    let f = norm / (omega + mass);
    if sign < 0 {
        [-s[0] * f, -s[1] * f, xi[0] * norm, xi[1] * norm]
    } else {
        [xi[0] * norm, xi[1] * norm, s[0] * f, s[1] * f]
    }
}

/// `p_-(k) = (omega - H) / (2 omega)` with `H = alpha . k + beta m`; `p_+ = I - p_-`.
pub fn energy_projector(gamma: &GammaBasis, k: &[f64; 3], mass: f64, sign: i8) -> CMat {
    let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + mass * mass).sqrt();
    let g0 = &gamma.gamma[0];
    let mut h = g0.scale_re(mass);
    for i in 0..3 {
        h.axpy(c(k[i], 0.0), &g0.matmul(&gamma.gamma[i + 1]));
    }
    let mut p = CMat::identity(4).scale_re(0.5);
    p.axpy(c(sign as f64 / (2.0 * omega), 0.0), &h);
    p
}

/// The vacuum: every lattice momentum on the lower mass shell occupied with
/// both spin states, plus inserted particles and removed sea states.
///
/// States are indexed in a doubled mode basis: the `N` sea modes first, then
/// the `N` positive-energy modes with the same momenta and spins.
#[derive(Clone, Debug)]
pub struct SeaState {
    lattice: MomentumLattice,
    gamma: GammaBasis,
    modes: Vec<Mode>,
    sea_len: usize,
    particles: Vec<Vec<C64>>,
    antiparticles: Vec<Vec<C64>>,
}

pub fn build_sea(lattice: &MomentumLattice) -> Result<SeaState> {
    let ks: Vec<[f64; 3]> = lattice
        .vectors()
        .into_iter()
        .filter(|k| lattice.mass > 0.0 || k.iter().any(|&v| v != 0.0))
        .collect();
    let sea_len = 2 * ks.len();
    if sea_len > MODE_CAP {
        return Err(Error::ModeCap { modes: sea_len, cap: MODE_CAP });
    }
    let xis = [[c(1.0, 0.0), ZERO], [ZERO, c(1.0, 0.0)]];
    let mut modes = Vec::with_capacity(2 * sea_len);
    for sign in [-1i8, 1] {
        for k in &ks {
            for xi in xis {
                modes.push(Mode { k: *k, omega: lattice.omega(k), sign, spinor: plane_wave_spinor(k, lattice.mass, sign, xi) });
            }
        }
    }
    Ok(SeaState { lattice: *lattice, gamma: GammaBasis::dirac(), modes, sea_len, particles: Vec::new(), antiparticles: Vec::new() })
}

impl SeaState {
    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }

    pub fn gamma(&self) -> &GammaBasis {
        &self.gamma
    }

    /// Number of occupied sea states, the dimension of the Hilbert space.
    pub fn dim(&self) -> usize {
        self.sea_len
    }

    /// All modes of the doubled basis.
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn particles(&self) -> &[Vec<C64>] {
        &self.particles
    }

    pub fn antiparticles(&self) -> &[Vec<C64>] {
        &self.antiparticles
    }

    /// Box scalar product of two modes, `int psi^dag phi dx` over the box.
    pub fn mode_overlap(&self, a: usize, b: usize) -> C64 {
        let (ma, mb) = (&self.modes[a], &self.modes[b]);
        if ma.k != mb.k || ma.sign != mb.sign {
            return ZERO;
        }
        ma.spinor.iter().zip(&mb.spinor).map(|(u, v)| u.conj() * v).sum()
    }

    /// `(R_eps u_l)(x)` for mode `l` of the doubled basis.
    pub fn regularized_eval(&self, reg: &RegularizationSpec, l: usize, x: &Point) -> Result<[C64; 4]> {
        let m = self.modes.get(l).ok_or_else(|| Error::Invalid(format!("mode {l} out of range for {} modes", self.modes.len())))?;
        Ok(mode_value(m, reg, self.lattice.volume(), x))
    }

    /// `Phi(x)`: the 4 x N matrix with columns `(R_eps u_l)(x)` over the sea.
    pub fn wave_matrix(&self, reg: &RegularizationSpec, x: &Point) -> CMat {
        let vol = self.lattice.volume();
        let mut phi = CMat::zeros(4, self.sea_len);
        for (l, m) in self.modes[..self.sea_len].iter().enumerate() {
            let v = mode_value(m, reg, vol, x);
            for a in 0..4 {
                phi[(a, l)] = v[a];
            }
        }
        phi
    }

    /// Wave function of a state given by coefficients in the doubled basis.
    pub fn state_value(&self, reg: &RegularizationSpec, coeffs: &[C64], x: &Point) -> [C64; 4] {
        let vol = self.lattice.volume();
        let mut out = [ZERO; 4];
        for (m, &a) in self.modes.iter().zip(coeffs) {
            if a == ZERO {
                continue;
            }
            let v = mode_value(m, reg, vol, x);
            for i in 0..4 {
                out[i] += a * v[i];
            }
        }
        out
    }

    /// `P(x,y) = -sum_l |R u_l(x)> <R u_l(y)|` over the sea, with the
    /// `-1/2pi` particle and `+1/2pi` anti-particle corrections.
    pub fn kernel(&self, reg: &RegularizationSpec, x: &Point, y: &Point) -> CMat {
        let px = self.wave_matrix(reg, x);
        let py = if x == y { px.clone() } else { self.wave_matrix(reg, y) };
        self.kernel_from_waves(reg, &px, &py, x, y)
    }

    /// Kernel from precomputed wave matrices at `x` and `y`.
    pub fn kernel_from_waves(&self, reg: &RegularizationSpec, px: &CMat, py: &CMat, x: &Point, y: &Point) -> CMat {
        // -Phi_x Phi_y^dag gamma0
        let mut outer = px.matmul(&py.adjoint()).scale_re(-1.0);
        for (states, sign) in [(&self.particles, -1.0), (&self.antiparticles, 1.0)] {
            for s in states.iter() {
                let a = self.state_value(reg, s, x);
                let b = self.state_value(reg, s, y);
                for i in 0..4 {
                    for j in 0..4 {
                        outer[(i, j)] += a[i] * b[j].conj() * (sign / (2.0 * PI));
                    }
                }
            }
        }
        outer.matmul(&self.gamma.gamma[0])
    }

    /// `F(x) = -Phi(x)^dag gamma0 Phi(x)` on the sea Hilbert space.
    pub fn local_correlation(&self, reg: &RegularizationSpec, x: &Point) -> CMat {
        let phi = self.wave_matrix(reg, x);
        phi.adjoint().matmul(&self.gamma.gamma[0].matmul(&phi)).scale_re(-1.0).hermitian_part()
    }

    /// `F(x)` in factored form, spin dimension 2.
    pub fn operator_point(&self, reg: &RegularizationSpec, x: &Point) -> Result<OperatorPoint> {
        let phi = self.wave_matrix(reg, x);
        OperatorPoint::from_factored(&phi.adjoint(), &self.gamma.gamma[0].scale_re(-1.0), SEA_SPIN_DIM)
    }

    fn check_state(&self, v: &[C64], particle: bool) -> Result<()> {
        if v.len() != self.modes.len() {
            return Err(Error::Shape(format!("state has {} coefficients, basis has {}", v.len(), self.modes.len())));
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > INSERT_TOL {
            return Err(Error::SeaConstraint { what: "state must have unit norm", defect: (norm - 1.0).abs() });
        }
        // particles avoid the sea, anti-particles lie in it
        let (outside, what) = if particle {
            (&v[..self.sea_len], "particle overlaps the sea")
        } else {
            (&v[self.sea_len..], "anti-particle leaves the sea")
        };
        let defect = outside.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if defect > INSERT_TOL {
            return Err(Error::SeaConstraint { what, defect });
        }
        Ok(())
    }

    /// New state with extra particles and holes in the sea.
    pub fn insert_states(&self, particles: &[Vec<C64>], antiparticles: &[Vec<C64>]) -> Result<SeaState> {
        for p in particles {
            self.check_state(p, true)?;
        }
        for a in antiparticles {
            self.check_state(a, false)?;
        }
        let mut out = self.clone();
        out.particles.extend_from_slice(particles);
        out.antiparticles.extend_from_slice(antiparticles);
        Ok(out)
    }

    /// Undo an earlier insertion. Every state must match an inserted one exactly.
    pub fn withdraw(&self, particles: &[Vec<C64>], antiparticles: &[Vec<C64>]) -> Result<SeaState> {
        let mut out = self.clone();
        for (list, states, what) in [
            (&mut out.particles, particles, "no such particle"),
            (&mut out.antiparticles, antiparticles, "no such anti-particle"),
        ] {
            for s in states {
                let pos = list.iter().position(|v| v == s).ok_or(Error::SeaConstraint { what, defect: f64::INFINITY })?;
                list.remove(pos);
            }
        }
        Ok(out)
    }
}

fn mode_value(m: &Mode, reg: &RegularizationSpec, volume: f64, x: &Point) -> [C64; 4] {
    // e^{-ikx} with k0 = sign * omega
    let phase = -(m.sign as f64) * m.omega * x[0] + m.k[0] * x[1] + m.k[1] * x[2] + m.k[2] * x[3];
    let a = C64::from_polar(reg.damping(m.omega) / volume.sqrt(), phase);
    m.spinor.map(|s| s * a)
}

/// The regularized vacuum kernel summed in closed form,
/// `sum_k (kslash + m) / (2 omega V) e^{-2 eps omega} e^{-ik(x-y)}` over the lower shell.
pub fn vacuum_kernel(gamma: &GammaBasis, lattice: &MomentumLattice, reg: &RegularizationSpec, x: &Point, y: &Point) -> CMat {
    let vol = lattice.volume();
    let mut out = CMat::zeros(4, 4);
    let xi = [x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]];
    for k in lattice.vectors() {
        let omega = lattice.omega(&k);
        if omega == 0.0 {
            continue;
        }
        let phase = omega * xi[0] + k[0] * xi[1] + k[1] * xi[2] + k[2] * xi[3];
        let w = C64::from_polar(reg.damping(omega).powi(2) / (2.0 * omega * vol), phase);
        let mut m = gamma.slash_real([-omega, k[0], k[1], k[2]]);
        for i in 0..4 {
            m[(i, i)] += lattice.mass;
        }
        out.axpy(w, &m);
    }
    out
}

/// Push-forward of the weighted sample points under `x -> F(x)`.
pub fn build_cfs(sea: &SeaState, reg: &RegularizationSpec, sample: &[Point], weights: &[f64]) -> Result<CausalFermionSystem> {
    if sample.len() != weights.len() {
        return Err(Error::Shape(format!("{} sample points but {} weights", sample.len(), weights.len())));
    }
    let points: Result<Vec<OperatorPoint>> = par::map(sample, |x| sea.operator_point(reg, x)).into_iter().collect();
    let atoms = points?.into_iter().zip(weights).map(|(point, &weight)| Atom { point, weight }).collect();
    CausalFermionSystem::new(sea.dim(), SEA_SPIN_DIM, DiscreteMeasure::new(atoms)?)
}
