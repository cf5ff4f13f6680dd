//! Dirac matrices in the Dirac representation and chiral projectors.

use crate::linalg::{c, CMat, C64, I, ONE, ZERO};

/// Minkowski metric diag(1, -1, -1, -1).
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chirality {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct GammaBasis {
    pub gamma: [CMat; 4],
    pub gamma5: CMat,
}

fn pauli(k: usize) -> [[C64; 2]; 2] {
    match k {
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        _ => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

impl GammaBasis {
    pub fn dirac() -> Self {
        let g0 = CMat::from_real_diag(&[1.0, 1.0, -1.0, -1.0]);
        let spatial = |k: usize| {
            let s = pauli(k);
            let mut m = CMat::zeros(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j + 2)] = s[i][j];
                    m[(i + 2, j)] = -s[i][j];
                }
            }
            m
        };
        let gamma = [g0, spatial(1), spatial(2), spatial(3)];
        let gamma5 = gamma[0].matmul(&gamma[1]).matmul(&gamma[2]).matmul(&gamma[3]).scale(I);
        let basis = GammaBasis { gamma, gamma5 };
        debug_assert!(basis.clifford_defect() < 1e-14);
        basis
    }

    /// Largest entry of {g^mu, g^nu} - 2 eta^{mu nu} over all ten pairs.
    pub fn clifford_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for mu in 0..4 {
            for nu in mu..4 {
                let a = &self.gamma[mu].matmul(&self.gamma[nu]) + &self.gamma[nu].matmul(&self.gamma[mu]);
                let target = if mu == nu { CMat::identity(4).scale_re(2.0 * ETA[mu]) } else { CMat::zeros(4, 4) };
                worst = worst.max((&a - &target).max_abs());
            }
        }
        worst
    }

    /// The spin inner product is psi^dag gamma^0 phi.
    pub fn spin_form(&self) -> &CMat {
        &self.gamma[0]
    }

    /// Feynman slash p^mu gamma_mu = p^0 g^0 - p^i g^i.
    pub fn slash(&self, p: [C64; 4]) -> CMat {
        let mut m = CMat::zeros(4, 4);
        for (mu, &pm) in p.iter().enumerate() {
            m.axpy(pm * ETA[mu], &self.gamma[mu]);
        }
        m
    }

    pub fn slash_real(&self, p: [f64; 4]) -> CMat {
        self.slash(p.map(|x| c(x, 0.0)))
    }

    /// (1 -+ g5)/2 for left/right.
    pub fn chiral_projector(&self, ch: Chirality) -> CMat {
        let s = match ch {
            Chirality::Left => -0.5,
            Chirality::Right => 0.5,
        };
        let mut m = CMat::identity(4).scale_re(0.5);
        m.axpy(c(s, 0.0), &self.gamma5);
        m
    }

    /// Spin adjoint g0 M^dag g0.
    pub fn spin_adjoint(&self, m: &CMat) -> CMat {
        self.gamma[0].matmul(&m.adjoint()).matmul(&self.gamma[0])
    }
}
