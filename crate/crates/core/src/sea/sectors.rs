//! Direct sums of Dirac seas with a chiral asymmetry matrix and the
//! sectorial projection.

use super::gamma::{Chirality, GammaBasis};
use super::lattice::MomentumLattice;
use super::vacuum::{vacuum_kernel, Point, RegularizationSpec};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// One sector: a Dirac sea per generation mass, optionally followed by a
/// massless right-handed summand.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub masses: Vec<f64>,
    pub right_handed: bool,
}

#[derive(Clone, Debug)]
pub struct SectorKernel {
    gamma: GammaBasis,
    reg: RegularizationSpec,
    tau_reg: f64,
    sectors: Vec<Sector>,
    /// One lattice per summand, sector-major.
    summands: Vec<(usize, MomentumLattice, bool)>,
}

/// Builds the evaluator for `P^aux = X (direct sum of vacua)` on the lattice
/// geometry of `base` (its mass is ignored).
pub fn direct_sum_sectors(
    sectors: &[Sector],
    tau_reg: f64,
    base: &MomentumLattice,
    reg: &RegularizationSpec,
) -> Result<SectorKernel> {
    if sectors.is_empty() {
        return Err(Error::Invalid("need at least one sector".into()));
    }
    if !(tau_reg > 0.0 && tau_reg <= 1.0) {
        return Err(Error::Invalid(format!("tau_reg must lie in (0, 1], got {tau_reg}")));
    }
    let mut summands = Vec::new();
    for (i, s) in sectors.iter().enumerate() {
        if s.masses.is_empty() {
            return Err(Error::Invalid(format!("sector {i} has no generations")));
        }
        for &m in &s.masses {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Invalid(format!("sector {i}: generation masses must be positive, got {m}")));
            }
            summands.push((i, MomentumLattice::new(base.extent, base.points, base.dim, m)?, false));
        }
        if s.right_handed {
            summands.push((i, MomentumLattice::new(base.extent, base.points, base.dim, 0.0)?, true));
        }
    }
    Ok(SectorKernel { gamma: GammaBasis::dirac(), reg: *reg, tau_reg, sectors: sectors.to_vec(), summands })
}

impl SectorKernel {
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// Total number of direct summands.
    pub fn summand_count(&self) -> usize {
        self.summands.len()
    }

    /// Chiral asymmetry factor of summand `b`: identity, or `tau_reg chi_R`
    /// on the massless right-handed summand.
    pub fn asymmetry(&self, b: usize) -> CMat {
        if self.summands[b].2 {
            self.gamma.chiral_projector(Chirality::Right).scale_re(self.tau_reg)
        } else {
            CMat::identity(4)
        }
    }

    fn summand_kernels(&self, x: &Point, y: &Point) -> Vec<CMat> {
        self.summands
            .iter()
            .enumerate()
            .map(|(b, (_, lat, _))| self.asymmetry(b).matmul(&vacuum_kernel(&self.gamma, lat, &self.reg, x, y)))
            .collect()
    }

    /// Block-diagonal `X P^aux(x, y)` of size `4 * summands`.
    pub fn aux_kernel(&self, x: &Point, y: &Point) -> CMat {
        let n = self.summands.len();
        let mut out = CMat::zeros(4 * n, 4 * n);
        for (b, k) in self.summand_kernels(x, y).iter().enumerate() {
            out.set_block(4 * b, 4 * b, k);
        }
        out
    }

    /// Sectorial projection: per sector, the sum over all generation index
    /// pairs of the auxiliary kernel, a 4 x 4 matrix.
    pub fn sectorial(&self, x: &Point, y: &Point) -> Vec<CMat> {
        let mut out = vec![CMat::zeros(4, 4); self.sectors.len()];
        // the auxiliary kernel is diagonal in the generation index
        for ((i, _, _), k) in self.summands.iter().zip(self.summand_kernels(x, y)) {
            out[*i] += &k;
        }
        out
    }
}
