//! Momentum lattice of a periodic box.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceDim {
    /// One spatial direction.
    D1,
    /// Three spatial directions.
    D3,
}

impl SpaceDim {
    pub fn count(self) -> usize {
        match self {
            SpaceDim::D1 => 1,
            SpaceDim::D3 => 3,
        }
    }
}

/// Box of side `extent` with `points` momenta per axis and mass `mass`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumLattice {
    pub extent: f64,
    pub points: usize,
    pub dim: SpaceDim,
    pub mass: f64,
}

/// Integer labels |j| <= (points-1)/2, ascending.
pub fn labels(points: usize) -> Vec<i64> {
    let h = (points.saturating_sub(1) / 2) as i64;
    (-h..=h).collect()
}

/// 2 pi j / extent for the symmetric label range.
pub fn momenta(extent: f64, points: usize) -> Vec<f64> {
    labels(points).into_iter().map(|j| 2.0 * PI * j as f64 / extent).collect()
}

impl MomentumLattice {
    pub fn new(extent: f64, points: usize, dim: SpaceDim, mass: f64) -> Result<Self> {
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::Invalid(format!("box extent must be positive, got {extent}")));
        }
        if points == 0 {
            return Err(Error::Invalid("need at least one momentum per axis".into()));
        }
        if !(mass >= 0.0) {
            return Err(Error::Invalid(format!("mass must be nonnegative, got {mass}")));
        }
        Ok(MomentumLattice { extent, points, dim, mass })
    }

    pub fn one_plus_one(extent: f64, points: usize, mass: f64) -> Result<Self> {
        MomentumLattice::new(extent, points, SpaceDim::D1, mass)
    }

    /// All spatial momentum vectors, padded to three components.
    pub fn vectors(&self) -> Vec<[f64; 3]> {
        let k = momenta(self.extent, self.points);
        match self.dim {
            SpaceDim::D1 => k.iter().map(|&x| [x, 0.0, 0.0]).collect(),
            SpaceDim::D3 => {
                let mut out = Vec::with_capacity(k.len().pow(3));
                for &a in &k {
                    for &b in &k {
                        for &c in &k {
                            out.push([a, b, c]);
                        }
                    }
                }
                out
            }
        }
    }

    pub fn momentum_count(&self) -> usize {
        labels(self.points).len().pow(self.dim.count() as u32)
    }

    pub fn omega(&self, k: &[f64; 3]) -> f64 {
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + self.mass * self.mass).sqrt()
    }

    /// L^d, the box volume.
    pub fn volume(&self) -> f64 {
        self.extent.powi(self.dim.count() as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_labels() {
        assert_eq!(labels(3), vec![-1, 0, 1]);
        assert_eq!(labels(4), vec![-1, 0, 1]);
        assert_eq!(labels(1), vec![0]);
    }

    #[test]
    fn counts() {
        let l = MomentumLattice::new(2.0, 5, SpaceDim::D3, 1.0).unwrap();
        assert_eq!(l.vectors().len(), 125);
        assert_eq!(l.momentum_count(), 125);
        assert!(MomentumLattice::one_plus_one(-1.0, 3, 1.0).is_err());
    }
}
