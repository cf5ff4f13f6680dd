//! Pair statistics of the causal Lagrangian by Minkowski separation.

use rand::Rng;

use super::continuum::minkowski_square;
use super::lattice::SpaceDim;
use super::vacuum::{Point, RegularizationSpec, SeaState, SEA_SPIN_DIM};
use crate::error::Result;
use crate::linalg::CMat;
use crate::par;
use crate::spectral;
use crate::system::lagrangian_from_spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairClass {
    Spacelike,
    Timelike,
    /// |xi^2| below the light-cone margin.
    NearCone,
}

impl PairClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PairClass::Spacelike => "spacelike",
            PairClass::Timelike => "timelike",
            PairClass::NearCone => "near-cone",
        }
    }

    pub fn of(xi: &Point, margin: f64) -> PairClass {
        let s = minkowski_square(xi);
        if s.abs() < margin {
            PairClass::NearCone
        } else if s < 0.0 {
            PairClass::Spacelike
        } else {
            PairClass::Timelike
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSample {
    pub a: usize,
    pub b: usize,
    pub xi2: f64,
    pub class: PairClass,
    pub lagrangian: f64,
}

/// Uniform points in `[0, t_max] x [0, x_max]^d`, unused axes zero.
pub fn sample_points<R: Rng + ?Sized>(g: &mut R, count: usize, t_max: f64, x_max: f64, dim: SpaceDim) -> Vec<Point> {
    (0..count)
        .map(|_| {
            let mut p = [0.0; 4];
            p[0] = g.gen::<f64>() * t_max;
            for v in p.iter_mut().skip(1).take(dim.count()) {
                *v = g.gen::<f64>() * x_max;
            }
            p
        })
        .collect()
}

/// L(x_a, x_b) for all a < b from the 4 x 4 closed chains of the kernel.
pub fn pair_lagrangians(sea: &SeaState, reg: &RegularizationSpec, points: &[Point], margin: f64) -> Result<Vec<PairSample>> {
    let waves: Vec<CMat> = par::map(points, |x| sea.wave_matrix(reg, x));
    let pairs: Vec<(usize, usize)> = (0..points.len()).flat_map(|a| (a + 1..points.len()).map(move |b| (a, b))).collect();
    par::map(&pairs, |&(a, b)| {
        let (x, y) = (&points[a], &points[b]);
        let pxy = sea.kernel_from_waves(reg, &waves[a], &waves[b], x, y);
        let pyx = sea.kernel_from_waves(reg, &waves[b], &waves[a], y, x);
        let vals = spectral::eigenvalues(&pxy.matmul(&pyx))?;
        let xi = [y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3]];
        Ok(PairSample {
            a,
            b,
            xi2: minkowski_square(&xi),
            class: PairClass::of(&xi, margin),
            lagrangian: lagrangian_from_spectrum(&vals, SEA_SPIN_DIM),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassStats {
    pub class: PairClass,
    pub count: usize,
    pub mean: f64,
    pub max: f64,
}

pub fn class_stats(samples: &[PairSample]) -> Vec<ClassStats> {
    [PairClass::Spacelike, PairClass::Timelike, PairClass::NearCone]
        .into_iter()
        .map(|class| {
            let ls: Vec<f64> = samples.iter().filter(|s| s.class == class).map(|s| s.lagrangian).collect();
            let mean = if ls.is_empty() { f64::NAN } else { ls.iter().sum::<f64>() / ls.len() as f64 };
            ClassStats { class, count: ls.len(), mean, max: ls.iter().copied().fold(0.0, f64::max) }
        })
        .collect()
}

/// Mean L over spacelike pairs divided by mean L over timelike pairs.
pub fn suppression_ratio(samples: &[PairSample]) -> f64 {
    let st = class_stats(samples);
    st[0].mean / st[1].mean
}
