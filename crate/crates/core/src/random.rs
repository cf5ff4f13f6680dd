//! Seeded random matrices. Everything downstream takes an explicit RNG so runs
//! are reproducible from a single seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{thin_qr, CMat, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Haar-distributed frame with orthonormal columns (`rows >= cols`).
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    loop {
        let g = gaussian_matrix(rng, rows, cols);
        if let Ok((q, r)) = thin_qr(&g, 1e-8) {
            // fix the phases so the distribution is Haar
            let mut q = q;
            for j in 0..cols {
                let d = r[(j, j)];
                if d.norm() > 0.0 {
                    let ph = d / d.norm();
                    for i in 0..rows {
                        q[(i, j)] *= ph;
                    }
                }
            }
            return q;
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    random_frame(rng, n, n)
}

/// Hermitian matrix from the Gaussian unitary ensemble, scaled so that its
/// Frobenius norm is `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = gaussian_matrix(rng, n, n);
    let h = g.hermitian_part();
    let f = h.norm_fro();
    if f == 0.0 {
        h
    } else {
        h.scale_re(scale / f)
    }
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}
