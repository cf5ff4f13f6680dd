//! Operator points, the causal Lagrangian, and the action and constraint
//! functionals over finitely supported measures.

pub mod container;

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, thin_qr, CMat, C64, ZERO};
use crate::par;
use crate::spectral::{self, eigh, Signature};

/// Relative threshold below which eigenvalues of a point are discarded.
pub const SPECTRUM_DROP_TOL: f64 = 1e-14;

/// Default relative threshold for the spacelike test.
pub const CAUSAL_TOL: f64 = 1e-8;

/// A self-adjoint operator `x = V diag(nu) V^dagger` of rank at most `2n` with
/// at most `n` positive and `n` negative eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPoint {
    spin_dim: usize,
    frame: CMat,
    spectrum: Vec<f64>,
}

impl OperatorPoint {
    /// The zero operator on `C^dim`.
    pub fn zero(dim: usize, spin_dim: usize) -> Self {
        OperatorPoint { spin_dim, frame: CMat::zeros(dim, 0), spectrum: Vec::new() }
    }

    /// Factor `x = V diag(nu) V^dagger` for an arbitrary frame with linearly
    /// independent columns. The frame does not need to be orthonormal; the
    /// represented operator is preserved exactly and refactored with an
    /// orthonormal frame.
    pub fn new(frame: &CMat, spectrum: &[f64], spin_dim: usize) -> Result<Self> {
        if frame.cols() != spectrum.len() {
            return Err(Error::Shape(format!(
                "frame has {} columns but {} eigenvalues were given",
                frame.cols(),
                spectrum.len()
            )));
        }
        Self::from_factored(frame, &CMat::from_real_diag(spectrum), spin_dim)
    }

    /// Factor `x = W C W^dagger` with `C` Hermitian.
    pub fn from_factored(w: &CMat, core: &CMat, spin_dim: usize) -> Result<Self> {
        let n_dim = w.rows();
        if spin_dim == 0 {
            return Err(Error::Invalid("spin dimension must be positive".into()));
        }
        if core.rows() != w.cols() || !core.is_square() {
            return Err(Error::Shape("core matrix does not match the frame".into()));
        }
        if w.cols() == 0 {
            return Ok(Self::zero(n_dim, spin_dim));
        }
        if w.cols() > n_dim {
            return Err(Error::RankDeficient);
        }
        let (q, r) = thin_qr(w, 1e-12)?;
        let reduced = r.matmul(core).matmul(&r.adjoint()).hermitian_part();
        let eig = eigh(&reduced)?;
        let top = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let keep: Vec<usize> = (0..eig.values.len())
            .filter(|&k| top > 0.0 && eig.values[k].abs() > SPECTRUM_DROP_TOL * top)
            .collect();
        // Largest modulus first: positive block, then negative block.
        let mut keep = keep;
        keep.sort_by(|&a, &b| {
            let (va, vb) = (eig.values[a], eig.values[b]);
            (vb > 0.0).cmp(&(va > 0.0)).then(vb.abs().partial_cmp(&va.abs()).unwrap())
        });
        let spectrum: Vec<f64> = keep.iter().map(|&k| eig.values[k]).collect();
        let frame = q.matmul(&eig.vectors.select_columns(&keep));
        let point = OperatorPoint { spin_dim, frame, spectrum };
        point.check_signature()?;
        Ok(point)
    }

    /// Take an already orthonormal frame as is. Used when reading stored
    /// systems, where re-orthogonalization would perturb the bits.
    pub fn from_raw_parts(frame: CMat, spectrum: Vec<f64>, spin_dim: usize) -> Result<Self> {
        if frame.cols() != spectrum.len() {
            return Err(Error::Shape("frame and spectrum lengths differ".into()));
        }
        if spectrum.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::Invalid("point spectrum must be finite and nonzero".into()));
        }
        let gram = frame.adjoint_mul(&frame);
        if CMat::dist(&gram, &CMat::identity(frame.cols())) > 1e-12 * (frame.cols().max(1) as f64) {
            return Err(Error::Invalid("frame columns are not orthonormal".into()));
        }
        let p = OperatorPoint { spin_dim, frame, spectrum };
        p.check_signature()?;
        Ok(p)
    }

    fn check_signature(&self) -> Result<()> {
        let s = self.signature();
        if s.positive > self.spin_dim || s.negative > self.spin_dim {
            return Err(Error::Signature { positive: s.positive, negative: s.negative, bound: self.spin_dim });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn rank(&self) -> usize {
        self.spectrum.len()
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn signature(&self) -> Signature {
        Signature {
            positive: self.spectrum.iter().filter(|v| **v > 0.0).count(),
            negative: self.spectrum.iter().filter(|v| **v < 0.0).count(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.spectrum.iter().sum()
    }

    /// The dense `N x N` matrix.
    pub fn to_dense(&self) -> CMat {
        let mut vd = self.frame.clone();
        for j in 0..vd.cols() {
            for i in 0..vd.rows() {
                vd[(i, j)] *= self.spectrum[j];
            }
        }
        vd.matmul(&self.frame.adjoint())
    }

    /// `U x U^dagger` for a unitary `U`.
    pub fn conjugate(&self, u: &CMat) -> OperatorPoint {
        OperatorPoint { spin_dim: self.spin_dim, frame: u.matmul(&self.frame), spectrum: self.spectrum.clone() }
    }

    fn compatible(&self, other: &OperatorPoint) -> Result<()> {
        if self.dim() != other.dim() || self.spin_dim != other.spin_dim {
            return Err(Error::Shape(format!(
                "points live on different spaces (N={}, n={} vs N={}, n={})",
                self.dim(),
                self.spin_dim,
                other.dim(),
                other.spin_dim
            )));
        }
        Ok(())
    }
}

fn scale_columns(m: &mut CMat, s: &[f64]) {
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            m[(i, j)] *= s[j];
        }
    }
}

fn scale_rows(m: &mut CMat, s: &[f64]) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            m[(i, j)] *= s[i];
        }
    }
}

/// `diag(nu_x) (V_x^dagger V_y) diag(nu_y) (V_y^dagger V_x)`, whose spectrum is
/// the nontrivial spectrum of `xy`.
pub fn reduced_product(x: &OperatorPoint, y: &OperatorPoint) -> Result<CMat> {
    x.compatible(y)?;
    let g = x.frame.adjoint_mul(&y.frame);
    let mut left = g.clone();
    scale_rows(&mut left, &x.spectrum);
    scale_columns(&mut left, &y.spectrum);
    Ok(left.matmul(&g.adjoint()))
}

fn pad(mut values: Vec<C64>, len: usize) -> Vec<C64> {
    values.resize(len.max(values.len()), ZERO);
    values.sort_by(spectral::compare_complex);
    values
}

/// The `2n` eigenvalues of `xy` that can be nonzero, zero-padded, sorted.
pub fn product_spectrum(x: &OperatorPoint, y: &OperatorPoint) -> Result<Vec<C64>> {
    let m = reduced_product(x, y)?;
    Ok(pad(spectral::eigenvalues(&m)?, 2 * x.spin_dim))
}

/// Kernel of the fermionic projector, `V_x^dagger y V_y = (V_x^dagger V_y) diag(nu_y)`.
pub fn kernel(x: &OperatorPoint, y: &OperatorPoint) -> Result<CMat> {
    x.compatible(y)?;
    let mut g = x.frame.adjoint_mul(&y.frame);
    scale_columns(&mut g, &y.spectrum);
    Ok(g)
}

/// Closed chain `A_xy = P(x,y) P(y,x)` on the spin space at `x`.
pub fn closed_chain(x: &OperatorPoint, y: &OperatorPoint) -> Result<CMat> {
    Ok(kernel(x, y)?.matmul(&kernel(y, x)?))
}

/// `L = sum |l|^2 - (sum |l|)^2 / 2n`, evaluated as the variance form
/// `sum (|l| - mean)^2` so it is nonnegative by construction.
pub fn lagrangian_from_spectrum(values: &[C64], spin_dim: usize) -> f64 {
    lagrangian_mu_from_spectrum(values, spin_dim, None)
}

/// `L_mu = sum |l|^2 - mu (sum |l|)^2`; `None` means `mu = 1/2n`.
pub fn lagrangian_mu_from_spectrum(values: &[C64], spin_dim: usize, mu: Option<f64>) -> f64 {
    let count = 2 * spin_dim;
    let moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    let sum: f64 = moduli.iter().sum();
    let mu = mu.filter(|&m| m != 1.0 / count as f64);
    match mu {
        None => {
            let mean = sum / count as f64;
            let padded_zeros = count.saturating_sub(moduli.len()) as f64;
            moduli.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() + padded_zeros * mean * mean
        }
        Some(mu) => {
            let sq: f64 = moduli.iter().map(|m| m * m).sum();
            let l = sq - mu * sum * sum;
            if l < 0.0 && l > -1e-12 * sq {
                0.0
            } else {
                l
            }
        }
    }
}

pub fn lagrangian(x: &OperatorPoint, y: &OperatorPoint) -> Result<f64> {
    Ok(lagrangian_from_spectrum(&product_spectrum(x, y)?, x.spin_dim))
}

pub fn lagrangian_mu(x: &OperatorPoint, y: &OperatorPoint, mu: f64) -> Result<f64> {
    Ok(lagrangian_mu_from_spectrum(&product_spectrum(x, y)?, x.spin_dim, Some(mu)))
}

/// All pairwise spectral data for one ordered pair.
#[derive(Clone, Debug)]
pub struct PairData {
    pub lambda: Vec<C64>,
    /// `2n x 2n`, zero-padded beyond the actual ranks.
    pub kernel_xy: CMat,
    pub lagrangian: f64,
}

pub fn pair_data(x: &OperatorPoint, y: &OperatorPoint) -> Result<PairData> {
    let lambda = product_spectrum(x, y)?;
    let k = kernel(x, y)?;
    let size = 2 * x.spin_dim;
    let mut kernel_xy = CMat::zeros(size, size);
    kernel_xy.set_block(0, 0, &k);
    let lagrangian = lagrangian_from_spectrum(&lambda, x.spin_dim);
    Ok(PairData { lambda, kernel_xy, lagrangian })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Separation {
    Spacelike,
    NonSpacelike,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub separation: Separation,
    /// Set when the whole spectrum vanishes and the test is vacuous.
    pub degenerate: bool,
}

pub fn classify_spectrum(values: &[C64], spin_dim: usize, tau_causal: f64) -> Classification {
    let weight = spectral::spectral_weight(values);
    let l = lagrangian_from_spectrum(values, spin_dim);
    let separation = if l <= tau_causal * weight * weight / (2 * spin_dim) as f64 {
        Separation::Spacelike
    } else {
        Separation::NonSpacelike
    };
    Classification { separation, degenerate: weight == 0.0 }
}

pub fn causal_classify(x: &OperatorPoint, y: &OperatorPoint, tau_causal: f64) -> Result<Classification> {
    Ok(classify_spectrum(&product_spectrum(x, y)?, x.spin_dim, tau_causal))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: OperatorPoint,
    pub weight: f64,
}

/// Finitely supported measure on operator points.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if let Some(first) = atoms.first() {
            for a in &atoms {
                if !(a.weight > 0.0) || !a.weight.is_finite() {
                    return Err(Error::Invalid(format!("atom weight {} is not positive", a.weight)));
                }
                first.point.compatible(&a.point)?;
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn points(&self) -> Vec<&OperatorPoint> {
        self.atoms.iter().map(|a| &a.point).collect()
    }
}

/// `(H, F, rho)` with `H = C^N`, spin dimension `n` and a discrete measure.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalFermionSystem {
    dim: usize,
    spin_dim: usize,
    measure: DiscreteMeasure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraints {
    pub volume: f64,
    pub trace: f64,
    pub boundedness: f64,
}

impl CausalFermionSystem {
    pub fn new(dim: usize, spin_dim: usize, measure: DiscreteMeasure) -> Result<Self> {
        for a in measure.atoms() {
            if a.point.dim() != dim || a.point.spin_dim() != spin_dim {
                return Err(Error::Shape(format!(
                    "atom lives on N={}, n={} but the system has N={dim}, n={spin_dim}",
                    a.point.dim(),
                    a.point.spin_dim()
                )));
            }
        }
        Ok(CausalFermionSystem { dim, spin_dim, measure })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    /// Product spectra for all ordered pairs `(a, b)`, row-major.
    pub fn pair_spectra(&self) -> Result<Vec<Vec<C64>>> {
        let atoms = self.measure.atoms();
        let n = atoms.len();
        par::map_range(n * n, |k| product_spectrum(&atoms[k / n].point, &atoms[k % n].point))
            .into_iter()
            .collect()
    }

    /// Causal action `S = sum_ab w_a w_b L(x_a, x_b)`, diagonal included.
    pub fn action(&self) -> Result<f64> {
        self.weighted_pair_sum(|lam, n| lagrangian_from_spectrum(lam, n))
    }

    /// `S_mu = sum_ab w_a w_b L_mu(x_a, x_b)`.
    pub fn action_mu(&self, mu: f64) -> Result<f64> {
        self.weighted_pair_sum(|lam, n| lagrangian_mu_from_spectrum(lam, n, Some(mu)))
    }

    pub fn constraints(&self) -> Result<Constraints> {
        let atoms = self.measure.atoms();
        let vols: Vec<f64> = atoms.iter().map(|a| a.weight).collect();
        let traces: Vec<f64> = atoms.iter().map(|a| a.weight * a.point.trace()).collect();
        let boundedness = self.weighted_pair_sum(|lam, _| {
            let w = spectral::spectral_weight(lam);
            w * w
        })?;
        Ok(Constraints { volume: pairwise_sum(&vols), trace: pairwise_sum(&traces), boundedness })
    }

    fn weighted_pair_sum(&self, f: impl Fn(&[C64], usize) -> f64 + Sync + Send) -> Result<f64> {
        let atoms = self.measure.atoms();
        let n = atoms.len();
        let spin = self.spin_dim;
        let terms: Result<Vec<f64>> = par::map_range(n * n, |k| {
            let (a, b) = (&atoms[k / n], &atoms[k % n]);
            let lam = product_spectrum(&a.point, &b.point)?;
            Ok(a.weight * b.weight * f(&lam, spin))
        })
        .into_iter()
        .collect();
        Ok(pairwise_sum(&terms?))
    }
}
