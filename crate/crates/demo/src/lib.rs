//! wasm-bindgen wrappers for the static page in `www/`.
//!
//! Errors come back as `Err(String)`, which JS sees as a thrown string.

use cfslab::lightcone::{ordered_exp, FnPath, PexpMethod, MAX_DYSON_ORDER};
use cfslab::linalg::{CMat, C64};
use cfslab::optimize::random_point;
use cfslab::random::{gaussian_matrix, rng, uniform};
use cfslab::sea::lattice::MomentumLattice;
use cfslab::sea::sweep::pair_lagrangians;
use cfslab::sea::vacuum::{build_sea, RegularizationSpec};
use cfslab::spectral::eigenvalues_dense;
use cfslab::system::{causal_classify, closed_chain, lagrangian, Separation};
use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Closed-chain spectrum and Lagrangian of a random pair of operator points.
#[wasm_bindgen]
pub struct PairReport {
    re: Vec<f64>,
    im: Vec<f64>,
    lagrangian: f64,
    spacelike: bool,
}

#[wasm_bindgen]
impl PairReport {
    #[wasm_bindgen(getter)]
    pub fn re(&self) -> Vec<f64> {
        self.re.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn im(&self) -> Vec<f64> {
        self.im.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn lagrangian(&self) -> f64 {
        self.lagrangian
    }
    #[wasm_bindgen(getter)]
    pub fn spacelike(&self) -> bool {
        self.spacelike
    }
}

#[wasm_bindgen]
pub fn random_pair(seed: u32, dim: usize, spin: usize, max_modulus: f64) -> Result<PairReport, String> {
    if spin == 0 || 2 * spin > dim || dim > 64 {
        return Err("need 1 <= spin, 2 spin <= dim <= 64".into());
    }
    let mut g = rng(seed as u64);
    let x = random_point(&mut g, dim, spin, max_modulus).map_err(js)?;
    let y = random_point(&mut g, dim, spin, max_modulus).map_err(js)?;
    let eig = eigenvalues_dense(&closed_chain(&x, &y).map_err(js)?).map_err(js)?;
    let mut vals = eig.values;
    vals.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    vals.truncate(2 * spin);
    Ok(PairReport {
        re: vals.iter().map(|z| z.re).collect(),
        im: vals.iter().map(|z| z.im).collect(),
        lagrangian: lagrangian(&x, &y).map_err(js)?,
        spacelike: causal_classify(&x, &y, 1e-10).map_err(js)?.separation == Separation::Spacelike,
    })
}

/// L(0, (t, x)) of the regularized 1+1 vacuum for each `t` in `times`.
#[wasm_bindgen]
pub fn vacuum_profile(x: f64, times: Vec<f64>, epsilon: f64, points: usize, extent: f64, mass: f64) -> Result<Vec<f64>, String> {
    if points > 512 {
        return Err("at most 512 momenta".into());
    }
    let sea = build_sea(&MomentumLattice::one_plus_one(extent, points, mass).map_err(js)?).map_err(js)?;
    let reg = RegularizationSpec::new(epsilon).map_err(js)?;
    times
        .iter()
        .map(|&t| {
            let s = pair_lagrangians(&sea, &reg, &[[0.0; 4], [t, x, 0.0, 0.0]], 0.0).map_err(js)?;
            Ok(s[0].lagrangian)
        })
        .collect()
}

/// Error of the Dyson series of orders 0..=max_order against the adaptive
/// integrator, for a random smooth family of `dim x dim` matrices.
#[wasm_bindgen]
pub fn dyson_errors(seed: u32, dim: usize, strength: f64, max_order: usize) -> Result<Vec<f64>, String> {
    if dim == 0 || dim > 16 || max_order > MAX_DYSON_ORDER {
        return Err(format!("need 1 <= dim <= 16 and order <= {MAX_DYSON_ORDER}"));
    }
    let mut g = rng(seed as u64);
    let a: [CMat; 3] = std::array::from_fn(|_| {
        let m = gaussian_matrix(&mut g, dim, dim);
        let n = m.norm_fro();
        m.scale_re(strength / (3.0 * n))
    });
    let w = uniform(&mut g, 0.5, 3.0);
    let path = FnPath::new(dim, |t: f64| {
        let mut m = a[0].clone();
        m.axpy(C64::new((w * t).sin(), 0.0), &a[1]);
        m.axpy(C64::new(t * t, 0.0), &a[2]);
        m
    });
    let exact = ordered_exp(&path, 0.0, 1.0, PexpMethod::Ode { tol: 1e-12 }).map_err(js)?;
    (0..=max_order)
        .map(|o| Ok(CMat::dist(&ordered_exp(&path, 0.0, 1.0, PexpMethod::dyson(o)).map_err(js)?, &exact)))
        .collect()
}
