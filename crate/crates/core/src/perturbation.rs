//! Causal perturbation theory for finite matrix models: resolvents, Neumann
//! series, the contour-integral sea projector and lattice Green's functions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::par;
use crate::random::{random_hermitian, random_unitary};
use crate::sea::gamma::GammaBasis;
use crate::sea::lattice::momenta;
use crate::spectral::eigh;
use crate::system::container::{fmt_f64, Lines};

/// Tolerance for the idealized algebra k^2 = p, p^2 = p.
pub const MODEL_TOL: f64 = 1e-10;
/// Eigenvalues of the perturbed operator closer than this to the contour abort.
pub const CONTOUR_CLEARANCE: f64 = 1e-6;

/// Matrix triple (k, p, dk) with k^2 = p = p^2.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSeaModel {
    k: CMat,
    p: CMat,
    dk: CMat,
    dk_norm: f64,
    /// Which of the eigenvalues 1, -1, 0 of k occur.
    clusters: [bool; 3],
}

impl FiniteSeaModel {
    pub fn new(k: CMat, p: CMat, dk: CMat) -> Result<Self> {
        let d = k.rows();
        for (name, m) in [("k", &k), ("p", &p), ("dk", &dk)] {
            if m.shape() != (d, d) {
                return Err(Error::Shape(format!("{name} is {:?}, expected {d}x{d}", m.shape())));
            }
            if !m.is_hermitian(MODEL_TOL) {
                return Err(Error::NotHermitian { defect: m.hermitian_defect() });
            }
        }
        let scale = 1.0 + p.norm_fro();
        let d1 = CMat::dist(&k.matmul(&k), &p);
        let d2 = CMat::dist(&p.matmul(&p), &p);
        if d1 > MODEL_TOL * scale || d2 > MODEL_TOL * scale {
            return Err(Error::Invalid(format!("model algebra violated: |k^2-p| = {d1:e}, |p^2-p| = {d2:e}")));
        }
        let half = |m: CMat| m.trace().re * 0.5;
        let plus = half(&p + &k);
        let minus = half(&p - &k);
        let null = d as f64 - p.trace().re;
        let clusters = [plus > 0.5, minus > 0.5, null > 0.5];
        let dk_norm = dk.norm_2();
        Ok(FiniteSeaModel { k, p, dk, dk_norm, clusters })
    }

    /// k = U diag(signs) U^dag with a random unitary and the given entries
    /// from {-1, 0, 1}; dk random Hermitian with operator norm `strength`.
    pub fn random<R: Rng + ?Sized>(g: &mut R, signs: &[i8], strength: f64) -> Result<Self> {
        let d = signs.len();
        let u = random_unitary(g, d);
        let kd: Vec<f64> = signs.iter().map(|&s| s as f64).collect();
        let pd: Vec<f64> = signs.iter().map(|&s| (s as f64).abs()).collect();
        let conj = |diag: &[f64]| u.matmul(&CMat::from_real_diag(diag)).matmul(&u.adjoint()).hermitian_part();
        let h = random_hermitian(g, d, 1.0);
        let n = h.norm_2();
        let dk = if n > 0.0 { h.scale_re(strength / n) } else { h };
        FiniteSeaModel::new(conj(&kd), conj(&pd), dk)
    }

    pub fn dim(&self) -> usize {
        self.k.rows()
    }

    pub fn k(&self) -> &CMat {
        &self.k
    }

    pub fn p(&self) -> &CMat {
        &self.p
    }

    pub fn dk(&self) -> &CMat {
        &self.dk
    }

    pub fn with_dk(&self, dk: CMat) -> Result<Self> {
        FiniteSeaModel::new(self.k.clone(), self.p.clone(), dk)
    }

    pub fn k_tilde(&self) -> CMat {
        &self.k + &self.dk
    }
}

/// Circle `|lambda - center| = radius` traversed counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl Default for Contour {
    fn default() -> Self {
        Contour { center: c(-1.0, 0.0), radius: 0.5, nodes: 64 }
    }
}

impl Contour {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || self.nodes < 3 {
            return Err(Error::Invalid(format!("contour needs radius > 0 and >= 3 nodes, got {self:?}")));
        }
        if (self.center - 1.0).norm() <= self.radius || self.center.norm() <= self.radius {
            return Err(Error::Invalid("contour must leave +1 and 0 outside".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.nodes).map(|j| self.center + C64::from_polar(self.radius, 2.0 * PI * j as f64 / self.nodes as f64)).collect()
    }

    pub fn encloses(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

fn check_pole(lambda: C64) -> Result<()> {
    for pole in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)] {
        if (lambda - pole).norm() < 1e-14 {
            return Err(Error::ResolventPole(lambda));
        }
    }
    Ok(())
}

/// (k - lambda)^{-1} in closed form:
/// (p+k)/2 / (1-lambda) + (p-k)/2 / (-1-lambda) - (1-p)/lambda.
pub fn unperturbed_resolvent(model: &FiniteSeaModel, lambda: C64) -> Result<CMat> {
    check_pole(lambda)?;
    let d = model.dim();
    let plus = (&model.p + &model.k).scale_re(0.5);
    let minus = (&model.p - &model.k).scale_re(0.5);
    let null = &CMat::identity(d) - &model.p;
    let mut r = plus.scale(1.0 / (1.0 - lambda));
    r.axpy(1.0 / (-1.0 - lambda), &minus);
    r.axpy(-1.0 / lambda, &null);
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct NeumannResolvent {
    pub value: CMat,
    /// ||R||_2 ||dk||_2, a bound on the contraction factor ||R dk||_2.
    pub ratio: f64,
    /// ratio^{order+1} / (1 - ratio) ||R||_2, bounds ||value - exact||_2.
    pub tail_bound: f64,
}

/// sum_{n=0}^{order} (-R dk)^n R.
pub fn neumann_resolvent(model: &FiniteSeaModel, lambda: C64, order: usize) -> Result<NeumannResolvent> {
    let r = unperturbed_resolvent(model, lambda)?;
    let t = r.matmul(&model.dk).scale_re(-1.0);
    // R is normal with eigenvalues 1/(c - lambda) over the clusters c of k
    let r_norm = [1.0, -1.0, 0.0]
        .iter()
        .zip(model.clusters)
        .filter(|(_, present)| *present)
        .map(|(&c0, _)| 1.0 / (c(c0, 0.0) - lambda).norm())
        .fold(0.0, f64::max);
    let ratio = r_norm * model.dk_norm;
    if ratio >= 1.0 {
        return Err(Error::NeumannDivergent { norm: ratio, lambda });
    }
    let mut term = r.clone();
    let mut value = r.clone();
    for _ in 0..order {
        term = t.matmul(&term);
        value += &term;
    }
    let tail_bound = ratio.powi(order as i32 + 1) / (1.0 - ratio) * r_norm;
    Ok(NeumannResolvent { value, ratio, tail_bound })
}

/// How the perturbed resolvent is evaluated on the contour nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expansion {
    Neumann { order: usize },
    /// LU solve of (k + dk - lambda).
    Direct,
}

fn perturbed_resolvent(model: &FiniteSeaModel, lambda: C64, how: Expansion) -> Result<CMat> {
    match how {
        Expansion::Neumann { order } => Ok(neumann_resolvent(model, lambda, order)?.value),
        Expansion::Direct => {
            let mut a = model.k_tilde();
            for i in 0..a.rows() {
                a[(i, i)] -= lambda;
            }
            a.inverse()
        }
    }
}

/// Aborts if an eigenvalue of k + dk lies within [`CONTOUR_CLEARANCE`] of the circle.
pub fn check_contour_clearance(model: &FiniteSeaModel, contour: &Contour) -> Result<()> {
    contour.validate()?;
    let e = eigh(&model.k_tilde().hermitian_part())?;
    for &l in &e.values {
        let dist = ((c(l, 0.0) - contour.center).norm() - contour.radius).abs();
        if dist < CONTOUR_CLEARANCE {
            return Err(Error::ContourTooClose { eigenvalue: l, distance: dist });
        }
    }
    Ok(())
}

/// P = -(1/2 pi i) contour-integral of (-lambda) R~_lambda, trapezoid rule:
/// (1/n) sum_j lambda_j R~_j rho e^{i theta_j}.
pub fn contour_sea_projector(model: &FiniteSeaModel, contour: &Contour, how: Expansion) -> Result<CMat> {
    check_contour_clearance(model, contour)?;
    contour_sum(contour, model.dim(), |lambda| Ok(perturbed_resolvent(model, lambda, how)?.scale(lambda)))
}

fn contour_sum(contour: &Contour, d: usize, f: impl Fn(C64) -> Result<CMat> + Sync + Send) -> Result<CMat> {
    let pts = contour.points();
    let terms = par::map(&pts, |&lambda| f(lambda).map(|m| m.scale((lambda - contour.center) / contour.nodes as f64)));
    let mut acc = CMat::zeros(d, d);
    for t in terms {
        acc += &t?;
    }
    Ok(acc)
}

/// Directional derivative of the sea projector along `direction` (a change of dk):
/// the contour integral of lambda (-R~ E R~).
pub fn contour_sea_projector_derivative(model: &FiniteSeaModel, contour: &Contour, direction: &CMat) -> Result<CMat> {
    check_contour_clearance(model, contour)?;
    contour_sum(contour, model.dim(), |lambda| {
        let r = perturbed_resolvent(model, lambda, Expansion::Direct)?;
        Ok(r.matmul(direction).matmul(&r).scale(-lambda))
    })
}

/// -sum_{lambda_i inside} lambda_i Pi_i from the eigendecomposition of k + dk.
pub fn spectral_sea_projector(model: &FiniteSeaModel, contour: &Contour) -> Result<CMat> {
    let e = eigh(&model.k_tilde().hermitian_part())?;
    let d = model.dim();
    let mut p = CMat::zeros(d, d);
    for (i, &l) in e.values.iter().enumerate() {
        if contour.encloses(c(l, 0.0)) {
            let v = e.vector(i);
            for a in 0..d {
                for b in 0..d {
                    p[(a, b)] += -l * v[a] * v[b].conj();
                }
            }
        }
    }
    Ok(p)
}

/// Finite-model Dirac operator 1 - p~, with p~ the spectral projector of
/// k + dk onto |lambda| > 1/2. It annihilates exactly the +-1 clusters.
pub fn finite_dirac_operator(model: &FiniteSeaModel) -> Result<CMat> {
    let e = eigh(&model.k_tilde().hermitian_part())?;
    let d = model.dim();
    let mut m = CMat::identity(d);
    for (i, &l) in e.values.iter().enumerate() {
        if l.abs() > 0.5 {
            let v = e.vector(i);
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] -= v[a] * v[b].conj();
                }
            }
        }
    }
    Ok(m)
}

/// ||D P||_F / ||P||_F (zero for P = 0).
pub fn dirac_identity_residual(p_sea: &CMat, d_full: &CMat) -> Result<f64> {
    if p_sea.shape() != d_full.shape() {
        return Err(Error::Shape(format!("P is {:?}, D is {:?}", p_sea.shape(), d_full.shape())));
    }
    let n = p_sea.norm_fro();
    Ok(if n == 0.0 { 0.0 } else { d_full.matmul(p_sea).norm_fro() / n })
}

/// ||P^2 - P||_F; zero iff every enclosed eigenvalue is exactly -1.
pub fn idempotency_defect(p_sea: &CMat) -> f64 {
    CMat::dist(&p_sea.matmul(p_sea), p_sea)
}

/// Advanced and retarded Green's functions of a block-diagonal Dirac model.
#[derive(Clone, Debug)]
pub struct GreensPair {
    pub s_adv: CMat,
    pub s_ret: CMat,
    /// The unregularized operator D - m.
    pub dirac: CMat,
    /// Spin form, one gamma^0 block per momentum.
    pub spin_form: CMat,
    /// Frequency k^0 of each 4x4 block.
    pub frequencies: Vec<f64>,
}

/// 1+1 free Dirac model on a (k^0, k^1) momentum grid. Blocks are
/// (kslash - m)^{-1} with k^0 -> k^0 - i nu (advanced) and k^0 + i nu (retarded).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeDiracModel {
    pub mass: f64,
    pub nu: f64,
    pub time_extent: f64,
    pub time_points: usize,
    pub space_extent: f64,
    pub space_points: usize,
}

impl LatticeDiracModel {
    pub fn greens_pair(&self) -> Result<GreensPair> {
        if !(self.nu > 0.0) {
            return Err(Error::Invalid(format!("nu must be positive, got {}", self.nu)));
        }
        let gb = GammaBasis::dirac();
        let k0s = momenta(self.time_extent, self.time_points);
        let k1s = momenta(self.space_extent, self.space_points);
        let blocks = k0s.len() * k1s.len();
        let d = 4 * blocks;
        let mut s_adv = CMat::zeros(d, d);
        let mut s_ret = CMat::zeros(d, d);
        let mut dirac = CMat::zeros(d, d);
        let mut spin_form = CMat::zeros(d, d);
        let mut frequencies = Vec::with_capacity(blocks);
        let mut b = 0;
        for &k0 in &k0s {
            for &k1 in &k1s {
                let op = |z: C64| {
                    let mut m = gb.slash([z, c(k1, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
                    for i in 0..4 {
                        m[(i, i)] -= self.mass;
                    }
                    m
                };
                s_adv.set_block(4 * b, 4 * b, &op(c(k0, -self.nu)).inverse()?);
                s_ret.set_block(4 * b, 4 * b, &op(c(k0, self.nu)).inverse()?);
                dirac.set_block(4 * b, 4 * b, &op(c(k0, 0.0)));
                spin_form.set_block(4 * b, 4 * b, &gb.gamma[0]);
                frequencies.push(k0);
                b += 1;
            }
        }
        Ok(GreensPair { s_adv, s_ret, dirac, spin_form, frequencies })
    }
}

impl GreensPair {
    pub fn dim(&self) -> usize {
        self.s_adv.rows()
    }

    /// S M^dag S.
    pub fn krein_adjoint(&self, m: &CMat) -> CMat {
        self.spin_form.matmul(&m.adjoint()).matmul(&self.spin_form)
    }

    /// p: k times sign(k^0) block by block.
    pub fn p_from_k(&self, k: &CMat) -> CMat {
        let mut p = k.clone();
        for (b, &w) in self.frequencies.iter().enumerate() {
            let s = if w > 0.0 {
                1.0
            } else if w < 0.0 {
                -1.0
            } else {
                0.0
            };
            for i in 0..4 {
                for j in 0..p.cols() {
                    p[(4 * b + i, j)] *= s;
                }
            }
        }
        p
    }
}

/// (s_adv - s_ret) / (2 pi i).
pub fn causal_fundamental(g: &GreensPair) -> CMat {
    (&g.s_adv - &g.s_ret).scale(c(0.0, -1.0 / (2.0 * PI)))
}

#[derive(Clone, Debug)]
pub struct GreensSeries {
    pub s_adv: CMat,
    pub s_ret: CMat,
    /// Order-n terms (-s B)^n s, n = 0..=order.
    pub adv_terms: Vec<CMat>,
    pub ret_terms: Vec<CMat>,
    /// ||s_adv B||_2 and ||s_ret B||_2.
    pub ratios: (f64, f64),
}

/// Relative defect of (D + B - m) X = X^* (D + B - m).
pub fn causality_compatibility_defect(g: &GreensPair, b: &CMat, x: &CMat) -> f64 {
    let op = &g.dirac + b;
    let lhs = op.matmul(x);
    let rhs = g.krein_adjoint(x).matmul(&op);
    CMat::dist(&lhs, &rhs) / (op.norm_fro() * x.norm_fro()).max(f64::MIN_POSITIVE)
}

/// s~ = sum_n (-s B)^n s for both Green's functions. With `x` given, the
/// causality compatibility condition is checked first and its violation is an error.
pub fn greens_series(g: &GreensPair, b: &CMat, order: usize, x: Option<&CMat>) -> Result<GreensSeries> {
    if b.shape() != g.s_adv.shape() {
        return Err(Error::Shape(format!("B is {:?}, model is {:?}", b.shape(), g.s_adv.shape())));
    }
    if let Some(x) = x {
        let defect = causality_compatibility_defect(g, b, x);
        if defect > 1e-10 {
            return Err(Error::Invalid(format!("causality compatibility violated, relative defect {defect:e}")));
        }
    }
    let series = |s: &CMat| {
        let t = s.matmul(b).scale_re(-1.0);
        let mut terms = vec![s.clone()];
        for n in 0..order {
            let next = t.matmul(&terms[n]);
            terms.push(next);
        }
        let mut sum = CMat::zeros(s.rows(), s.cols());
        for t in &terms {
            sum += t;
        }
        (sum, terms, t.norm_2())
    };
    let (s_adv, adv_terms, ra) = series(&g.s_adv);
    let (s_ret, ret_terms, rr) = series(&g.s_ret);
    Ok(GreensSeries { s_adv, s_ret, adv_terms, ret_terms, ratios: (ra, rr) })
}

pub const MODEL_HEADER: &str = "sea-model 1";

/// Plain-text model container: header, `dim d`, then `k`, `p`, `dk`
/// sections of d rows of re/im pairs.
pub fn write_model(model: &FiniteSeaModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_HEADER}");
    let _ = writeln!(s, "dim {}", model.dim());
    for (name, m) in [("k", &model.k), ("p", &model.p), ("dk", &model.dk)] {
        let _ = writeln!(s, "{name}");
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|z| format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    s
}

pub fn read_model(text: &str) -> Result<FiniteSeaModel> {
    let mut lines = Lines::new(text);
    let head = lines.next_line()?;
    if head != MODEL_HEADER {
        return Err(lines.err(format!("unsupported header `{head}`, expected `{MODEL_HEADER}`")));
    }
    let d = lines.keyed_usize("dim")?;
    let mut mats = Vec::with_capacity(3);
    for name in ["k", "p", "dk"] {
        lines.keyed(name)?;
        let rows: Result<Vec<Vec<C64>>> = (0..d).map(|_| lines.complex_row(d)).collect();
        mats.push(CMat::from_rows(&rows?));
    }
    lines.finish()?;
    let dk = mats.pop().expect("three matrices");
    let p = mats.pop().expect("three matrices");
    let k = mats.pop().expect("three matrices");
    FiniteSeaModel::new(k, p, dk)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_model(k: &[f64], p: &[f64]) -> FiniteSeaModel {
        FiniteSeaModel::new(CMat::from_real_diag(k), CMat::from_real_diag(p), CMat::zeros(k.len(), k.len())).unwrap()
    }

    #[test]
    fn resolvent_closed_form_examples() {
        let m = diag_model(&[1.0, -1.0], &[1.0, 1.0]);
        let r = unperturbed_resolvent(&m, c(0.0, 1.0)).unwrap();
        let mut a = m.k().clone();
        a[(0, 0)] -= c(0.0, 1.0);
        a[(1, 1)] -= c(0.0, 1.0);
        assert!(CMat::dist(&r, &a.inverse().unwrap()) < 1e-12);
        let z = diag_model(&[0.0, 0.0], &[0.0, 0.0]);
        let r = unperturbed_resolvent(&z, c(2.0, 0.0)).unwrap();
        assert!(CMat::dist(&r, &CMat::identity(2).scale_re(-0.5)) < 1e-15);
        assert!(matches!(unperturbed_resolvent(&z, c(0.0, 0.0)), Err(Error::ResolventPole(_))));
    }

    #[test]
    fn unperturbed_sea_is_negative_block() {
        let m = diag_model(&[1.0, -1.0], &[1.0, 1.0]);
        let p = contour_sea_projector(&m, &Contour::default(), Expansion::Neumann { order: 4 }).unwrap();
        assert!(CMat::dist(&p, &CMat::from_real_diag(&[0.0, 1.0])) < 1e-14);
    }

    #[test]
    fn rejects_bad_contour_and_algebra() {
        let bad = Contour { center: c(0.0, 0.0), radius: 0.5, nodes: 64 };
        assert!(bad.validate().is_err());
        let k = CMat::from_real_diag(&[2.0]);
        assert!(FiniteSeaModel::new(k, CMat::identity(1), CMat::zeros(1, 1)).is_err());
    }

    #[test]
    fn eigenvalue_on_contour_aborts() {
        let m = FiniteSeaModel::new(
            CMat::from_real_diag(&[-1.0]),
            CMat::identity(1),
            CMat::from_real_diag(&[0.5]),
        )
        .unwrap();
        assert!(matches!(
            contour_sea_projector(&m, &Contour::default(), Expansion::Direct),
            Err(Error::ContourTooClose { .. })
        ));
    }

    #[test]
    fn model_round_trip() {
        let mut g = crate::random::rng(2);
        let m = FiniteSeaModel::random(&mut g, &[-1, 0, 1, -1], 0.05).unwrap();
        assert_eq!(read_model(&write_model(&m)).unwrap(), m);
    }
}
