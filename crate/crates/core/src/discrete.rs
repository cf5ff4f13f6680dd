//! The fermionic projector on a finite indefinite inner product space.
//!
//! Spacetime is a partition of the index set into blocks, the kernel is
//! `P(x, y) = E_x P E_y`, and the action and constraint are
//! `S[P] = sum |A_xy^2|` and `T[P] = sum |A_xy|^2` with `A_xy = P(x,y) P(y,x)`.
//! Variations are Krein-unitary conjugations `P -> U P U^{-1}`.

use std::fmt::Write as _;
use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, pairwise_sum, CMat, C64, ZERO};
use crate::par;
use crate::random::{gaussian_c64, gaussian_matrix, random_frame, rng};
use crate::spectral::{self, eigh};
use crate::system::container::{fmt_f64, Lines};

/// Relative tolerance on S P^dag S = P.
pub const KREIN_TOL: f64 = 1e-10;
/// Rank threshold relative to the largest singular scale.
pub const RANK_TOL: f64 = 1e-10;
/// Number of random probe vectors in the positivity check.
pub const RANDOM_PROBES: usize = 64;
const FD_STEP: f64 = 1e-6;
const MAX_ROTATION: f64 = 0.5;
const RESTORE_TOL: f64 = 1e-12;

/// C^d with the inner product u^dag S v, S = diag(+-1).
#[derive(Clone, Debug, PartialEq)]
pub struct KreinSpace {
    signs: Vec<f64>,
}

impl KreinSpace {
    pub fn new(signs: Vec<f64>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Invalid("Krein space needs dimension >= 1".into()));
        }
        if let Some(s) = signs.iter().find(|s| s.abs() != 1.0) {
            return Err(Error::Invalid(format!("signature entries must be +1 or -1, found {s}")));
        }
        Ok(KreinSpace { signs })
    }

    /// diag(+I, -I) on each block, matching a balanced partition.
    pub fn canonical(part: &SpacetimePartition) -> Self {
        let mut signs = Vec::with_capacity(part.dim());
        for b in part.blocks() {
            let h = b.len() / 2;
            signs.extend(std::iter::repeat(1.0).take(h));
            signs.extend(std::iter::repeat(-1.0).take(b.len() - h));
        }
        KreinSpace { signs }
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn signature(&self) -> (usize, usize) {
        let p = self.signs.iter().filter(|&&s| s > 0.0).count();
        (p, self.signs.len() - p)
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_real_diag(&self.signs)
    }

    /// S M (row scaling).
    pub fn left(&self, m: &CMat) -> CMat {
        CMat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * self.signs[i])
    }

    /// M S (column scaling).
    pub fn right(&self, m: &CMat) -> CMat {
        CMat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * self.signs[j])
    }

    pub fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        u.iter().zip(v).zip(&self.signs).map(|((a, b), s)| a.conj() * b * *s).sum()
    }

    /// S M^dag S.
    pub fn adjoint(&self, m: &CMat) -> CMat {
        CMat::from_fn(m.cols(), m.rows(), |i, j| m[(j, i)].conj() * self.signs[i] * self.signs[j])
    }

    pub fn krein_defect(&self, m: &CMat) -> f64 {
        CMat::dist(&self.adjoint(m), m)
    }

    pub fn is_self_adjoint(&self, m: &CMat) -> bool {
        self.krein_defect(m) <= KREIN_TOL * m.norm_fro().max(f64::MIN_POSITIVE)
    }

    fn check_self_adjoint(&self, m: &CMat) -> Result<()> {
        if m.shape() != (self.dim(), self.dim()) {
            return Err(Error::Shape(format!("expected {0}x{0}, got {1:?}", self.dim(), m.shape())));
        }
        if !self.is_self_adjoint(m) {
            return Err(Error::NotKreinSelfAdjoint { defect: self.krein_defect(m) });
        }
        Ok(())
    }
}

/// Ordered blocks covering 0..d.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimePartition {
    blocks: Vec<Range<usize>>,
}

impl SpacetimePartition {
    pub fn new(blocks: Vec<Range<usize>>) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end <= b.start {
                return Err(Error::Invalid(format!("blocks must be contiguous, nonempty and in order; got {b:?} at {next}")));
            }
            if b.len() % 2 != 0 {
                return Err(Error::Invalid(format!("block {b:?} has odd dimension")));
            }
            next = b.end;
        }
        if blocks.is_empty() {
            return Err(Error::Invalid("partition needs at least one block".into()));
        }
        Ok(SpacetimePartition { blocks })
    }

    /// `count` blocks of equal size `size`.
    pub fn uniform(count: usize, size: usize) -> Result<Self> {
        SpacetimePartition::new((0..count).map(|k| k * size..(k + 1) * size).collect())
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    /// Each block must carry as many + as - signs.
    pub fn check_balanced(&self, space: &KreinSpace) -> Result<()> {
        if space.dim() != self.dim() {
            return Err(Error::Shape(format!("partition covers {}, space has dim {}", self.dim(), space.dim())));
        }
        for b in &self.blocks {
            let s: f64 = space.signs[b.clone()].iter().sum();
            if s != 0.0 {
                return Err(Error::Invalid(format!("block {b:?} has unbalanced signature")));
            }
        }
        Ok(())
    }
}

/// The (x, y) block E_x P E_y.
pub fn discrete_kernel(p: &CMat, part: &SpacetimePartition, x: usize, y: usize) -> Result<CMat> {
    let (bx, by) = match (part.blocks.get(x), part.blocks.get(y)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Invalid(format!("block index ({x}, {y}) out of range for {} blocks", part.len()))),
    };
    Ok(p.block(bx.start, by.start, bx.len(), by.len()))
}

pub fn closed_chain(p: &CMat, part: &SpacetimePartition, x: usize, y: usize) -> Result<CMat> {
    Ok(discrete_kernel(p, part, x, y)?.matmul(&discrete_kernel(p, part, y, x)?))
}

fn pair_spectrum(p: &CMat, part: &SpacetimePartition, x: usize, y: usize) -> Result<Vec<C64>> {
    spectral::eigenvalues(&closed_chain(p, part, x, y)?)
}

/// Per-pair sum |l|^2 and (sum |l|)^2, in row-major pair order.
fn pair_terms(p: &CMat, part: &SpacetimePartition) -> Result<Vec<(f64, f64)>> {
    let n = part.len();
    par::map_range(n * n, |k| {
        let s = pair_spectrum(p, part, k / n, k % n)?;
        let sq: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        let w: f64 = s.iter().map(|z| z.norm()).sum();
        Ok((sq, w * w))
    })
    .into_iter()
    .collect()
}

/// S[P] = sum_{x,y} |A_xy^2|.
pub fn discrete_action(p: &CMat, part: &SpacetimePartition) -> Result<f64> {
    Ok(pairwise_sum(&pair_terms(p, part)?.iter().map(|t| t.0).collect::<Vec<_>>()))
}

/// T[P] = sum_{x,y} |A_xy|^2.
pub fn discrete_constraint(p: &CMat, part: &SpacetimePartition) -> Result<f64> {
    Ok(pairwise_sum(&pair_terms(p, part)?.iter().map(|t| t.1).collect::<Vec<_>>()))
}

pub fn discrete_action_and_constraint(p: &CMat, part: &SpacetimePartition) -> Result<(f64, f64)> {
    let t = pair_terms(p, part)?;
    Ok((pairwise_sum(&t.iter().map(|t| t.0).collect::<Vec<_>>()), pairwise_sum(&t.iter().map(|t| t.1).collect::<Vec<_>>())))
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub krein_defect: f64,
    pub trace: C64,
    pub trace_ok: bool,
    pub rank: usize,
    pub rank_ok: bool,
    /// Smallest u^dag S (-P) u / |u|^2 over all probes.
    pub min_form: f64,
    /// Probe attaining a negative value beyond tolerance, if any.
    pub witness: Option<Vec<C64>>,
    pub admissible: bool,
}

/// Checks tr P = f, rank P <= f and positivity of -P on the eigenvectors of
/// -SP plus [`RANDOM_PROBES`] fixed random vectors.
pub fn check_admissible(space: &KreinSpace, p: &CMat, f: usize) -> Result<AdmissibilityReport> {
    if p.shape() != (space.dim(), space.dim()) {
        return Err(Error::Shape(format!("expected {0}x{0}, got {1:?}", space.dim(), p.shape())));
    }
    let d = space.dim();
    let krein_defect = space.krein_defect(p);
    let krein_ok = krein_defect <= KREIN_TOL * p.norm_fro().max(f64::MIN_POSITIVE);
    let trace = p.trace();
    let trace_ok = (trace - f as f64).norm() <= 1e-8;
    let scale = p.norm_2();
    let rank = if scale == 0.0 {
        0
    } else {
        // eigenvalues of [[0, P], [P^dag, 0]] are the singular values and their negatives
        let mut w = CMat::zeros(2 * d, 2 * d);
        w.set_block(0, d, p);
        w.set_block(d, 0, &p.adjoint());
        let e = eigh(&w)?;
        e.values.iter().filter(|&&v| v > RANK_TOL * scale).count()
    };
    let rank_ok = rank <= f;
    let g = space.left(p).scale_re(-1.0).hermitian_part();
    let mut probes: Vec<Vec<C64>> = Vec::with_capacity(d + RANDOM_PROBES);
    let e = eigh(&g)?;
    for k in 0..d {
        probes.push(e.vector(k));
    }
    let mut r = rng(0x5eed);
    for _ in 0..RANDOM_PROBES {
        probes.push((0..d).map(|_| gaussian_c64(&mut r)).collect());
    }
    let tol = 1e-10 * scale;
    let mut min_form = f64::INFINITY;
    let mut witness = None;
    for u in probes {
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        if nu == 0.0 {
            continue;
        }
        let v = g.mul_vec(&u);
        let val = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>().re / nu;
        if val < min_form {
            min_form = val;
            if val < -tol && witness.is_none() {
                witness = Some(u.clone());
            }
        }
    }
    let positive = witness.is_none();
    Ok(AdmissibilityReport {
        krein_defect,
        trace,
        trace_ok,
        rank,
        rank_ok,
        min_form,
        witness,
        admissible: krein_ok && trace_ok && rank_ok && positive,
    })
}

/// Projector U (U^dag S U)^{-1} U^dag S onto a random f-dimensional
/// negative definite subspace. Admissible with trace f.
pub fn random_admissible<R: Rng + ?Sized>(g: &mut R, space: &KreinSpace, f: usize) -> Result<CMat> {
    let neg: Vec<usize> = (0..space.dim()).filter(|&i| space.signs[i] < 0.0).collect();
    let pos: Vec<usize> = (0..space.dim()).filter(|&i| space.signs[i] > 0.0).collect();
    if f > neg.len() {
        return Err(Error::Invalid(format!("f = {f} exceeds the negative dimension {}", neg.len())));
    }
    let b = random_frame(g, neg.len(), f);
    let a = gaussian_matrix(g, pos.len(), f);
    let an = a.norm_2();
    let a = if an > 0.0 { a.scale_re(0.8 / an) } else { a };
    let mut u = CMat::zeros(space.dim(), f);
    for (k, &i) in neg.iter().enumerate() {
        for j in 0..f {
            u[(i, j)] = b[(k, j)];
        }
    }
    for (k, &i) in pos.iter().enumerate() {
        for j in 0..f {
            u[(i, j)] = a[(k, j)];
        }
    }
    let gram = u.adjoint().matmul(&space.left(&u));
    let p = u.matmul(&gram.inverse()?).matmul(&space.right(&u.adjoint()));
    Ok(p)
}

/// Zeroes every entry outside the given blocks (rows and columns).
pub fn restrict_generator(gen: &CMat, part: &SpacetimePartition, region: &[usize]) -> CMat {
    let mut inside = vec![false; part.dim()];
    for &x in region {
        if let Some(b) = part.blocks.get(x) {
            inside[b.clone()].iter_mut().for_each(|v| *v = true);
        }
    }
    CMat::from_fn(gen.rows(), gen.cols(), |i, j| if inside[i] && inside[j] { gen[(i, j)] } else { ZERO })
}

/// U P U^{-1} with U = exp(i t G). G must be Krein self-adjoint. If P is
/// admissible with f = round(tr P), the result is checked to be admissible.
pub fn unitary_flow_step(space: &KreinSpace, p: &CMat, gen: &CMat, t: f64) -> Result<CMat> {
    space.check_self_adjoint(gen)?;
    let out = conjugate(p, gen, t)?;
    let f = p.trace().re.round();
    if f >= 0.0 && check_admissible(space, p, f as usize)?.admissible {
        let after = check_admissible(space, &out, f as usize)?;
        if !after.admissible {
            return Err(Error::Inadmissible(format!(
                "flow broke admissibility: trace {}, rank {}, min form {:e}",
                after.trace, after.rank, after.min_form
            )));
        }
    }
    Ok(out)
}

fn conjugate(p: &CMat, gen: &CMat, t: f64) -> Result<CMat> {
    let u = gen.scale(c(0.0, t)).expm()?;
    let ui = gen.scale(c(0.0, -t)).expm()?;
    Ok(u.matmul(p).matmul(&ui))
}

/// R(x, y) blocks with dL_xy = Re tr(R(x,y) dP(y,x)) for L = sum |l|^2 - mu (sum |l|)^2,
/// assembled into a d x d matrix. Pairs whose nonzero spectrum is not simple
/// fall back to finite differences.
fn gradient_blocks(p: &CMat, part: &SpacetimePartition, mu: f64) -> Result<(CMat, usize)> {
    let n = part.len();
    let blocks: Vec<Result<(CMat, bool)>> = par::map_range(n * n, |k| {
        let (x, y) = (k / n, k % n);
        let pxy = discrete_kernel(p, part, x, y)?;
        let pyx = discrete_kernel(p, part, y, x)?;
        let a = pxy.matmul(&pyx);
        let vals = spectral::eigenvalues(&a)?;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return Ok((CMat::zeros(pxy.rows(), pxy.cols()), false));
        }
        let sum: f64 = vals.iter().map(|z| z.norm()).sum();
        match spectral::modulus_gradient(&a, &vals, scale, Some(1e-9), |l| 2.0 * l.norm() - 2.0 * mu * sum) {
            Some(gamma) => Ok((gamma.matmul(&pxy), false)),
            None => Ok((fd_block(&pxy, &pyx, mu, x == y), true)),
        }
    });
    let mut r = CMat::zeros(p.rows(), p.cols());
    let mut fallbacks = 0;
    for (k, b) in blocks.into_iter().enumerate() {
        let (blk, fd) = b?;
        fallbacks += fd as usize;
        let (x, y) = (k / n, k % n);
        r.set_block(part.blocks[x].start, part.blocks[y].start, &blk);
    }
    Ok((r, fallbacks))
}

fn l_mu(a: &CMat, mu: f64) -> f64 {
    let vals = spectral::eigenvalues(a).unwrap_or_default();
    let sq: f64 = vals.iter().map(|z| z.norm_sqr()).sum();
    let w: f64 = vals.iter().map(|z| z.norm()).sum();
    sq - mu * w * w
}

/// Central differences of L(P(x,y) P(y,x)) in the entries of P(y,x). On the
/// diagonal both factors move together, which doubles the derivative.
fn fd_block(pxy: &CMat, pyx: &CMat, mu: f64, diagonal: bool) -> CMat {
    let h = FD_STEP * pyx.max_abs().max(1e-300);
    let eval = |q: &CMat| {
        if diagonal {
            l_mu(&q.matmul(q), mu)
        } else {
            l_mu(&pxy.matmul(q), mu)
        }
    };
    let factor = if diagonal { 0.5 } else { 1.0 };
    let mut r = CMat::zeros(pxy.rows(), pxy.cols());
    for j in 0..pyx.rows() {
        for i in 0..pyx.cols() {
            let mut d = [0.0; 2];
            for (slot, unit) in [c(1.0, 0.0), c(0.0, 1.0)].into_iter().enumerate() {
                let mut qp = pyx.clone();
                qp[(j, i)] += unit * h;
                let mut qm = pyx.clone();
                qm[(j, i)] -= unit * h;
                d[slot] = (eval(&qp) - eval(&qm)) / (2.0 * h);
            }
            r[(i, j)] = c(d[0], -d[1]) * factor;
        }
    }
    r
}

/// Q = (R + R^*)/4 for L_mu; see [`el_residual`].
pub fn el_operator(space: &KreinSpace, part: &SpacetimePartition, p: &CMat, mu: f64) -> Result<CMat> {
    let (r, _) = gradient_blocks(p, part, mu)?;
    Ok((&r + &space.adjoint(&r)).scale_re(0.25))
}

/// ||[P, Q]||_F with Q(x,y) = (R(x,y) + R(y,x)^*)/4.
pub fn el_residual(space: &KreinSpace, part: &SpacetimePartition, p: &CMat, mu: f64) -> Result<f64> {
    space.check_self_adjoint(p)?;
    let q = el_operator(space, part, p, mu)?;
    Ok(CMat::commutator(p, &q).norm_fro())
}

/// Hermitian H with dF/dt = 4 Re tr(Q i[SH', P]) = 4 <H, H'> along G = S H'.
fn generator_gradient(space: &KreinSpace, p: &CMat, q: &CMat) -> CMat {
    let comm = CMat::commutator(p, q);
    let cs = space.right(&comm);
    // i (C S - (C S)^dag) / 2
    (&cs - &cs.adjoint()).scale(c(0.0, 0.5))
}

fn inner(a: &CMat, b: &CMat) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    /// Fixed multiplier; `None` keeps T at its initial value and fits the multiplier.
    pub mu: Option<f64>,
    pub max_iters: usize,
    pub step_init: f64,
    /// Stop once the EL residual falls below this fraction of its start value.
    pub rel_tol: f64,
    /// Stop once the residual is below this absolute value.
    pub abs_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { mu: None, max_iters: 2000, step_init: 0.1, rel_tol: 1e-6, abs_tol: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowRecord {
    pub iter: usize,
    pub action: f64,
    pub constraint: f64,
    pub residual: f64,
    pub mu: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    MaxIters,
    Stalled,
}

impl FlowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowStatus::Converged => "converged",
            FlowStatus::MaxIters => "max-iters",
            FlowStatus::Stalled => "stalled",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub p: CMat,
    pub records: Vec<FlowRecord>,
    pub status: FlowStatus,
    pub initial_residual: f64,
    pub final_residual: f64,
}

struct FlowPoint {
    p: CMat,
    action: f64,
    constraint: f64,
    q_s: CMat,
    q_t: CMat,
    h_s: CMat,
    h_t: CMat,
}

impl FlowPoint {
    fn new(space: &KreinSpace, part: &SpacetimePartition, p: CMat) -> Result<Self> {
        let (action, constraint) = discrete_action_and_constraint(&p, part)?;
        // Q for S alone (mu = 0) and for T alone (the mu-derivative of L_mu)
        let q_s = el_operator(space, part, &p, 0.0)?;
        let q_st = el_operator(space, part, &p, 1.0)?;
        let q_t = &q_s - &q_st;
        let h_s = generator_gradient(space, &p, &q_s);
        let h_t = generator_gradient(space, &p, &q_t);
        Ok(FlowPoint { p, action, constraint, q_s, q_t, h_s, h_t })
    }

    fn multiplier(&self, fixed: Option<f64>) -> f64 {
        fixed.unwrap_or_else(|| {
            let tt = inner(&self.h_t, &self.h_t);
            if tt > 0.0 {
                inner(&self.h_s, &self.h_t) / tt
            } else {
                0.0
            }
        })
    }

    /// Direction H = H_S - mu H_T and the value of S - mu T.
    fn direction(&self, mu: f64) -> CMat {
        let mut h = self.h_s.clone();
        h.axpy(c(-mu, 0.0), &self.h_t);
        h
    }
}

/// Descent along Krein-unitary flows. With `mu = None` the generator is
/// projected onto the tangent space of the level set of T and a Newton step
/// along grad T restores T after each move.
pub fn flow_descent(space: &KreinSpace, part: &SpacetimePartition, p0: &CMat, cfg: &FlowConfig) -> Result<FlowResult> {
    space.check_self_adjoint(p0)?;
    if cfg.max_iters == 0 || !(cfg.step_init > 0.0) {
        return Err(Error::Invalid("flow needs max_iters >= 1 and step_init > 0".into()));
    }
    let t0 = discrete_constraint(p0, part)?;
    let mut cur = FlowPoint::new(space, part, p0.clone())?;
    let mut mu = cur.multiplier(cfg.mu);
    // Q_mu is affine in mu
    let residual_of = |pt: &FlowPoint, mu: f64| -> Result<f64> {
        let mut q = pt.q_s.clone();
        q.axpy(c(-mu, 0.0), &pt.q_t);
        Ok(CMat::commutator(&pt.p, &q).norm_fro())
    };
    let r0 = residual_of(&cur, mu)?;
    let mut records = vec![FlowRecord { iter: 0, action: cur.action, constraint: cur.constraint, residual: r0, mu, step: 0.0 }];
    let mut step = cfg.step_init;
    let mut status = FlowStatus::MaxIters;
    let mut last_res = r0;
    if r0 <= cfg.abs_tol {
        status = FlowStatus::Converged;
    }
    let merit = |pt: &FlowPoint, mu: f64| pt.action - mu * pt.constraint;
    for iter in 1..=cfg.max_iters {
        if status == FlowStatus::Converged {
            break;
        }
        let h = cur.direction(mu);
        let slope = 4.0 * inner(&h, &h);
        if slope == 0.0 {
            status = FlowStatus::Converged;
            break;
        }
        let gen = space.left(&h).scale_re(-1.0);
        let base = merit(&cur, mu);
        let mut accepted = None;
        // keep |alpha G| below MAX_ROTATION so the exponential stays well conditioned
        let mut alpha = step.min(MAX_ROTATION / gen.norm_fro());
        let attempt = |alpha: f64| -> Result<FlowPoint> {
            let mut p = conjugate(&cur.p, &gen, alpha)?;
            if cfg.mu.is_none() {
                p = restore_constraint(space, part, p, t0)?;
            }
            FlowPoint::new(space, part, p)
        };
        for _ in 0..60 {
            if let Ok(cand) = attempt(alpha) {
                let m = merit(&cand, mu);
                if m.is_finite() && m <= base - 1e-4 * alpha * slope {
                    accepted = Some(cand);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else {
            status = FlowStatus::Stalled;
            break;
        };
        step = (alpha * 2.0).min(1e6 * cfg.step_init);
        cur = next;
        mu = cur.multiplier(cfg.mu);
        last_res = residual_of(&cur, mu)?;
        records.push(FlowRecord { iter, action: cur.action, constraint: cur.constraint, residual: last_res, mu, step: alpha });
        if last_res <= cfg.rel_tol * r0 || last_res <= cfg.abs_tol {
            status = FlowStatus::Converged;
        }
    }
    Ok(FlowResult { p: cur.p, records, status, initial_residual: r0, final_residual: last_res })
}

/// Newton steps along G = S grad T back to T = target.
fn restore_constraint(space: &KreinSpace, part: &SpacetimePartition, mut p: CMat, target: f64) -> Result<CMat> {
    let tol = RESTORE_TOL * target.abs().max(f64::MIN_POSITIVE);
    for k in 0..=8 {
        let t = discrete_constraint(&p, part)?;
        if (t - target).abs() <= tol {
            return Ok(p);
        }
        if k == 8 {
            return Err(Error::NoConvergence { iterations: k, residual: (t - target).abs() });
        }
        let q_s = el_operator(space, part, &p, 0.0)?;
        let q_st = el_operator(space, part, &p, 1.0)?;
        let h_t = generator_gradient(space, &p, &(&q_s - &q_st));
        let nn = 4.0 * inner(&h_t, &h_t);
        if nn == 0.0 {
            return Err(Error::NoConvergence { iterations: k, residual: (t - target).abs() });
        }
        let s = (target - t) / nn;
        p = conjugate(&p, &space.left(&h_t), s)?;
    }
    unreachable!("loop returns on its last pass")
}

/// Positive-definite Hilbert space obtained from -P by dividing out the null space.
#[derive(Clone, Debug)]
pub struct HilbertReconstruction {
    pub dim: usize,
    /// Columns W with W^dag G W = I, G = -SP.
    pub map: CMat,
    /// Positive eigenvalues of G kept.
    pub values: Vec<f64>,
}

pub fn reconstruct_hilbert(space: &KreinSpace, p: &CMat) -> Result<HilbertReconstruction> {
    space.check_self_adjoint(p)?;
    let g = space.left(p).scale_re(-1.0).hermitian_part();
    let e = eigh(&g)?;
    let scale = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    if let Some(&v) = e.values.iter().find(|&&v| v < -tol) {
        return Err(Error::Inadmissible(format!("-SP has eigenvalue {v:e} below zero")));
    }
    let keep: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > tol).collect();
    let mut map = CMat::zeros(space.dim(), keep.len());
    for (col, &k) in keep.iter().enumerate() {
        let s = 1.0 / e.values[k].sqrt();
        for i in 0..space.dim() {
            map[(i, col)] = e.vectors[(i, k)] * s;
        }
    }
    Ok(HilbertReconstruction { dim: keep.len(), map, values: keep.iter().map(|&k| e.values[k]).collect() })
}

pub const HEADER: &str = "krein-fermion 1";

/// Text container: header, `dim d`, `signs` (d entries of +-1), `blocks n`
/// followed by one `start len` line per block, then d rows of P as re/im pairs.
pub fn write_fermion(space: &KreinSpace, part: &SpacetimePartition, p: &CMat) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "dim {}", space.dim());
    let signs: Vec<String> = space.signs.iter().map(|&v| if v > 0.0 { "1".into() } else { "-1".into() }).collect();
    let _ = writeln!(s, "signs {}", signs.join(" "));
    let _ = writeln!(s, "blocks {}", part.len());
    for b in part.blocks() {
        let _ = writeln!(s, "{} {}", b.start, b.len());
    }
    for i in 0..p.rows() {
        let row: Vec<String> = p.row(i).iter().map(|z| format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn read_fermion(text: &str) -> Result<(KreinSpace, SpacetimePartition, CMat)> {
    let mut lines = Lines::new(text);
    let head = lines.next_line()?;
    if head != HEADER {
        return Err(lines.err(format!("unsupported header `{head}`, expected `{HEADER}`")));
    }
    let d = lines.keyed_usize("dim")?;
    let signs = lines.keyed("signs")?;
    let signs = lines.floats(signs, d)?;
    let space = KreinSpace::new(signs).map_err(|e| lines.err(e.to_string()))?;
    let nb = lines.keyed_usize("blocks")?;
    let mut blocks = Vec::with_capacity(nb);
    for _ in 0..nb {
        let l = lines.next_line()?;
        let v = lines.floats(l, 2)?;
        if v.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
            return Err(lines.err("block bounds must be nonnegative integers"));
        }
        blocks.push(v[0] as usize..(v[0] + v[1]) as usize);
    }
    let part = SpacetimePartition::new(blocks).map_err(|e| lines.err(e.to_string()))?;
    if part.dim() != d {
        return Err(lines.err(format!("blocks cover {} indices, expected {d}", part.dim())));
    }
    let rows: Result<Vec<Vec<C64>>> = (0..d).map(|_| lines.complex_row(d)).collect();
    let p = CMat::from_rows(&rows?);
    lines.finish()?;
    Ok((space, part, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (KreinSpace, SpacetimePartition) {
        let part = SpacetimePartition::uniform(2, 2).unwrap();
        (KreinSpace::canonical(&part), part)
    }

    #[test]
    fn adjoint_examples() {
        let (space, _) = setup();
        let mut g = rng(1);
        let m = gaussian_matrix(&mut g, 4, 4);
        assert!(CMat::dist(&space.adjoint(&space.adjoint(&m)), &m) < 1e-15);
        let s = space.matrix();
        assert_eq!(space.adjoint(&s), s);
        let plain = KreinSpace::new(vec![1.0; 4]).unwrap();
        assert_eq!(plain.adjoint(&m), m.adjoint());
    }

    #[test]
    fn rank_one_state() {
        let space = KreinSpace::new(vec![1.0, -1.0]).unwrap();
        let u = [c(0.3, 0.1), c(1.0, -0.2)];
        let usu = space.form(&u, &u).re;
        assert!(usu < 0.0);
        let uu = CMat::from_fn(2, 2, |i, j| u[i] * u[j].conj());
        let p = space.right(&uu).scale_re(1.0 / usu);
        let rep = check_admissible(&space, &p, 1).unwrap();
        assert!(rep.admissible, "{rep:?}");
        assert!((rep.trace - 1.0).norm() < 1e-14);
        assert_eq!(reconstruct_hilbert(&space, &p).unwrap().dim, 1);
        let bad = p.scale_re(-1.0);
        let rep = check_admissible(&space, &bad, 1).unwrap();
        assert!(!rep.admissible && rep.witness.is_some());
    }

    #[test]
    fn zero_projector() {
        let (space, part) = setup();
        let z = CMat::zeros(4, 4);
        assert!(check_admissible(&space, &z, 0).unwrap().admissible);
        assert_eq!(discrete_action(&z, &part).unwrap(), 0.0);
        assert_eq!(discrete_constraint(&z, &part).unwrap(), 0.0);
        assert_eq!(reconstruct_hilbert(&space, &z).unwrap().dim, 0);
        assert_eq!(el_residual(&space, &part, &z, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn partition_validation() {
        assert!(SpacetimePartition::new(vec![0..2, 3..5]).is_err());
        assert!(SpacetimePartition::new(vec![0..3]).is_err());
        let part = SpacetimePartition::uniform(2, 2).unwrap();
        assert!(discrete_kernel(&CMat::zeros(4, 4), &part, 0, 2).is_err());
        let skew = KreinSpace::new(vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!(part.check_balanced(&skew).is_err());
    }

    #[test]
    fn container_round_trip() {
        let (space, part) = setup();
        let mut g = rng(3);
        let p = random_admissible(&mut g, &space, 1).unwrap();
        let (s2, p2, m2) = read_fermion(&write_fermion(&space, &part, &p)).unwrap();
        assert_eq!((s2, p2, m2), (space, part, p));
    }
}
