//! Minimizing `S_mu = sum_ab w_a w_b L_mu(x_a, x_b)` over discrete measures
//! with fixed volume and trace.
//!
//! Weights live on the simplex scaled to the volume target. Points are
//! parametrized by their frame and spectrum; after every step the frame is
//! re-orthonormalized and the trace constraint is restored by stretching the
//! positive and negative parts of all spectra in opposite directions, which
//! never changes a signature.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, CMat, C64, ZERO};
use crate::par;
use crate::random::{random_frame, rng, uniform};
use crate::spectral;
use crate::system::{lagrangian_mu_from_spectrum, Atom, CausalFermionSystem, DiscreteMeasure, OperatorPoint};

pub const ARMIJO_C: f64 = 1e-4;
pub const PRUNE_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradMode {
    FiniteDifference,
    AnalyticWithFdCheck,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptConfig {
    pub mu: f64,
    pub volume_target: f64,
    pub trace_target: f64,
    pub penalty_weight: f64,
    pub max_iters: usize,
    pub step_init: f64,
    pub seed: u64,
    pub grad_mode: GradMode,
    /// Stop when the projected gradient norm drops below this.
    pub grad_tol: f64,
    /// When false only the weights move.
    pub optimize_points: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            mu: 0.25,
            volume_target: 1.0,
            trace_target: 1.0,
            penalty_weight: 1.0,
            max_iters: 2000,
            step_init: 0.1,
            seed: 0,
            grad_mode: GradMode::AnalyticWithFdCheck,
            grad_tol: 1e-9,
            optimize_points: true,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::Invalid("mu must be nonnegative".into()));
        }
        if !(self.penalty_weight > 0.0) {
            return Err(Error::Invalid("penalty_weight must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Invalid("max_iters must be at least 1".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::Invalid("step_init must be positive".into()));
        }
        if !(self.volume_target > 0.0) {
            return Err(Error::Invalid("volume_target must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptStatus {
    Converged,
    MaxIters,
    Stalled,
}

impl OptStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptStatus::Converged => "converged",
            OptStatus::MaxIters => "max-iters",
            OptStatus::Stalled => "stalled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub volume_residual: f64,
    pub trace_residual: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub system: CausalFermionSystem,
    pub objective_history: Vec<f64>,
    pub records: Vec<IterRecord>,
    pub volume_residual: f64,
    pub trace_residual: f64,
    pub grad_norm: f64,
    pub status: OptStatus,
    /// Largest relative gap between analytic and finite-difference gradients
    /// observed at the checkpoints.
    pub fd_check_error: Option<f64>,
}

/// `sum_ab w_a w_b (sum |l|^2 - mu (sum |l|)^2)`.
pub fn objective_mu(sys: &CausalFermionSystem, mu: f64) -> Result<f64> {
    sys.action_mu(mu)
}

#[derive(Clone, Debug)]
struct State {
    dim: usize,
    spin: usize,
    weights: Vec<f64>,
    points: Vec<OperatorPoint>,
}

impl State {
    fn from_system(sys: &CausalFermionSystem) -> Self {
        State {
            dim: sys.dim(),
            spin: sys.spin_dim(),
            weights: sys.measure().weights(),
            points: sys.measure().atoms().iter().map(|a| a.point.clone()).collect(),
        }
    }

    fn volume(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    fn trace(&self) -> f64 {
        let t: Vec<f64> = self.weights.iter().zip(&self.points).map(|(w, p)| w * p.trace()).collect();
        pairwise_sum(&t)
    }

    fn into_system(self, prune_below: f64) -> Result<CausalFermionSystem> {
        let atoms: Vec<Atom> = self
            .weights
            .into_iter()
            .zip(self.points)
            .filter(|(w, _)| *w >= prune_below && *w > 0.0)
            .map(|(weight, point)| Atom { point, weight })
            .collect();
        CausalFermionSystem::new(self.dim, self.spin, DiscreteMeasure::new(atoms)?)
    }
}

fn reduced(vx: &CMat, nux: &[f64], vy: &CMat, nuy: &[f64]) -> (CMat, CMat) {
    let g = vx.adjoint_mul(vy);
    let mut m = g.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            m[(i, j)] *= nux[i] * nuy[j];
        }
    }
    (m.matmul(&g.adjoint()), g)
}

fn raw_lagrangian(vx: &CMat, nux: &[f64], vy: &CMat, nuy: &[f64], spin: usize, mu: f64) -> f64 {
    let (m, _) = reduced(vx, nux, vy, nuy);
    match spectral::eigenvalues(&m) {
        Ok(vals) => lagrangian_mu_from_spectrum(&vals, spin, Some(mu)),
        Err(_) => f64::NAN,
    }
}

fn pair_value(x: &OperatorPoint, y: &OperatorPoint, mu: f64) -> f64 {
    raw_lagrangian(x.frame(), x.spectrum(), y.frame(), y.spectrum(), x.spin_dim(), mu)
}

/// Derivative of `L_mu(x, y)` with respect to the parameters of `x` only:
/// `(d/dRe V + i d/dIm V, d/dnu)`.
struct SlotGrad {
    frame: CMat,
    spectrum: Vec<f64>,
    used_fd: bool,
}

fn analytic_slot(x: &OperatorPoint, y: &OperatorPoint, mu: f64) -> Option<SlotGrad> {
    let (vx, nux, vy, nuy) = (x.frame(), x.spectrum(), y.frame(), y.spectrum());
    let rx = nux.len();
    if rx == 0 || nuy.is_empty() {
        return Some(SlotGrad { frame: CMat::zeros(x.dim(), rx), spectrum: vec![0.0; rx], used_fd: false });
    }
    let (m, g) = reduced(vx, nux, vy, nuy);
    let vals = spectral::eigenvalues(&m).ok()?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if scale == 0.0 {
        return None;
    }
    let sum: f64 = vals.iter().map(|z| z.norm()).sum();
    let gamma = spectral::modulus_gradient(&m, &vals, scale, None, |lam| 2.0 * lam.norm() - 2.0 * mu * sum)?;
    // d/dnu_x: Re (G D_y G^dagger Gamma)_ii
    let mut gdy = g.clone();
    for i in 0..gdy.rows() {
        for j in 0..gdy.cols() {
            gdy[(i, j)] *= nuy[j];
        }
    }
    let t = gdy.matmul(&g.adjoint()).matmul(&gamma);
    let spectrum: Vec<f64> = (0..rx).map(|i| t[(i, i)].re).collect();
    // d/dV_x: V_y K with
    // K = D_y G^dag (Gamma D_x + D_x Gamma^dag)
    let gd = &gamma.adjoint();
    let mut sym = CMat::zeros(gamma.rows(), gamma.cols());
    for i in 0..sym.rows() {
        for j in 0..sym.cols() {
            sym[(i, j)] = gamma[(i, j)] * nux[j] + gd[(i, j)] * nux[i];
        }
    }
    let mut k = g.adjoint().matmul(&sym);
    for i in 0..k.rows() {
        for j in 0..k.cols() {
            k[(i, j)] *= nuy[i];
        }
    }
    Some(SlotGrad { frame: vy.matmul(&k), spectrum, used_fd: false })
}

fn fd_slot(x: &OperatorPoint, y: &OperatorPoint, mu: f64) -> SlotGrad {
    let (vx, nux, vy, nuy) = (x.frame(), x.spectrum(), y.frame(), y.spectrum());
    let spin = x.spin_dim();
    let f = |v: &CMat, nu: &[f64]| raw_lagrangian(v, nu, vy, nuy, spin, mu);
    let mut spectrum = vec![0.0; nux.len()];
    for i in 0..nux.len() {
        let h = FD_STEP * nux[i].abs().max(1.0);
        let mut p = nux.to_vec();
        let mut q = nux.to_vec();
        p[i] += h;
        q[i] -= h;
        spectrum[i] = (f(vx, &p) - f(vx, &q)) / (2.0 * h);
    }
    let mut frame = CMat::zeros(vx.rows(), vx.cols());
    for i in 0..vx.rows() {
        for j in 0..vx.cols() {
            let mut d = ZERO;
            for (unit, slot) in [(C64::new(1.0, 0.0), 0), (C64::new(0.0, 1.0), 1)] {
                let mut p = vx.clone();
                let mut q = vx.clone();
                p[(i, j)] += unit * FD_STEP;
                q[(i, j)] -= unit * FD_STEP;
                let g = (f(&p, nux) - f(&q, nux)) / (2.0 * FD_STEP);
                if slot == 0 {
                    d.re = g;
                } else {
                    d.im = g;
                }
            }
            frame[(i, j)] = d;
        }
    }
    SlotGrad { frame, spectrum, used_fd: true }
}

fn slot_gradient(x: &OperatorPoint, y: &OperatorPoint, mu: f64, mode: GradMode) -> SlotGrad {
    match mode {
        GradMode::FiniteDifference => fd_slot(x, y, mu),
        GradMode::AnalyticWithFdCheck => analytic_slot(x, y, mu).unwrap_or_else(|| fd_slot(x, y, mu)),
    }
}

/// Gradient of `S_mu` with respect to weights, spectra and frames.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
    pub frames: Vec<CMat>,
    /// Number of ordered pairs that needed finite differences.
    pub fd_pairs: usize,
}

impl Gradient {
    fn flatten(&self) -> Vec<f64> {
        let mut out = self.weights.clone();
        for (s, f) in self.spectra.iter().zip(&self.frames) {
            out.extend_from_slice(s);
            for z in f.as_slice() {
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }
}

fn gradient_of(state: &State, mu: f64, mode: GradMode, with_points: bool) -> Gradient {
    let n = state.points.len();
    let pts = &state.points;
    let w = &state.weights;
    let pairs: Vec<(f64, Option<SlotGrad>)> = par::map_range(n * n, |k| {
        let (a, b) = (k / n, k % n);
        let val = pair_value(&pts[a], &pts[b], mu);
        let sg = if with_points { Some(slot_gradient(&pts[a], &pts[b], mu, mode)) } else { None };
        (val, sg)
    });
    let mut weights = vec![0.0; n];
    let mut spectra: Vec<Vec<f64>> = pts.iter().map(|p| vec![0.0; p.rank()]).collect();
    let mut frames: Vec<CMat> = pts.iter().map(|p| CMat::zeros(p.dim(), p.rank())).collect();
    let mut fd_pairs = 0;
    for a in 0..n {
        let terms: Vec<f64> = (0..n).map(|b| 2.0 * w[b] * pairs[a * n + b].0).collect();
        weights[a] = pairwise_sum(&terms);
        for b in 0..n {
            if let Some(sg) = &pairs[a * n + b].1 {
                let c = 2.0 * w[a] * w[b];
                for (s, d) in spectra[a].iter_mut().zip(&sg.spectrum) {
                    *s += c * d;
                }
                frames[a].axpy(C64::new(c, 0.0), &sg.frame);
                fd_pairs += sg.used_fd as usize;
            }
        }
    }
    Gradient { weights, spectra, frames, fd_pairs }
}

fn objective_of(state: &State, mu: f64) -> f64 {
    let n = state.points.len();
    let pts = &state.points;
    let w = &state.weights;
    let terms = par::map_range(n * n, |k| {
        let (a, b) = (k / n, k % n);
        w[a] * w[b] * pair_value(&pts[a], &pts[b], mu)
    });
    pairwise_sum(&terms)
}

/// Gradient of the objective of a system, exposed for verification.
pub fn objective_gradient(sys: &CausalFermionSystem, mu: f64, mode: GradMode) -> Gradient {
    gradient_of(&State::from_system(sys), mu, mode, true)
}

/// Euclidean projection onto `{w >= 0, sum w = total}`.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        css += uk;
        let t = (css - total) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto `{w >= 0, sum w = volume, sum w tau = trace}` by Dykstra's
/// alternating projections.
fn project_weights_with_trace(v: &[f64], tau: &[f64], volume: f64, trace: f64) -> Option<Vec<f64>> {
    let n = v.len();
    let mut x = v.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let tn: f64 = tau.iter().map(|t| t * t).sum();
    let tm = tau.iter().sum::<f64>() / n as f64;
    let tc: Vec<f64> = tau.iter().map(|t| t - tm).collect();
    let tcn: f64 = tc.iter().map(|t| t * t).sum();
    for _ in 0..20000 {
        let y_in: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = project_simplex(&y_in, volume);
        p = y_in.iter().zip(&y).map(|(a, b)| a - b).collect();
        let z_in: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        // hyperplane sum w tau = trace inside sum w = volume
        let cur: f64 = z_in.iter().zip(tau).map(|(a, b)| a * b).sum();
        let z: Vec<f64> = if tcn > 1e-300 {
            z_in.iter().zip(&tc).map(|(a, t)| a + (trace - cur) * t / tcn).collect()
        } else if tn > 0.0 {
            z_in.clone()
        } else {
            z_in.clone()
        };
        q = z_in.iter().zip(&z).map(|(a, b)| a - b).collect();
        let change: f64 = z.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = z;
        if change < 1e-15 * volume {
            break;
        }
    }
    let x = project_simplex(&x, volume);
    let tr: f64 = x.iter().zip(tau).map(|(a, b)| a * b).sum();
    if (tr - trace).abs() <= 1e-9 * trace.abs().max(volume) {
        Some(x)
    } else {
        None
    }
}

/// Stretch positive spectra by `1 + t` and negative ones by `1 - t` so that
/// the weighted trace hits `target`.
fn restore_trace(weights: &[f64], points: &mut [OperatorPoint], target: f64, max_t: f64) -> Result<()> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (w, p) in weights.iter().zip(points.iter()) {
        pos.push(w * p.spectrum().iter().filter(|v| **v > 0.0).sum::<f64>());
        neg.push(-w * p.spectrum().iter().filter(|v| **v < 0.0).sum::<f64>());
    }
    let (pw, nw) = (pairwise_sum(&pos), pairwise_sum(&neg));
    if pw + nw == 0.0 {
        return if target == 0.0 { Ok(()) } else { Err(Error::Infeasible("all points vanish".into())) };
    }
    let t = (target - (pw - nw)) / (pw + nw);
    if !(t.abs() < max_t) {
        return Err(Error::Infeasible(format!(
            "trace target {target} needs a spectral stretch of {t:.3}, outside (-{max_t}, {max_t})"
        )));
    }
    if t == 0.0 {
        return Ok(());
    }
    for p in points.iter_mut() {
        let nu: Vec<f64> = p.spectrum().iter().map(|&v| if v > 0.0 { v * (1.0 + t) } else { v * (1.0 - t) }).collect();
        *p = OperatorPoint::from_raw_parts(p.frame().clone(), nu, p.spin_dim())?;
    }
    Ok(())
}

fn trace_normal(state: &State, with_points: bool) -> Vec<f64> {
    let mut out: Vec<f64> = state.points.iter().map(|p| p.trace()).collect();
    for (w, p) in state.weights.iter().zip(&state.points) {
        let scale = if with_points { *w } else { 0.0 };
        out.extend(std::iter::repeat(scale).take(p.rank()));
        let f = p.frame();
        for i in 0..f.rows() {
            for j in 0..f.cols() {
                let z = f[(i, j)] * (2.0 * scale * p.spectrum()[j]);
                out.push(z.re);
                out.push(z.im);
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Remove the components along the constraint normals, with weights at zero
/// that want to go negative frozen.
fn tangent_gradient(state: &State, g: &[f64], with_points: bool, track_trace: bool) -> Vec<f64> {
    let n = state.points.len();
    let mut vol = vec![0.0; g.len()];
    vol[..n].iter_mut().for_each(|v| *v = 1.0);
    let tr = trace_normal(state, with_points);
    let mut frozen = vec![false; n];
    let mut gt = g.to_vec();
    for _ in 0..=n {
        let mask = |v: &[f64]| -> Vec<f64> {
            let mut m = v.to_vec();
            for a in 0..n {
                if frozen[a] {
                    m[a] = 0.0;
                }
            }
            if !with_points {
                m[n..].iter_mut().for_each(|x| *x = 0.0);
            }
            m
        };
        let gm = mask(g);
        let vm = mask(&vol);
        let tm = mask(&tr);
        let mut normals = vec![vm];
        if track_trace {
            normals.push(tm);
        }
        // Gram-Schmidt on the normals, then project them out
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in normals {
            let mut v = v;
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let nv = dot(&v, &v).sqrt();
            if nv > 1e-14 {
                v.iter_mut().for_each(|x| *x /= nv);
                basis.push(v);
            }
        }
        gt = gm;
        for b in &basis {
            let c = dot(b, &gt);
            gt.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let mut changed = false;
        for a in 0..n {
            if !frozen[a] && state.weights[a] <= 0.0 && gt[a] > 0.0 {
                frozen[a] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    gt
}

fn apply_step(state: &State, dir: &[f64], alpha: f64, cfg: &OptConfig, max_t: f64) -> Result<State> {
    let n = state.points.len();
    let tau: Vec<f64> = state.points.iter().map(|p| p.trace()).collect();
    let raw_w: Vec<f64> = (0..n).map(|a| state.weights[a] - alpha * dir[a]).collect();
    let mut next = state.clone();
    if cfg.optimize_points {
        next.weights = project_simplex(&raw_w, cfg.volume_target);
        let mut cursor = n;
        for (k, p) in state.points.iter().enumerate() {
            let r = p.rank();
            let nu: Vec<f64> = (0..r).map(|i| p.spectrum()[i] - alpha * dir[cursor + i]).collect();
            cursor += r;
            let mut v = p.frame().clone();
            for i in 0..v.rows() {
                for j in 0..v.cols() {
                    v[(i, j)] -= C64::new(dir[cursor], dir[cursor + 1]) * alpha;
                    cursor += 2;
                }
            }
            if nu.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid("non-finite step".into()));
            }
            next.points[k] = OperatorPoint::new(&v, &nu, p.spin_dim())?;
        }
        restore_trace(&next.weights, &mut next.points, cfg.trace_target, max_t)?;
    } else {
        next.weights = project_weights_with_trace(&raw_w, &tau, cfg.volume_target, cfg.trace_target)
            .ok_or_else(|| Error::Infeasible("trace target outside the range of the fixed points".into()))?;
    }
    Ok(next)
}

fn relative_residuals(state: &State, cfg: &OptConfig) -> (f64, f64) {
    let v = (state.volume() - cfg.volume_target).abs() / cfg.volume_target.abs();
    let t_scale = if cfg.trace_target != 0.0 { cfg.trace_target.abs() } else { 1.0 };
    let t = (state.trace() - cfg.trace_target).abs() / t_scale;
    (v, t)
}

fn merit(state: &State, cfg: &OptConfig) -> f64 {
    let (v, t) = relative_residuals(state, cfg);
    objective_of(state, cfg.mu) + cfg.penalty_weight * (v * v + t * t)
}

fn fd_check(state: &State, mu: f64) -> f64 {
    let a = gradient_of(state, mu, GradMode::AnalyticWithFdCheck, true).flatten();
    let f = gradient_of(state, mu, GradMode::FiniteDifference, true).flatten();
    let diff: f64 = a.iter().zip(&f).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Bring an initial measure onto the constraint set.
fn feasibility_phase(sys: &CausalFermionSystem, cfg: &OptConfig) -> Result<State> {
    let mut state = State::from_system(sys);
    if state.points.is_empty() {
        return Err(Error::Infeasible("empty measure".into()));
    }
    if cfg.optimize_points {
        state.weights = project_simplex(&state.weights, cfg.volume_target);
        restore_trace(&state.weights, &mut state.points, cfg.trace_target, 1.0)?;
    } else {
        let tau: Vec<f64> = state.points.iter().map(|p| p.trace()).collect();
        state.weights = project_weights_with_trace(&state.weights, &tau, cfg.volume_target, cfg.trace_target)
            .ok_or_else(|| Error::Infeasible("trace target outside the range of the fixed points".into()))?;
    }
    Ok(state)
}

pub fn minimize_measure(sys: &CausalFermionSystem, cfg: &OptConfig) -> Result<OptResult> {
    cfg.validate()?;
    let mut state = feasibility_phase(sys, cfg)?;
    let mut value = merit(&state, cfg);
    let mut history = vec![objective_of(&state, cfg.mu)];
    let mut records = Vec::new();
    let mut alpha = cfg.step_init;
    let mut status = OptStatus::MaxIters;
    let mut grad_norm = f64::INFINITY;
    let mut fd_err: Option<f64> = None;
    let check_fd = cfg.grad_mode == GradMode::AnalyticWithFdCheck && cfg.optimize_points;
    for iter in 0..cfg.max_iters {
        if check_fd && iter % 250 == 0 {
            let e = fd_check(&state, cfg.mu);
            fd_err = Some(fd_err.map_or(e, |x: f64| x.max(e)));
        }
        let g = gradient_of(&state, cfg.mu, cfg.grad_mode, cfg.optimize_points).flatten();
        let gt = tangent_gradient(&state, &g, cfg.optimize_points, true);
        grad_norm = dot(&gt, &gt).sqrt();
        let (vr, tr) = relative_residuals(&state, cfg);
        records.push(IterRecord { iter, objective: history[history.len() - 1], volume_residual: vr, trace_residual: tr, grad_norm });
        if grad_norm <= cfg.grad_tol {
            status = OptStatus::Converged;
            break;
        }
        let mut accepted = None;
        let mut a = alpha;
        while a > 1e-18 * cfg.step_init.max(1.0) {
            if let Ok(next) = apply_step(&state, &gt, a, cfg, 0.5) {
                let v = merit(&next, cfg);
                if v.is_finite() && v <= value - ARMIJO_C * a * grad_norm * grad_norm {
                    accepted = Some((next, v));
                    break;
                }
            }
            a *= 0.5;
        }
        match accepted {
            Some((next, v)) => {
                state = next;
                value = v;
                history.push(objective_of(&state, cfg.mu));
                alpha = (2.0 * a).min(1e6 * cfg.step_init);
            }
            None => {
                status = OptStatus::Stalled;
                break;
            }
        }
    }
    let (volume_residual, trace_residual) = relative_residuals(&state, cfg);
    let system = state.into_system(PRUNE_TOL * cfg.volume_target)?;
    Ok(OptResult {
        system,
        objective_history: history,
        records,
        volume_residual,
        trace_residual,
        grad_norm,
        status,
        fd_check_error: fd_err,
    })
}

/// `l(x) = sum_b w_b L_mu(x, x_b)` on the support and at probe points.
#[derive(Clone, Debug)]
pub struct StationarityReport {
    pub grad_norm: f64,
    pub support: Vec<f64>,
    pub probes: Vec<f64>,
    pub mean: f64,
    pub spread: f64,
    /// Spread of `l(x_a) - kappa tr(x_a) / 2` with `kappa` fitted, which is
    /// what has to be constant on the support when the trace constraint is
    /// active.
    pub corrected_spread: f64,
    pub trace_multiplier: f64,
    pub min_probe: f64,
}

pub fn ell(sys: &CausalFermionSystem, x: &OperatorPoint, mu: f64) -> Result<f64> {
    let terms: Result<Vec<f64>> = sys
        .measure()
        .atoms()
        .iter()
        .map(|a| Ok(a.weight * lagrangian_mu_from_spectrum(&crate::system::product_spectrum(x, &a.point)?, x.spin_dim(), Some(mu))))
        .collect();
    Ok(pairwise_sum(&terms?))
}

pub fn stationarity_report(sys: &CausalFermionSystem, cfg: &OptConfig, probes: usize) -> Result<StationarityReport> {
    let state = State::from_system(sys);
    let g = gradient_of(&state, cfg.mu, cfg.grad_mode, cfg.optimize_points).flatten();
    let gt = tangent_gradient(&state, &g, cfg.optimize_points, true);
    let grad_norm = dot(&gt, &gt).sqrt();
    let support: Vec<f64> = sys.measure().atoms().iter().map(|a| ell(sys, &a.point, cfg.mu)).collect::<Result<_>>()?;
    let mut g = rng(cfg.seed ^ 0x5eed);
    let mut probe_vals = Vec::with_capacity(probes);
    for _ in 0..probes {
        let p = random_point(&mut g, sys.dim(), sys.spin_dim(), 2.0)?;
        probe_vals.push(ell(sys, &p, cfg.mu)?);
    }
    let n = support.len() as f64;
    let mean = support.iter().sum::<f64>() / n;
    let spread = support.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - support.iter().cloned().fold(f64::INFINITY, f64::min);
    let tau: Vec<f64> = sys.measure().atoms().iter().map(|a| a.point.trace()).collect();
    let tm = tau.iter().sum::<f64>() / n;
    let stt: f64 = tau.iter().map(|t| (t - tm) * (t - tm)).sum();
    let slope = if stt > 1e-14 * tau.iter().map(|t| t * t).sum::<f64>().max(1e-300) {
        tau.iter().zip(&support).map(|(t, l)| (t - tm) * (l - mean)).sum::<f64>() / stt
    } else {
        0.0
    };
    let corrected: Vec<f64> = support.iter().zip(&tau).map(|(l, t)| l - slope * t).collect();
    let corrected_spread = corrected.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - corrected.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(StationarityReport {
        grad_norm,
        support,
        min_probe: probe_vals.iter().cloned().fold(f64::INFINITY, f64::min),
        probes: probe_vals,
        mean,
        spread,
        corrected_spread,
        trace_multiplier: 2.0 * slope,
    })
}

/// Random point with a random signature up to `(n, n)` and eigenvalue moduli
/// in `(0.1, max_mod)`.
pub fn random_point<R: Rng + ?Sized>(g: &mut R, dim: usize, spin: usize, max_mod: f64) -> Result<OperatorPoint> {
    let p = 1 + g.gen_range(0..spin);
    let q = 1 + g.gen_range(0..spin);
    let mut nu: Vec<f64> = (0..p).map(|_| uniform(g, 0.1, max_mod)).collect();
    nu.extend((0..q).map(|_| -uniform(g, 0.1, max_mod)));
    let v = random_frame(g, dim, nu.len());
    OperatorPoint::new(&v, &nu, spin)
}

/// Random measure mapped onto the constraint set. Returns `None` when the
/// trace target cannot be reached from the drawn points.
pub fn random_feasible_system<R: Rng + ?Sized>(
    g: &mut R,
    atoms: usize,
    dim: usize,
    spin: usize,
    cfg: &OptConfig,
) -> Result<Option<CausalFermionSystem>> {
    let mut pts = Vec::with_capacity(atoms);
    let mut raw_w = Vec::with_capacity(atoms);
    for _ in 0..atoms {
        pts.push(random_point(g, dim, spin, 2.0)?);
        raw_w.push(-(1.0 - g.gen::<f64>()).ln());
    }
    let s: f64 = raw_w.iter().sum();
    let weights: Vec<f64> = raw_w.iter().map(|w| w * cfg.volume_target / s).collect();
    if restore_trace(&weights, &mut pts, cfg.trace_target, 1.0).is_err() {
        return Ok(None);
    }
    let atoms = weights.into_iter().zip(pts).map(|(weight, point)| Atom { point, weight }).collect();
    Ok(Some(CausalFermionSystem::new(dim, spin, DiscreteMeasure::new(atoms)?)?))
}
