//! One function per subcommand. Each writes its artifacts and returns the
//! summary block of the manifest.

use cfslab::discrete::{check_admissible, flow_descent, random_admissible, write_fermion, FlowConfig, KreinSpace, SpacetimePartition};
use cfslab::lightcone::{ordered_exp, FnPath, PexpMethod};
use cfslab::linalg::{CMat, C64};
use cfslab::optimize::{minimize_measure, objective_mu, random_feasible_system, random_point, OptConfig};
use cfslab::par;
use cfslab::perturbation::{
    contour_sea_projector, dirac_identity_residual, finite_dirac_operator, spectral_sea_projector, Contour, Expansion,
    FiniteSeaModel,
};
use cfslab::random::{gaussian_matrix, rng, uniform, SeededRng};
use cfslab::sea::lattice::{MomentumLattice, SpaceDim};
use cfslab::sea::sweep::{class_stats, pair_lagrangians, sample_points, suppression_ratio};
use cfslab::sea::vacuum::{build_sea, RegularizationSpec};
use cfslab::spectral::{eigenvalues, eigenvalues_dense, leading_values, matched_distance, MAX_DENSE_DIM};
use cfslab::system::closed_chain;
use cfslab::system::container::write_system;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{num, OutDir};
use crate::plot::{Plot, Scale, Series};
use crate::{CliError, CliResult};

fn need(ok: bool, msg: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()))
    }
}

pub fn dispatch(loaded: &Loaded, out: &mut OutDir) -> CliResult<Value> {
    let seed = loaded.seed;
    match &loaded.section {
        Section::Eigencheck(c) => eigencheck(c, seed, out),
        Section::VacuumSweep(c) => vacuum_sweep(c, seed, out),
        Section::Minimize(c) => minimize(c, seed, out),
        Section::DiscreteVp(c) => discrete_vp(c, seed, out),
        Section::SeaContour(c) => sea_contour(c, seed, out),
        Section::PexpTest(c) => pexp_test(c, seed, out),
    }
}

/// Slope of log y against log x by least squares.
fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = pts.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

fn eigencheck(c: &EigencheckConfig, seed: u64, out: &mut OutDir) -> CliResult<Value> {
    need(c.pairs > 0, "eigencheck.pairs must be positive")?;
    need(c.max_modulus > 0.1, "eigencheck.max_modulus must exceed 0.1")?;
    for &n in &c.spins {
        for &d in &c.dims {
            need(n >= 1 && 2 * n <= d && d <= MAX_DENSE_DIM, "eigencheck needs 1 <= spin, 2 spin <= dim <= 256")?;
        }
    }
    let mut g = rng(seed);
    let mut rows = Vec::new();
    let mut pair_rows = Vec::new();
    let mut series = Vec::new();
    let mut all_pass = true;
    for &n in &c.spins {
        let mut pts = Vec::new();
        for &d in &c.dims {
            let pairs: Vec<_> = (0..c.pairs)
                .map(|_| Ok((random_point(&mut g, d, n, c.max_modulus)?, random_point(&mut g, d, n, c.max_modulus)?)))
                .collect::<cfslab::Result<_>>()?;
            let results = par::map(&pairs, |(x, y)| -> cfslab::Result<(f64, f64)> {
                let chain = eigenvalues_dense(&closed_chain(x, y)?)?;
                let full = eigenvalues(&x.to_dense().matmul(&y.to_dense()))?;
                let k = x.rank().min(y.rank());
                let a = leading_values(&chain.values, k);
                let b = leading_values(&full, k);
                let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
                Ok((matched_distance(&a, &b)? / scale, chain.residual))
            });
            let (mut worst, mut sum, mut worst_res) = (0.0f64, 0.0, 0.0f64);
            for (i, r) in results.into_iter().enumerate() {
                let (dist, res) = r?;
                worst = worst.max(dist);
                worst_res = worst_res.max(res);
                sum += dist;
                pair_rows.push(vec![d.to_string(), n.to_string(), i.to_string(), num(dist)]);
            }
            let pass = worst <= c.tolerance;
            all_pass &= pass;
            rows.push(vec![d.to_string(), n.to_string(), c.pairs.to_string(), num(worst), num(sum / c.pairs as f64), num(worst_res), pass.to_string()]);
            pts.push((d as f64, worst));
            out.log(&format!("N={d} n={n}: worst relative distance {worst:e}"));
        }
        series.push(Series { name: format!("n = {n}"), points: pts });
    }
    out.write_csv(
        "eigencheck.csv",
        &["dim", "spin", "pairs", "max_rel_distance", "mean_rel_distance", "max_eig_residual", "pass"],
        &rows,
    )?;
    out.write_csv("eigencheck_pairs.csv", &["dim", "spin", "pair", "rel_distance"], &pair_rows)?;
    let plot = Plot {
        title: "closed chain vs dense product",
        x_label: "Hilbert dimension N",
        y_label: "max relative distance",
        x_scale: Scale::Log,
        y_scale: Scale::Log,
    };
    out.write_bytes("eigencheck.svg", plot.render(&series).as_bytes())?;
    Ok(json!({ "tolerance": c.tolerance, "pass": all_pass }))
}

fn vacuum_sweep(c: &VacuumSweepConfig, seed: u64, out: &mut OutDir) -> CliResult<Value> {
    need(!c.epsilons.is_empty(), "vacuum_sweep.epsilons is empty")?;
    need(c.samples >= 2, "vacuum_sweep.samples must be at least 2")?;
    let dim = match c.space {
        Space::OnePlusOne => SpaceDim::D1,
        Space::ThreePlusOne => SpaceDim::D3,
    };
    let lattice = MomentumLattice::new(c.extent, c.points, dim, c.mass)?;
    let sea = build_sea(&lattice)?;
    let mut g = rng(seed);
    let points = sample_points(&mut g, c.samples, c.t_max, c.x_max, dim);
    let mut rows = Vec::new();
    let mut pair_rows = Vec::new();
    let mut ratios = Vec::new();
    let mut means: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for &eps in &c.epsilons {
        let reg = RegularizationSpec::new(eps)?;
        let samples = pair_lagrangians(&sea, &reg, &points, c.margin)?;
        let st = class_stats(&samples);
        let ratio = suppression_ratio(&samples);
        out.log(&format!("eps={eps}: ratio {ratio:e}"));
        ratios.push((eps, ratio));
        means[0].push((eps, st[0].mean));
        means[1].push((eps, st[1].mean));
        rows.push(vec![
            num(eps),
            st[0].count.to_string(),
            num(st[0].mean),
            num(st[0].max),
            st[1].count.to_string(),
            num(st[1].mean),
            num(st[1].max),
            st[2].count.to_string(),
            num(ratio),
        ]);
        for s in &samples {
            pair_rows.push(vec![num(eps), s.a.to_string(), s.b.to_string(), num(s.xi2), s.class.as_str().to_string(), num(s.lagrangian)]);
        }
    }
    out.write_csv(
        "sweep.csv",
        &["epsilon", "spacelike_count", "spacelike_mean", "spacelike_max", "timelike_count", "timelike_mean", "timelike_max", "near_cone_count", "ratio"],
        &rows,
    )?;
    out.write_csv("pairs.csv", &["epsilon", "a", "b", "xi2", "class", "lagrangian"], &pair_rows)?;
    let plot = Plot { title: "mean Lagrangian by causal class", x_label: "epsilon", y_label: "mean L", x_scale: Scale::Log, y_scale: Scale::Log };
    let svg = plot.render(&[
        Series { name: "spacelike".into(), points: means[0].clone() },
        Series { name: "timelike".into(), points: means[1].clone() },
    ]);
    out.write_bytes("sweep.svg", svg.as_bytes())?;
    let plot = Plot { title: "spacelike / timelike", x_label: "epsilon", y_label: "ratio", x_scale: Scale::Log, y_scale: Scale::Log };
    out.write_bytes("ratio.svg", plot.render(&[Series { name: "ratio".into(), points: ratios.clone() }]).as_bytes())?;
    let decreasing = ratios.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(json!({
        "modes": sea.dim(),
        "ratios": ratios.iter().map(|r| r.1).collect::<Vec<_>>(),
        "ratio_strictly_decreasing": decreasing,
    }))
}

fn minimize(c: &MinimizeConfig, seed: u64, out: &mut OutDir) -> CliResult<Value> {
    need(c.atoms > 0 && c.spin > 0 && 2 * c.spin <= c.dim, "minimize needs atoms > 0 and 2 spin <= dim")?;
    let cfg = OptConfig {
        mu: c.mu,
        volume_target: c.volume_target,
        trace_target: c.trace_target,
        max_iters: c.max_iters,
        step_init: c.step_init,
        seed,
        ..OptConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut g = rng(seed);
    let draw = |g: &mut SeededRng| -> CliResult<_> {
        for _ in 0..1000 {
            if let Some(s) = random_feasible_system(g, c.atoms, c.dim, c.spin, &cfg)? {
                return Ok(s);
            }
        }
        Err(CliError::Compute("no feasible random start in 1000 draws".into()))
    };
    let start = draw(&mut g)?;
    let start_obj = objective_mu(&start, c.mu)?;
    let res = minimize_measure(&start, &cfg)?;
    let fin = objective_mu(&res.system, c.mu)?;
    out.log(&format!("objective {start_obj:e} -> {fin:e} ({})", res.status.as_str()));
    let rows: Vec<Vec<String>> = res
        .records
        .iter()
        .map(|r| vec![r.iter.to_string(), num(r.objective), num(r.volume_residual), num(r.trace_residual), num(r.grad_norm)])
        .collect();
    out.write_csv("history.csv", &["iter", "objective", "volume_residual", "trace_residual", "grad_norm"], &rows)?;
    let atoms: Vec<Vec<String>> = res
        .system
        .measure()
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let spec: Vec<String> = a.point.spectrum().iter().map(|&v| num(v)).collect();
            vec![i.to_string(), num(a.weight), num(a.point.trace()), spec.join(";")]
        })
        .collect();
    out.write_csv("atoms.csv", &["atom", "weight", "trace", "spectrum"], &atoms)?;
    out.write_bytes("system.cfs", write_system(&res.system).as_bytes())?;
    let plot = Plot { title: "measure optimization", x_label: "iteration", y_label: "objective", x_scale: Scale::Linear, y_scale: Scale::Log };
    let pts: Vec<(f64, f64)> = res.records.iter().map(|r| (r.iter as f64, r.objective)).collect();
    out.write_bytes("objective.svg", plot.render(&[Series { name: "objective".into(), points: pts }]).as_bytes())?;

    let mut best = Value::Null;
    let mut beats = Value::Null;
    if c.restarts > 0 {
        // independent stream so the baseline does not depend on the optimizer
        let mut h = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut b = f64::INFINITY;
        for _ in 0..c.restarts {
            b = b.min(objective_mu(&draw(&mut h)?, c.mu)?);
        }
        best = json!(b);
        beats = json!(fin <= b);
    }
    Ok(json!({
        "status": res.status.as_str(),
        "start_objective": start_obj,
        "final_objective": fin,
        "volume_residual": res.volume_residual,
        "trace_residual": res.trace_residual,
        "grad_norm": res.grad_norm,
        "best_of_restarts": best,
        "beats_restarts": beats,
    }))
}

fn discrete_vp(c: &DiscreteVpConfig, seed: u64, out: &mut OutDir) -> CliResult<Value> {
    let part = SpacetimePartition::uniform(c.blocks, c.block_size).map_err(|e| CliError::Config(e.to_string()))?;
    let space = KreinSpace::canonical(&part);
    let mut g = rng(seed);
    let p = random_admissible(&mut g, &space, c.f).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = FlowConfig { mu: c.mu, max_iters: c.max_iters, step_init: c.step_init, rel_tol: c.rel_tol, ..FlowConfig::default() };
    let res = flow_descent(&space, &part, &p, &cfg)?;
    let gain = res.initial_residual / res.final_residual;
    out.log(&format!("residual {:e} -> {:e} ({})", res.initial_residual, res.final_residual, res.status.as_str()));
    let rows: Vec<Vec<String>> = res
        .records
        .iter()
        .map(|r| vec![r.iter.to_string(), num(r.action), num(r.constraint), num(r.residual), num(r.mu), num(r.step)])
        .collect();
    out.write_csv("flow.csv", &["iter", "action", "constraint", "residual", "mu", "step"], &rows)?;
    out.write_bytes("fermion.txt", write_fermion(&space, &part, &res.p).as_bytes())?;
    let plot = Plot { title: "flow descent", x_label: "iteration", y_label: "EL residual", x_scale: Scale::Linear, y_scale: Scale::Log };
    let pts: Vec<(f64, f64)> = res.records.iter().map(|r| (r.iter as f64, r.residual)).collect();
    out.write_bytes("flow.svg", plot.render(&[Series { name: "|[P,Q]|".into(), points: pts }]).as_bytes())?;
    let admissible = check_admissible(&space, &res.p, c.f)?.admissible;
    Ok(json!({
        "status": res.status.as_str(),
        "initial_residual": res.initial_residual,
        "final_residual": res.final_residual,
        "reduction": gain,
        "admissible": admissible,
    }))
}

fn sea_contour(c: &SeaContourConfig, seed: u64, out: &mut OutDir) -> CliResult<Value> {
    need(c.models > 0 && c.dim_max >= 2, "sea_contour needs models > 0 and dim_max >= 2")?;
    need(c.strengths.iter().all(|&s| s > 0.0), "sea_contour.strengths must be positive")?;
    let contour = Contour { center: C64::new(-1.0, 0.0), radius: c.radius, nodes: c.nodes };
    contour.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut g = rng(seed);
    let mut draws = Vec::new();
    for _ in 0..c.models {
        let d = (2 + (uniform(&mut g, 0.0, 1.0) * (c.dim_max - 1) as f64) as usize).min(c.dim_max);
        let mut signs: Vec<i8> = (0..d).map(|_| (uniform(&mut g, 0.0, 3.0) as i8).min(2) - 1).collect();
        signs[0] = -1;
        draws.push(FiniteSeaModel::random(&mut g, &signs, 1.0)?);
    }
    // (strength, order) -> (max error, max residual)
    let mut table = vec![vec![(0.0f64, 0.0f64); c.orders.len()]; c.strengths.len()];
    for (si, &s) in c.strengths.iter().enumerate() {
        let per_model = par::map(&draws, |m| -> cfslab::Result<Vec<(f64, f64)>> {
            let m = m.with_dk(m.dk().scale_re(s))?;
            let exact = spectral_sea_projector(&m, &contour)?;
            let d = finite_dirac_operator(&m)?;
            c.orders
                .iter()
                .map(|&o| {
                    let p = contour_sea_projector(&m, &contour, Expansion::Neumann { order: o })?;
                    Ok((CMat::dist(&p, &exact), dirac_identity_residual(&p, &d)?))
                })
                .collect()
        });
        for r in per_model {
            for (cell, (e, res)) in table[si].iter_mut().zip(r?) {
                cell.0 = cell.0.max(e);
                cell.1 = cell.1.max(res);
            }
        }
        out.log(&format!("strength {s} done"));
    }
    let mut rows = Vec::new();
    for (si, &s) in c.strengths.iter().enumerate() {
        for (oi, &o) in c.orders.iter().enumerate() {
            let (e, r) = table[si][oi];
            rows.push(vec![num(s), o.to_string(), c.models.to_string(), num(e), num(r)]);
        }
    }
    out.write_csv("contour.csv", &["strength", "order", "models", "max_error", "max_dirac_residual"], &rows)?;
    let mut exps = Vec::new();
    let mut exp_rows = Vec::new();
    for (oi, &o) in c.orders.iter().enumerate() {
        let pts: Vec<(f64, f64)> = c.strengths.iter().enumerate().map(|(si, &s)| (s, table[si][oi].1)).collect();
        let e = log_slope(&pts);
        exps.push(json!({ "order": o, "exponent": e }));
        exp_rows.push(vec![o.to_string(), num(e)]);
    }
    out.write_csv("exponents.csv", &["order", "dirac_residual_exponent"], &exp_rows)?;
    let series: Vec<Series> = c
        .strengths
        .iter()
        .enumerate()
        .map(|(si, &s)| Series { name: format!("|dk| = {s}"), points: c.orders.iter().enumerate().map(|(oi, &o)| (o as f64, table[si][oi].0)).collect() })
        .collect();
    let plot = Plot { title: "Neumann truncation", x_label: "order", y_label: "max |P - P_exact|", x_scale: Scale::Linear, y_scale: Scale::Log };
    out.write_bytes("contour.svg", plot.render(&series).as_bytes())?;
    Ok(json!({ "models": c.models, "exponents": exps }))
}

fn pexp_test(c: &PexpTestConfig, seed: u64, out: &mut OutDir) -> CliResult<Value> {
    need(c.paths > 0 && c.dim > 0, "pexp_test needs paths > 0 and dim > 0")?;
    need(c.orders.iter().all(|&o| o <= cfslab::lightcone::MAX_DYSON_ORDER), "pexp_test.orders must be <= 12")?;
    let mut g = rng(seed);
    let mut worst = vec![0.0f64; c.orders.len()];
    let mut mean = vec![0.0f64; c.orders.len()];
    for _ in 0..c.paths {
        let a: [CMat; 3] = std::array::from_fn(|_| {
            let m = gaussian_matrix(&mut g, c.dim, c.dim);
            let n = m.norm_fro();
            m.scale_re(c.strength / (3.0 * n))
        });
        let w = uniform(&mut g, 0.5, 3.0);
        let path = FnPath::new(c.dim, |t: f64| {
            let mut m = a[0].clone();
            m.axpy(C64::new((w * t).sin(), 0.0), &a[1]);
            m.axpy(C64::new(t * t, 0.0), &a[2]);
            m
        });
        let exact = ordered_exp(&path, 0.0, 1.0, PexpMethod::Ode { tol: 1e-12 })?;
        for (k, &o) in c.orders.iter().enumerate() {
            let e = CMat::dist(&ordered_exp(&path, 0.0, 1.0, PexpMethod::dyson(o))?, &exact);
            worst[k] = worst[k].max(e);
            mean[k] += e / c.paths as f64;
        }
    }
    // constant families are matrix exponentials
    let mut const_err = 0.0f64;
    for _ in 0..c.paths {
        let f = gaussian_matrix(&mut g, c.dim, c.dim);
        let f = f.scale_re(c.strength / f.norm_2());
        let path = FnPath::new(c.dim, |_| f.clone());
        let got = ordered_exp(&path, 0.0, 1.0, PexpMethod::dyson(cfslab::lightcone::MAX_DYSON_ORDER))?;
        const_err = const_err.max(CMat::dist(&got, &f.expm()?));
    }
    let rows: Vec<Vec<String>> = c.orders.iter().enumerate().map(|(k, &o)| vec![o.to_string(), c.paths.to_string(), num(worst[k]), num(mean[k])]).collect();
    out.write_csv("pexp.csv", &["order", "paths", "max_error", "mean_error"], &rows)?;
    let plot = Plot { title: "Dyson truncation vs integrator", x_label: "order", y_label: "error", x_scale: Scale::Linear, y_scale: Scale::Log };
    let svg = plot.render(&[
        Series { name: "max".into(), points: c.orders.iter().zip(&worst).map(|(&o, &e)| (o as f64, e)).collect() },
        Series { name: "mean".into(), points: c.orders.iter().zip(&mean).map(|(&o, &e)| (o as f64, e)).collect() },
    ]);
    out.write_bytes("pexp.svg", svg.as_bytes())?;
    Ok(json!({ "constant_family_error": const_err, "max_error_at_highest_order": worst.last().copied() }))
}
