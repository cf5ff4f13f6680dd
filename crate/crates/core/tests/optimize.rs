use cfslab::linalg::CMat;
use cfslab::optimize::{
    minimize_measure, objective_gradient, objective_mu, random_feasible_system, random_point, stationarity_report, GradMode,
    OptConfig, OptStatus,
};
use cfslab::random::rng;
use cfslab::system::{lagrangian_mu, Atom, CausalFermionSystem, DiscreteMeasure, OperatorPoint};

fn system_from(points: Vec<OperatorPoint>, weights: Vec<f64>) -> CausalFermionSystem {
    let dim = points[0].dim();
    let spin = points[0].spin_dim();
    let atoms = points.into_iter().zip(weights).map(|(point, weight)| Atom { point, weight }).collect();
    CausalFermionSystem::new(dim, spin, DiscreteMeasure::new(atoms).unwrap()).unwrap()
}

fn random_system(seed: u64, atoms: usize, dim: usize, spin: usize) -> CausalFermionSystem {
    let mut g = rng(seed);
    let pts = (0..atoms).map(|_| random_point(&mut g, dim, spin, 2.0).unwrap()).collect();
    let w = (0..atoms).map(|k| 0.2 + 0.1 * k as f64).collect();
    system_from(pts, w)
}

#[test]
fn objective_at_half_inverse_spin_is_the_action() {
    let sys = random_system(1, 4, 5, 2);
    assert_eq!(objective_mu(&sys, 0.25).unwrap(), sys.action().unwrap());
    assert!(objective_mu(&sys, 0.0).unwrap() >= 0.0);
}

#[test]
fn objective_matches_double_loop() {
    let sys = random_system(2, 4, 6, 2);
    let atoms = sys.measure().atoms();
    let mut s = 0.0;
    for a in atoms {
        for b in atoms {
            // dense product, largest four eigenvalues
            let ev = cfslab::spectral::eigenvalues_dense(&a.point.to_dense().matmul(&b.point.to_dense())).unwrap().values;
            let mut m: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
            m.sort_by(|x, y| y.partial_cmp(x).unwrap());
            m.truncate(4);
            let sq: f64 = m.iter().map(|x| x * x).sum();
            let sum: f64 = m.iter().sum();
            s += a.weight * b.weight * (sq - 0.3 * sum * sum);
        }
    }
    let got = objective_mu(&sys, 0.3).unwrap();
    assert!((got - s).abs() <= 1e-8 * s.abs());
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    for seed in 0..10 {
        let sys = random_system(100 + seed, 3, 4, 1 + (seed as usize) % 2);
        let a = objective_gradient(&sys, 0.2, GradMode::AnalyticWithFdCheck);
        let f = objective_gradient(&sys, 0.2, GradMode::FiniteDifference);
        let mut worst = 0.0f64;
        for (x, y) in a.weights.iter().zip(&f.weights) {
            worst = worst.max((x - y).abs() / y.abs().max(1e-3));
        }
        for (sa, sf) in a.spectra.iter().zip(&f.spectra) {
            for (x, y) in sa.iter().zip(sf) {
                worst = worst.max((x - y).abs() / y.abs().max(1e-3));
            }
        }
        for (fa, ff) in a.frames.iter().zip(&f.frames) {
            let rel = CMat::dist(fa, ff) / ff.norm_fro().max(1e-3);
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-5, "seed {seed}: relative gradient mismatch {worst:e} (fd pairs {})", a.fd_pairs);
    }
}

#[test]
fn single_fixed_atom_is_fully_constrained() {
    let x = OperatorPoint::new(&CMat::identity(2), &[2.0, -1.0], 1).unwrap();
    let sys = system_from(vec![x.clone()], vec![0.7]);
    let cfg = OptConfig { volume_target: 3.0, trace_target: 3.0, optimize_points: false, mu: 0.5, ..OptConfig::default() };
    let res = minimize_measure(&sys, &cfg).unwrap();
    let w = res.system.measure().atoms()[0].weight;
    assert_eq!(w, 3.0);
    let obj = objective_mu(&res.system, 0.5).unwrap();
    assert!((obj - 9.0 * lagrangian_mu(&x, &x, 0.5).unwrap()).abs() < 1e-12);
}

#[test]
fn flat_zero_configuration() {
    let x = OperatorPoint::new(&CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]), &[1.0, -1.0], 1).unwrap();
    let y = OperatorPoint::new(&CMat::from_real_rows(&[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), &[0.5, -0.5], 1).unwrap();
    let sys = system_from(vec![x, y], vec![0.4, 0.6]);
    let cfg = OptConfig { mu: 0.5, volume_target: 1.0, trace_target: 0.0, ..OptConfig::default() };
    let res = minimize_measure(&sys, &cfg).unwrap();
    assert_eq!(res.status, OptStatus::Converged);
    assert!(res.grad_norm <= 1e-8);
    assert_eq!(objective_mu(&res.system, 0.5).unwrap(), 0.0);
    let rep = stationarity_report(&res.system, &cfg, 4).unwrap();
    assert!(rep.support.iter().all(|&l| l == 0.0));
}

#[test]
fn single_atom_stationarity_value() {
    let x = OperatorPoint::new(&CMat::identity(2), &[2.0, -1.0], 1).unwrap();
    let sys = system_from(vec![x.clone()], vec![0.7]);
    let cfg = OptConfig { mu: 0.3, ..OptConfig::default() };
    let rep = stationarity_report(&sys, &cfg, 0).unwrap();
    assert!((rep.support[0] - 0.7 * lagrangian_mu(&x, &x, 0.3).unwrap()).abs() < 1e-14);
}

fn desk_config() -> OptConfig {
    OptConfig { mu: 0.25, volume_target: 1.0, trace_target: 1.0, max_iters: 3000, step_init: 0.05, seed: 11, ..OptConfig::default() }
}

#[test]
fn history_is_monotone_and_constraints_hold() {
    let cfg = desk_config();
    let mut g = rng(cfg.seed);
    let start = random_feasible_system(&mut g, 4, 4, 1, &cfg).unwrap().unwrap();
    let res = minimize_measure(&start, &OptConfig { max_iters: 300, ..cfg.clone() }).unwrap();
    assert!(res.objective_history.windows(2).all(|w| w[1] <= w[0]));
    assert!(res.volume_residual <= 1e-6 && res.trace_residual <= 1e-6);
    assert!(res.system.measure().atoms().iter().all(|a| a.weight > 0.0));
    let fd = res.fd_check_error.unwrap();
    assert!(fd <= 1e-5, "fd check {fd:e}");
}

#[test]
fn runs_are_bit_reproducible() {
    let cfg = OptConfig { max_iters: 150, ..desk_config() };
    let run = || {
        let mut g = rng(cfg.seed);
        let start = random_feasible_system(&mut g, 5, 4, 1, &cfg).unwrap().unwrap();
        minimize_measure(&start, &cfg).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.objective_history.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.objective_history.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.system, b.system);
}

#[test]
fn infeasible_trace_is_reported() {
    // only negative spectra cannot reach a positive trace by stretching
    let x = OperatorPoint::new(&CMat::identity(2), &[-1.0], 1);
    assert!(x.is_err());
    let x = OperatorPoint::new(&CMat::from_real_rows(&[&[1.0], &[0.0]]), &[-1.0], 1).unwrap();
    let sys = system_from(vec![x], vec![1.0]);
    let err = minimize_measure(&sys, &OptConfig { trace_target: 2.0, ..OptConfig::default() }).unwrap_err();
    assert!(matches!(err, cfslab::Error::Infeasible(_)), "{err}");
}
