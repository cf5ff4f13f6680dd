mod common;

use cfslab::linalg::{CMat, C64};
use cfslab::random::{random_frame, random_unitary, rng, uniform, SeededRng};
use cfslab::spectral::eigenvalues_dense;
use cfslab::system::container::{read_system, write_system};
use cfslab::system::{
    causal_classify, closed_chain, kernel, lagrangian, lagrangian_from_spectrum, product_spectrum, Atom,
    CausalFermionSystem, DiscreteMeasure, OperatorPoint, Separation, CAUSAL_TOL,
};
use common::{eigen_oracle, largest, multiset_distance};
use proptest::prelude::*;

fn random_point(g: &mut SeededRng, dim: usize, n: usize) -> OperatorPoint {
    let p = 1 + (uniform(g, 0.0, n as f64) as usize).min(n - 1);
    let q = 1 + (uniform(g, 0.0, n as f64) as usize).min(n - 1);
    let mut nu: Vec<f64> = (0..p).map(|_| uniform(g, 0.2, 2.0)).collect();
    nu.extend((0..q).map(|_| -uniform(g, 0.2, 2.0)));
    let v = random_frame(g, dim, nu.len());
    OperatorPoint::new(&v, &nu, n).unwrap()
}

#[test]
fn reconstruction_from_random_frame() {
    let mut g = rng(8);
    let v = random_frame(&mut g, 8, 4);
    let nu = [2.0, 1.0, -1.0, -3.0];
    let p = OperatorPoint::new(&v, &nu, 2).unwrap();
    let want = v.matmul(&CMat::from_real_diag(&nu)).matmul(&v.adjoint());
    assert!(CMat::dist(&p.to_dense(), &want) < 1e-12);
    let gram = p.frame().adjoint_mul(p.frame());
    assert!(CMat::dist(&gram, &CMat::identity(4)) < 1e-12);
}

#[test]
fn non_orthonormal_frame_keeps_operator() {
    let mut g = rng(9);
    let v = cfslab::random::gaussian_matrix(&mut g, 6, 2);
    let p = OperatorPoint::new(&v, &[1.5, -0.5], 1).unwrap();
    let want = v.matmul(&CMat::from_real_diag(&[1.5, -0.5])).matmul(&v.adjoint());
    assert!(CMat::dist(&p.to_dense(), &want) < 1e-12 * want.norm_fro());
    assert_eq!(p.signature().positive, 1);
}

#[test]
fn product_spectrum_matches_full_product() {
    let mut g = rng(16);
    let x = random_point(&mut g, 16, 2);
    let y = random_point(&mut g, 16, 2);
    let full = eigenvalues_dense(&x.to_dense().matmul(&y.to_dense())).unwrap();
    let ps = product_spectrum(&x, &y).unwrap();
    let d = multiset_distance(&largest(&ps, x.rank().min(y.rank())), &largest(&full.values, x.rank().min(y.rank())));
    assert!(d < 1e-9, "{d:e}");
}

#[test]
fn closed_chain_spectrum_matches_product_spectrum() {
    let mut g = rng(17);
    for _ in 0..20 {
        let x = random_point(&mut g, 10, 3);
        let y = random_point(&mut g, 10, 3);
        let a = closed_chain(&x, &y).unwrap();
        let ev = eigenvalues_dense(&a).unwrap().values;
        let ps = product_spectrum(&x, &y).unwrap();
        let k = ev.len();
        assert!(multiset_distance(&largest(&ev, k), &largest(&ps, k)) < 1e-9);
        // reduced matrix eigenvalues against the polynomial oracle
        let oracle = eigen_oracle(&a);
        assert!(multiset_distance(&ev, &oracle) < 1e-9 * a.norm_fro().max(1.0));
    }
}

#[test]
fn kernel_of_diag_point_is_itself() {
    let x = OperatorPoint::new(&CMat::identity(2), &[1.0, -1.0], 1).unwrap();
    assert!(CMat::dist(&kernel(&x, &x).unwrap(), &CMat::from_real_diag(&[1.0, -1.0])) < 1e-15);
}

/// Points whose closed chain has eigenvalues `b_i a_i e^{+-i theta_i}`.
fn equal_moduli_pair(g: &mut SeededRng, dim: usize, n: usize) -> (OperatorPoint, OperatorPoint) {
    let target = uniform(g, 0.3, 3.0);
    let mut xs = Vec::new();
    let mut ys = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        let a = uniform(g, 0.5, 2.0);
        let b = target / a;
        let th = uniform(g, 0.1, 1.4);
        xs.push(a);
        xs.push(-a);
        ys[(2 * k, 2 * k)] = C64::new(b * th.cos(), 0.0);
        ys[(2 * k, 2 * k + 1)] = C64::new(b * th.sin(), 0.0);
        ys[(2 * k + 1, 2 * k)] = C64::new(b * th.sin(), 0.0);
        ys[(2 * k + 1, 2 * k + 1)] = C64::new(-b * th.cos(), 0.0);
    }
    let u = random_frame(g, dim, 2 * n);
    let x = OperatorPoint::new(&u, &xs, n).unwrap();
    let y = OperatorPoint::from_factored(&u, &ys, n).unwrap();
    (x, y)
}

#[test]
fn equal_moduli_give_zero_lagrangian() {
    let mut g = rng(21);
    for n in 1..=3 {
        for _ in 0..50 {
            let (x, y) = equal_moduli_pair(&mut g, 8, n);
            let lam = product_spectrum(&x, &y).unwrap();
            let scale: f64 = lam.iter().map(|z| z.norm_sqr()).sum();
            let l = lagrangian(&x, &y).unwrap();
            assert!(l <= 1e-12 * scale, "L = {l:e}, scale {scale:e}");
            assert_eq!(causal_classify(&x, &y, CAUSAL_TOL).unwrap().separation, Separation::Spacelike);
        }
    }
}

#[test]
fn unequal_moduli_give_positive_lagrangian() {
    let lam = [C64::new(4.0, 0.0), C64::new(1.0, 0.0)];
    assert_eq!(lagrangian_from_spectrum(&lam, 1), 4.5);
    let lam = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0 + 1e-6, 0.0), C64::new(-1.0, 0.0)];
    assert!(lagrangian_from_spectrum(&lam, 2) > 0.0);
}

fn system(g: &mut SeededRng, atoms: usize, dim: usize, n: usize) -> CausalFermionSystem {
    let atoms: Vec<Atom> = (0..atoms).map(|_| Atom { point: random_point(g, dim, n), weight: uniform(g, 0.1, 2.0) }).collect();
    CausalFermionSystem::new(dim, n, DiscreteMeasure::new(atoms).unwrap()).unwrap()
}

/// Orthonormal basis of the column space, by plain Gram-Schmidt.
fn range_basis(m: &CMat) -> CMat {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let scale = m.norm_fro();
    for j in 0..m.cols() {
        let mut v = m.column(j);
        for _ in 0..2 {
            for q in &cols {
                let c: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv > 1e-8 * scale {
            cols.push(v.iter().map(|z| z / nv).collect());
        }
    }
    CMat::from_columns(&cols)
}

#[test]
fn action_matches_independent_double_loop() {
    let mut g = rng(5);
    let sys = system(&mut g, 5, 6, 2);
    let atoms = sys.measure().atoms();
    let mut s = 0.0;
    for a in atoms {
        for b in atoms {
            // compress the dense product onto range(x) and use the polynomial oracle
            let xa = a.point.to_dense();
            let basis = range_basis(&xa);
            let m = basis.adjoint().matmul(&xa).matmul(&b.point.to_dense()).matmul(&basis);
            let top = eigen_oracle(&m);
            let sq: f64 = top.iter().map(|z| z.norm_sqr()).sum();
            let sum: f64 = top.iter().map(|z| z.norm()).sum();
            s += a.weight * b.weight * (sq - sum * sum / 4.0);
        }
    }
    let got = sys.action().unwrap();
    assert!((got - s).abs() <= 1e-8 * s.abs(), "{got} vs {s}");
}

#[test]
fn weights_enter_bilinearly() {
    let mut g = rng(6);
    let sys = system(&mut g, 4, 5, 2);
    let scaled: Vec<Atom> = sys.measure().atoms().iter().map(|a| Atom { point: a.point.clone(), weight: 2.0 * a.weight }).collect();
    let sys2 = CausalFermionSystem::new(5, 2, DiscreteMeasure::new(scaled).unwrap()).unwrap();
    let (c1, c2) = (sys.constraints().unwrap(), sys2.constraints().unwrap());
    assert_eq!(c2.volume, 2.0 * c1.volume);
    assert_eq!(c2.trace, 2.0 * c1.trace);
    assert_eq!(c2.boundedness, 4.0 * c1.boundedness);
    assert_eq!(sys2.action().unwrap(), 4.0 * sys.action().unwrap());
}

#[test]
fn two_spacelike_atoms_have_zero_action() {
    let x = OperatorPoint::new(&CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]), &[1.0, -1.0], 1).unwrap();
    let y = OperatorPoint::new(&CMat::from_real_rows(&[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), &[1.0, -1.0], 1).unwrap();
    let m = DiscreteMeasure::new(vec![Atom { point: x, weight: 0.3 }, Atom { point: y, weight: 0.7 }]).unwrap();
    assert_eq!(CausalFermionSystem::new(4, 1, m).unwrap().action().unwrap(), 0.0);
}

#[test]
fn container_round_trip_is_bit_exact() {
    let mut g = rng(77);
    let sys = system(&mut g, 4, 7, 2);
    let text = write_system(&sys);
    let back = read_system(&text).unwrap();
    assert_eq!(back, sys);
    assert_eq!(write_system(&back), text);
}

#[test]
fn action_is_bit_stable_across_thread_counts() {
    let mut g = rng(3);
    let sys = system(&mut g, 9, 6, 2);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| sys.action().unwrap());
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| sys.action().unwrap());
    assert_eq!(one.to_bits(), many.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lagrangian_nonnegative_and_symmetric(seed in any::<u64>(), n in 1usize..=3, dim in 6usize..=12) {
        let mut g = rng(seed);
        let x = random_point(&mut g, dim, n);
        let y = random_point(&mut g, dim, n);
        let lxy = lagrangian(&x, &y).unwrap();
        let lyx = lagrangian(&y, &x).unwrap();
        prop_assert!(lxy >= 0.0);
        prop_assert!((lxy - lyx).abs() <= 1e-10 * lxy.max(1.0));
        let a = product_spectrum(&x, &y).unwrap();
        let b = product_spectrum(&y, &x).unwrap();
        prop_assert!(multiset_distance(&a, &b) <= 1e-10 * a.iter().map(|z| z.norm()).fold(1.0, f64::max));
    }

    #[test]
    fn lagrangian_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut g = rng(seed);
        let x = random_point(&mut g, 8, n);
        let y = random_point(&mut g, 8, n);
        let u = random_unitary(&mut g, 8);
        let (ux, uy) = (x.conjugate(&u), y.conjugate(&u));
        let l0 = lagrangian(&x, &y).unwrap();
        let l1 = lagrangian(&ux, &uy).unwrap();
        prop_assert!((l0 - l1).abs() <= 1e-10 * l0.max(1.0));
        prop_assert_eq!(causal_classify(&x, &y, CAUSAL_TOL).unwrap(), causal_classify(&ux, &uy, CAUSAL_TOL).unwrap());
    }
}
