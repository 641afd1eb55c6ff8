mod common;

use common::rng;
use rand::Rng;
use spectral_lab::generators::{complex_gaussian_matrix, random_with_condition};
use spectral_lab::matching::transport_cost;
use spectral_lab::perturbation::*;
use spectral_lab::spectral::{self, operator_norm};
use spectral_lab::{ComplexMatrix, C64};

fn scaled(g: ComplexMatrix, norm: f64) -> ComplexMatrix {
    let current = operator_norm(&g).unwrap();
    g.scale_real(norm / current)
}

#[test]
fn bauer_fike_randomized() {
    let mut r = rng(11);
    for trial in 0..120u64 {
        let n = r.random_range(2..=32);
        let values: Vec<C64> = (0..n).map(|_| C64::new(r.random_range(-4.0..4.0), r.random_range(-4.0..4.0))).collect();
        let v = random_with_condition(n, r.random_range(1.0..10.0), 1000 + trial).unwrap();
        let spec = JordanSpec::diagonal(&values, v).unwrap();
        let limit = spec.delta() / spec.cond();
        let pert = scaled(complex_gaussian_matrix(n, 2000 + trial), r.random_range(0.01..0.99) * limit);
        let rep = bf_check(&spec, &pert).unwrap();
        assert!(rep.premise_ok);
        assert!(rep.margin >= -1e-8 * rep.rhs.max(1.0), "trial {trial}: {rep:?}");
    }
}

#[test]
fn separated_jordan_blocks() {
    let mut r = rng(12);
    for trial in 0..60u64 {
        let blocks = vec![(C64::new(0.0, 0.0), 3), (C64::new(10.0, 1.0), 2), (C64::new(-8.0, 0.0), 1)];
        let v = random_with_condition(6, r.random_range(1.0..5.0), 3000 + trial).unwrap();
        let spec = JordanSpec::new(blocks, v).unwrap();
        let m = spec.m() as i32;
        // the per-eigenvalue premise k(V)||N|| <= 2^{1-m} is what makes the disks count correctly
        let limit = (spec.delta().powi(m) / (2f64.powi(m - 1) * spec.cond())).min(2f64.powi(1 - m) / spec.cond());
        let pert = scaled(complex_gaussian_matrix(6, 4000 + trial), r.random_range(1e-6..0.99) * limit);
        let rep = bf2_check(&spec, &pert).unwrap();
        assert!(rep.premise_ok);
        assert!(rep.margin >= -1e-8 * rep.rhs.max(1.0), "trial {trial}: {rep:?}");
        let gen = bf_gen_check(&spec, &pert).unwrap();
        if gen.premise_ok {
            assert!(gen.all_hold, "trial {trial}");
        }
    }
}

#[test]
fn gap_premise_alone_is_not_enough_for_large_gaps() {
    // J_2(0) + [10]: delta = 5, m = 2, so ||N|| = 10 meets ||N|| < delta^2 / 2
    let blocks = vec![(C64::new(0.0, 0.0), 2), (C64::new(10.0, 0.0), 1)];
    let spec = JordanSpec::new(blocks, ComplexMatrix::identity(3)).unwrap();
    let mut pert = ComplexMatrix::zeros(3);
    pert.set(2, 2, C64::new(-10.0, 0.0));
    let rep = bf2_check(&spec, &pert).unwrap();
    assert!(rep.premise_ok);
    assert_eq!(rep.lhs, 10.0);
    assert!((rep.rhs - 20f64.sqrt()).abs() < 1e-12);
    assert!(rep.margin < 0.0);
    assert!(!bf_gen_check(&spec, &pert).unwrap().premise_ok);
}

#[test]
fn pert_delta_guarantee() {
    let v = random_with_condition(5, 3.0, 77).unwrap();
    let spec = JordanSpec::new(vec![(C64::new(1.0, 0.0), 2), (C64::new(-1.0, 0.5), 3)], v).unwrap();
    for eps in [0.5, 0.05] {
        let check = verify_pert_delta(&spec, eps, 100, 5, 1e-9).unwrap();
        assert!(check.all_within, "{check:?}");
    }
}

#[test]
fn hoffman_wielandt_for_normal_pairs() {
    let mut r = rng(13);
    for trial in 0..60u64 {
        let n = [8, 16, 32][trial as usize % 3];
        let draw = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<C64> {
            (0..n).map(|_| C64::new(r.random::<f64>(), r.random::<f64>())).collect()
        };
        let a = random_normal(&draw(&mut r), 5000 + trial).unwrap();
        let b = random_normal(&draw(&mut r), 6000 + trial).unwrap();
        let (lhs, rhs) = hoffman_wielandt_sides(&a, &b).unwrap();
        assert!(lhs <= rhs + 1e-8);
        // the unscaled inequality already holds for normal pairs
        let l = transport_cost(&spectral::eigenvalues(&a).unwrap(), &spectral::eigenvalues(&b).unwrap(), 2.0).unwrap();
        assert!(l <= (&a - &b).frobenius_norm() + 1e-8);
    }
}

#[test]
fn growing_schatten_condition() {
    let n = 64;
    let values: Vec<C64> = (0..n).map(|k| C64::new((k as f64 + 0.5) / n as f64, 0.0)).collect();
    let x = random_normal(&values, 1).unwrap();
    let g = complex_gaussian_matrix(n, 2);
    let y = g.scale_real((n as f64).powf(0.4) / spectral::schatten_norm(&g, 4.0).unwrap());
    let rep = normal_pert_check(&x, &y, NormalCondition::GrowingSchatten(4.0), 0.1).unwrap();
    let direct = (spectral::schatten_norm(&y, 4.0).unwrap() / (0.1 * (n as f64).powf(-0.5))).powi(4);
    assert!((rep.bound - direct).abs() <= 1e-9 * direct);
    assert!(rep.bound_ok);
}

#[test]
fn small_operator_condition() {
    let n = 32;
    let values: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, k as f64)).collect();
    let x = random_normal(&values, 3).unwrap();
    let y = scaled(complex_gaussian_matrix(n, 4), 1e-3 / n as f64);
    let rep = normal_pert_check(&x, &y, NormalCondition::SmallOperator, 0.01).unwrap();
    assert!(rep.bound_ok && rep.k_n == 0, "{rep:?}");
}
