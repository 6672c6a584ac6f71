mod common;

use approx::assert_relative_eq;
use ndarray::Array1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radoboost::data::Dataset;
use radoboost::privacy::{
    dp_protect, edge_diameter_bound, epsilon_a, exact_edge_diameter, laplace_from_uniform, laplace_noise,
    laplace_sample, noisy_loss_bound, seed_commitment, DpParams, DualPair,
};
use radoboost::rados::{generate, sample_plain, Generation, RadoMode};

#[test]
fn median_draw_is_zero() {
    assert_eq!(laplace_from_uniform(0.0, 3.0), 0.0);
}

#[test]
fn laplace_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws: Vec<f64> = (0..100_000).map(|_| laplace_sample(1.0, &mut rng)).collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.02, "mean {mean}");
    assert!((var - 2.0).abs() < 0.1, "variance {var}");
}

#[test]
fn diameter_examples() {
    let zero = Dataset::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1, -1]).unwrap();
    assert_eq!(edge_diameter_bound(&zero), 0.0);
    assert!(DpParams::new(1.0, 0.0, 0).is_err());
    let two = Dataset::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]], &[1, -1]).unwrap();
    assert_eq!(edge_diameter_bound(&two), 2.0);
    assert_eq!(exact_edge_diameter(&two).unwrap(), 2.0);
}

#[test]
fn noise_scale_and_determinism() {
    let p = DpParams::new(0.1, 10.0, 5).unwrap();
    assert_relative_eq!(p.scale(100), 1e4, epsilon = 1e-9);
    assert_eq!(laplace_noise(20, 3, &p), laplace_noise(20, 3, &p));
    assert_ne!(laplace_noise(20, 3, &p), laplace_noise(20, 3, &DpParams::new(0.1, 10.0, 6).unwrap()));
}

#[test]
fn huge_budget_barely_perturbs() {
    let ds = Dataset::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0], vec![2.0, 2.0]], &[1, -1, 1]).unwrap();
    let rados = sample_plain(&ds, 50, 1).unwrap();
    let out = dp_protect(&rados, &DpParams::new(1e12, 4.0, 9).unwrap()).unwrap();
    let max = (out.rados() - rados.rados()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max < 1e-6, "{max}");
}

#[test]
fn protection_records_provenance_without_the_seed() {
    let ds = Dataset::from_rows(&[vec![1.0], vec![2.0]], &[1, -1]).unwrap();
    let rados = generate(&ds, Generation::Plain, 5, 3).unwrap();
    let out = dp_protect(&rados, &DpParams::new(2.0, 3.0, 77).unwrap()).unwrap();
    let p = out.provenance();
    assert_eq!(p.mode, RadoMode::Protected);
    assert_eq!(p.seed, None);
    assert_eq!(p.epsilon, Some(2.0));
    assert_eq!(p.seed_commitment.as_deref(), Some(seed_commitment(77).as_str()));
    assert_eq!(seed_commitment(77).len(), 64);
    assert_ne!(seed_commitment(77), seed_commitment(78));
}

#[test]
fn budget_examples() {
    assert_relative_eq!(epsilon_a(1.0, 100, 1000).unwrap(), 1.00501e-3, epsilon = 1e-6);
    assert_eq!(epsilon_a(0.7, 13, 1).unwrap(), 0.7);
    assert!(epsilon_a(1e-12, 10, 100).unwrap() < 1e-13);
    assert!(epsilon_a(0.0, 10, 100).is_err());
}

proptest! {
    #[test]
    fn bound_dominates_exact_diameter(ds in common::dataset(12, 4)) {
        prop_assert!(edge_diameter_bound(&ds) >= exact_edge_diameter(&ds).unwrap() - 1e-12);
    }

    #[test]
    fn reporting_budget_is_smaller(eps in 0.01f64..20.0, n in 1usize..500, m in 2usize..5000) {
        let ea = epsilon_a(eps, n, m).unwrap();
        prop_assert!(ea > 0.0 && ea < eps);
    }

    #[test]
    fn noisy_loss_stays_below_its_bound(ds in common::dataset(8, 3), seed in any::<u64>(), eps in 0.5f64..5.0) {
        let rados = sample_plain(&ds, 16, seed).unwrap();
        let noise = laplace_noise(rados.n(), rados.d(), &DpParams::new(eps, 2.0, seed).unwrap());
        let theta = Array1::from_shape_fn(ds.d(), |k| 0.3 - 0.2 * k as f64);
        for pair in [DualPair::L1Linf, DualPair::L2L2] {
            let (lhs, rhs) = noisy_loss_bound(&ds, &rados, &noise, &theta, pair).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
