use approx::assert_relative_eq;
use proptest::prelude::*;

use radoboost::losses::{
    brute_force_game, check_pair, equivalence_gap_constancy, example_loss, loss_identity_residual, rado_loss,
    reference_pair, subset_sums, GameKind, GamePair,
};
use radoboost::Error;

const LN2: f64 = std::f64::consts::LN_2;

#[test]
fn example_loss_values() {
    assert_relative_eq!(example_loss(GameKind::LogExp, &[0.0, 0.0], 1.0), 2.0 * LN2, epsilon = 1e-12);
    assert_eq!(example_loss(GameKind::Relu, &[1.0, -2.0, 3.0], 1.0), 2.0);
    assert_eq!(example_loss(GameKind::Unhinged, &[1.0, -2.0, 3.0], 1.0), -2.0);
}

#[test]
fn rado_loss_values() {
    let sums = subset_sums(&[0.0, 0.0]).unwrap();
    assert_relative_eq!(rado_loss(GameKind::LogExp, &sums, 1.0).unwrap().ln(), 4f64.ln(), epsilon = 1e-12);
    let sums = subset_sums(&[1.0, -2.0, 3.0]).unwrap();
    let mut sorted = sums.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, vec![-2.0, -1.0, 0.0, 1.0, 1.0, 2.0, 3.0, 4.0]);
    assert_eq!(rado_loss(GameKind::Unhinged, &sums, 1.0).unwrap().plain(), Some(-1.0));
    assert_eq!(rado_loss(GameKind::Relu, &sums, 1.0).unwrap().plain(), Some(2.0));
}

#[test]
fn log_game_optima_at_zero() {
    let pair = GamePair::new(GameKind::LogExp, 1.0, 1.0).unwrap();
    let one = brute_force_game(&pair, &[0.0]).unwrap();
    assert_relative_eq!(one.gap(), 0.0, epsilon = 1e-12);
    assert!(one.assignment_residual() < 1e-12);

    let two = brute_force_game(&pair, &[0.0, 0.0]).unwrap();
    assert_relative_eq!(two.gap(), -1.0, epsilon = 1e-12);
}

#[test]
fn log_pair_rejects_unequal_temperatures() {
    assert!(matches!(GamePair::new(GameKind::LogExp, 1.0, 2.0), Err(Error::InvalidCoupling { .. })));
}

#[test]
fn square_pair_requires_its_coupling() {
    let bad = GamePair::new(GameKind::SquareMeanVar, 1.0, 1.0).unwrap();
    assert!(equivalence_gap_constancy(&bad, 3, 3, 0).is_err());
    let good = GamePair::coupled(GameKind::SquareMeanVar, 4.0, 3).unwrap();
    assert_relative_eq!(good.mu_e, 1.0);
    assert!(equivalence_gap_constancy(&good, 10, 3, 0).unwrap().stdev_gap < 1e-8);
}

#[test]
fn single_trial_has_zero_spread() {
    for kind in GameKind::ALL {
        let pair = reference_pair(kind, 4).unwrap();
        assert_eq!(equivalence_gap_constancy(&pair, 1, 4, 9).unwrap().stdev_gap, 0.0);
    }
}

#[test]
fn relu_gap_is_exactly_zero() {
    for m in 1..=8 {
        let s = equivalence_gap_constancy(&reference_pair(GameKind::Relu, m).unwrap(), 100, m, 1).unwrap();
        assert!(s.stdev_gap < 1e-12 && s.mean_gap.abs() < 1e-12, "m={m}: {s:?}");
    }
}

#[test]
fn log_gap_is_constant() {
    for m in 1..=8 {
        let s = equivalence_gap_constancy(&reference_pair(GameKind::LogExp, m).unwrap(), 100, m, 2).unwrap();
        assert!(s.stdev_gap < 1e-8, "m={m}: {s:?}");
    }
}

#[test]
fn every_reference_pair_checks_out() {
    for kind in GameKind::ALL {
        let c = check_pair(kind, 6, 40, 3).unwrap();
        assert!(c.passed, "{kind:?}: {c:?}");
    }
}

#[test]
fn identity_examples() {
    assert_eq!(loss_identity_residual(GameKind::LogExp, &[0.0, 0.0], 1.0).unwrap(), 0.0);
    assert_eq!(loss_identity_residual(GameKind::Unhinged, &[1.0, -2.0, 3.0], 1.0).unwrap(), 0.0);
}

#[test]
fn games_are_capped() {
    let z = vec![0.0; 13];
    assert!(matches!(loss_identity_residual(GameKind::LogExp, &z, 1.0), Err(Error::EnumerationCap { .. })));
}

proptest! {
    #[test]
    fn square_identity_at_one_coordinate(z in -50.0f64..50.0) {
        let r = loss_identity_residual(GameKind::SquareMeanVar, &[z], 1.0).unwrap();
        prop_assert!(r <= 1e-12 * (1.0 + z * z));
    }

    #[test]
    fn log_subset_sum_equals_product(z in proptest::collection::vec(-3.0f64..3.0, 1..=10), mu in 0.5f64..3.0) {
        let product: f64 = z.iter().map(|zi| 1.0 + (-zi / mu).exp()).product();
        let r = loss_identity_residual(GameKind::LogExp, &z, mu).unwrap();
        prop_assert!(r / product < 1e-10);
    }

    #[test]
    fn relu_and_unhinged_identities(z in proptest::collection::vec(-10.0f64..10.0, 1..=10), mu in 0.1f64..5.0) {
        prop_assert!(loss_identity_residual(GameKind::Relu, &z, mu).unwrap() < 1e-12);
        prop_assert!(loss_identity_residual(GameKind::Unhinged, &z, mu).unwrap() < 1e-10);
    }

    #[test]
    fn rado_log_loss_is_a_monotone_transform_of_example_loss(
        z in proptest::collection::vec(-3.0f64..3.0, 1..=8),
        shift in 0.01f64..1.0,
        k in 0usize..8,
    ) {
        // Raising one coordinate lowers both losses together.
        let k = k % z.len();
        let mut w = z.clone();
        w[k] += shift;
        let le = |v: &[f64]| example_loss(GameKind::LogExp, v, 1.0);
        let lr = |v: &[f64]| rado_loss(GameKind::LogExp, &subset_sums(v).unwrap(), 1.0).unwrap().ln();
        prop_assert!(le(&w) < le(&z));
        prop_assert!(lr(&w) < lr(&z));
        // ln of the rado sum equals the example log loss exactly.
        prop_assert!((lr(&z) - le(&z)).abs() < 1e-10);
    }
}
