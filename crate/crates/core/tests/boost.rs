mod common;

use approx::assert_relative_eq;
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

use radoboost::boost::{
    alpha_update, baseline_example_boost, boost, boost_observed, clamp_edge_ridge, edge, regularized_exp_rado_loss,
    weak_learner, BoostConfig, FeatureScale, Selection, WeakLearnerMode, WeightVector,
};
use radoboost::data::Dataset;
use radoboost::rados::{singleton_rados, RadoMode, RadoSet};
use radoboost::regularizers::{omega_value, Gamma, RegularizerKind, RegularizerSpec};
use radoboost::Error;

fn set(m: Array2<f64>) -> RadoSet {
    RadoSet::from_matrix(m, RadoMode::PlainRandom).unwrap()
}

fn spec(kind: RegularizerKind, omega: f64) -> RegularizerSpec {
    RegularizerSpec::new(kind, omega).unwrap()
}

fn unreg(t: usize) -> BoostConfig {
    BoostConfig::new(t, RegularizerSpec::unregularized())
}

#[test]
fn edge_examples() {
    let s = set(array![[2.0], [-1.0], [1.0]]);
    let scale = FeatureScale::from_rados(&s);
    assert_relative_eq!(edge(&s, &WeightVector::uniform(3), 0, &scale).unwrap(), 1.0 / 3.0, epsilon = 1e-15);

    let flat = set(array![[0.7], [0.7]]);
    let w = WeightVector::new(vec![0.9, 0.1]).unwrap();
    assert_eq!(edge(&flat, &w, 0, &FeatureScale::from_rados(&flat)).unwrap(), 1.0);

    let w = WeightVector::new(vec![0.0, 1.0, 0.0]).unwrap();
    let s = set(array![[2.0], [-2.0], [1.0]]);
    assert_eq!(edge(&s, &w, 0, &FeatureScale::from_rados(&s)).unwrap(), -1.0);
}

#[test]
fn step_examples() {
    assert_eq!(alpha_update(0.0, 1.0).unwrap(), 0.0);
    let r = (2f64.exp() - 1.0) / (2f64.exp() + 1.0);
    assert_relative_eq!(alpha_update(r, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(alpha_update(1.0 / 3.0, 2.0).unwrap(), 0.25 * 2f64.ln(), epsilon = 1e-12);
    assert!(matches!(alpha_update(1.0, 1.0), Err(Error::EdgeAtBoundary(_))));
}

#[test]
fn clamp_examples() {
    assert_eq!(clamp_edge_ridge(0.5, 0.98), 0.5);
    assert_eq!(clamp_edge_ridge(0.995, 0.98), 0.98);
    assert_eq!(clamp_edge_ridge(-0.999, 0.98), -0.98);
}

#[test]
fn weak_learner_choices() {
    // Single live feature wins under both modes.
    let s = set(array![[1.0, 0.0], [-0.5, 0.0]]);
    let w = WeightVector::uniform(2);
    for mode in [WeakLearnerMode::FirstAdmissible, WeakLearnerMode::PreferenceOrder] {
        let mut c = unreg(1);
        c.wl_mode = mode;
        assert_eq!(weak_learner(&s, &w, &c, &array![0.0, 0.0]).unwrap().0, 0);
    }
    // Without regularization the preference order is largest |r|.
    let s = set(array![[1.0, -1.0], [0.2, 1.0], [0.5, 0.6]]);
    let w = WeightVector::uniform(3);
    let c = unreg(1);
    let (k, r) = weak_learner(&s, &w, &c, &array![0.0, 0.0]).unwrap();
    let scale = FeatureScale::from_rados(&s);
    let edges: Vec<f64> = (0..2).map(|k| edge(&s, &w, k, &scale).unwrap()).collect();
    let best = if edges[0].abs() >= edges[1].abs() { 0 } else { 1 };
    assert_eq!(k, best);
    assert_eq!(r, edges[best]);
}

#[test]
fn loss_examples() {
    let s = set(array![[1.0, 0.0]]);
    let zero = RegularizerSpec::unregularized();
    assert_eq!(regularized_exp_rado_loss(&s, &array![0.0, 0.0], &zero).unwrap().ln(), 0.0);
    assert_relative_eq!(
        regularized_exp_rado_loss(&s, &array![1.0, 0.0], &zero).unwrap().ln(),
        -1.0,
        epsilon = 1e-15
    );
    let theta = array![1.0, -2.0];
    let sp = spec(RegularizerKind::Lasso, 0.3);
    let with = regularized_exp_rado_loss(&s, &theta, &sp).unwrap().ln();
    let without = regularized_exp_rado_loss(&s, &theta, &zero).unwrap().ln();
    assert_relative_eq!(with - without, 0.3 * 3.0, epsilon = 1e-12);
}

#[test]
fn separable_column_is_degenerate() {
    let s = set(array![[2.0], [2.0]]);
    assert!(matches!(boost(&s, &unreg(1)), Err(Error::DegenerateEdge { .. })));
}

#[test]
fn one_step_hand_example() {
    let s = set(array![[2.0], [-1.0], [1.0]]);
    let model = boost(&s, &unreg(1)).unwrap();
    let alpha = 0.25 * 2f64.ln();
    assert_relative_eq!(model.theta()[0], alpha, epsilon = 1e-12);
    let z = ((-2.0 * alpha).exp() + alpha.exp() + (-alpha).exp()) / 3.0;
    let rec = &model.history()[0];
    assert_relative_eq!(rec.z_norm, z, epsilon = 1e-12);
    assert_relative_eq!(
        z,
        (2f64.powf(-0.5) + 2f64.powf(0.25) + 2f64.powf(-0.25)) / 3.0,
        epsilon = 1e-12
    );
    assert_relative_eq!(rec.edge_r, 1.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn example_boosting_is_boosting_on_singletons() {
    let ds = Dataset::from_rows(
        &[vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.3, -2.0], vec![2.0, 1.0]],
        &[1, -1, -1, 1],
    )
    .unwrap();
    let config = BoostConfig::new(20, spec(RegularizerKind::Ridge(Gamma::Identity), 0.01));
    let a = baseline_example_boost(&ds, &config).unwrap();
    let b = boost(&singleton_rados(&ds).unwrap(), &config).unwrap();
    assert_eq!(a.theta(), b.theta());
    assert_eq!(a.history(), b.history());
}

#[test]
fn separable_pair_is_learned() {
    // Edges (2, -1) and (-1, 2): separable, yet no single feature separates.
    let ds = Dataset::from_rows(&[vec![2.0, -1.0], vec![1.0, -2.0]], &[1, -1]).unwrap();
    let model = baseline_example_boost(&ds, &BoostConfig::new(50, spec(RegularizerKind::Lasso, 0.0))).unwrap();
    assert_eq!(model.error_percent(&ds).unwrap(), 0.0);
}

#[test]
fn best_iterate_minimizes_training_loss() {
    let s = set(array![[1.0, -0.4], [0.6, 0.9], [-0.3, 0.7], [0.8, -0.2]]);
    let sp = spec(RegularizerKind::Lasso, 0.4);
    let mut config = BoostConfig::new(30, sp.clone());
    config.select = Selection::BestOnTraining;
    let best = boost(&s, &config).unwrap();
    let chosen = regularized_exp_rado_loss(&s, best.theta(), &sp).unwrap().ln();
    // Replay every iterate.
    let mut theta = Array1::<f64>::zeros(2);
    for rec in best.history() {
        theta[rec.feature] += rec.alpha;
        let l = regularized_exp_rado_loss(&s, &theta, &sp).unwrap().ln();
        assert!(chosen <= l + 1e-12, "iterate {} has loss {l} < chosen {chosen}", rec.t);
    }
}

fn problem() -> impl Strategy<Value = (RadoSet, RegularizerKind, f64)> {
    let kinds = prop_oneof![
        Just(RegularizerKind::Lasso),
        Just(RegularizerKind::Ridge(Gamma::Identity)),
        Just(RegularizerKind::LInf),
        Just(RegularizerKind::Slope { q: 0.2 }),
    ];
    (common::rado_set(3..=30, 1..=5, 3.0), kinds, 0.0f64..0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_stay_on_the_simplex((s, kind, omega) in problem()) {
        let config = BoostConfig::new(40, spec(kind, omega));
        let mut worst = 0.0f64;
        let result = boost_observed(&s, &config, |_, w| {
            assert!(w.iter().all(|&v| v >= 0.0));
            worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
        });
        prop_assume!(result.is_ok());
        prop_assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn normalizers_telescope((s, kind, omega) in problem()) {
        let sp = spec(kind, omega);
        let Ok(model) = boost(&s, &BoostConfig::new(60, sp.clone())) else { return Ok(()) };
        let loss = regularized_exp_rado_loss(&s, model.theta(), &sp).unwrap().ln();
        prop_assert!((model.ln_z_product() - loss).exp_m1().abs() < 1e-8);
    }

    #[test]
    fn ridge_normalizer_respects_its_bound(s in common::rado_set(3..=30, 1..=5, 3.0), omega in 0.0f64..0.1) {
        let Ok(model) = boost(&s, &BoostConfig::new(60, spec(RegularizerKind::Ridge(Gamma::Identity), omega))) else {
            return Ok(());
        };
        for rec in model.history() {
            prop_assert!(rec.z_norm <= rec.delta.exp() * (1.0 - rec.edge_r * rec.edge_r).sqrt() + 1e-12);
        }
    }

    #[test]
    fn training_is_deterministic((s, kind, omega) in problem()) {
        let config = BoostConfig::new(25, spec(kind, omega));
        let a = boost(&s, &config);
        let b = boost(&s, &config);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.theta(), b.theta());
                prop_assert_eq!(a.history(), b.history());
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn minkowski_shift_matches_the_penalty((s, kind, omega) in problem(), t in proptest::collection::vec(-2.0f64..2.0, 5)) {
        let theta = Array1::from_iter(t.into_iter().take(s.d()));
        prop_assume!(theta.dot(&theta) > 1e-6);
        let sp = spec(kind, omega);
        let big = omega_value(&sp, &theta).unwrap();
        let shifted = radoboost::rados::regularize_rados(&s, &theta, omega, big).unwrap();
        let direct = regularized_exp_rado_loss(&s, &theta, &sp).unwrap().ln();
        let via = regularized_exp_rado_loss(&shifted, &theta, &RegularizerSpec::unregularized()).unwrap().ln();
        prop_assert!((direct - via).abs() <= 1e-9 * (1.0 + direct.abs()));
    }
}

#[test]
fn unregularized_decay_on_positive_rados() {
    let m = Array2::from_shape_fn((30, 3), |(j, k)| 0.5 + 0.5 * (((j * 7 + k * 3) % 11) as f64 / 10.0));
    let s = set(m);
    for t in [10usize, 40] {
        let model = boost(&s, &unreg(t)).unwrap();
        let g = model.history().iter().map(|h| h.edge_r.abs()).fold(1.0, f64::min);
        let ln_loss = regularized_exp_rado_loss(&s, model.theta(), model.regularizer()).unwrap().ln();
        assert!(ln_loss <= -g * g * t as f64 / 2.0);
    }
}
