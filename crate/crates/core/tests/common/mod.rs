#![allow(dead_code)]

use ndarray::Array2;
use proptest::prelude::*;
use radoboost::data::Dataset;
use radoboost::rados::{RadoMode, RadoSet};

/// Datasets with both classes present, `m` in `1..=max_m`, `d` in `1..=max_d`.
pub fn dataset(max_m: usize, max_d: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_m, 1..=max_d).prop_flat_map(|(m, d)| {
        (
            proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, d), m),
            proptest::collection::vec(proptest::bool::ANY, m),
        )
            .prop_map(|(rows, signs)| {
                let labels: Vec<i8> = signs.iter().map(|&s| if s { 1 } else { -1 }).collect();
                Dataset::from_rows(&rows, &labels).expect("well-formed rows")
            })
    })
}

/// Rado sets of shape `n x d` with entries in `[-scale, scale]`.
pub fn rado_set(n: std::ops::RangeInclusive<usize>, d: std::ops::RangeInclusive<usize>, scale: f64) -> impl Strategy<Value = RadoSet> {
    (n, d).prop_flat_map(move |(n, d)| {
        proptest::collection::vec(-scale..scale, n * d).prop_map(move |v| {
            RadoSet::from_matrix(Array2::from_shape_vec((n, d), v).unwrap(), RadoMode::PlainRandom).unwrap()
        })
    })
}
