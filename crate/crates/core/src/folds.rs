//! Cross-validation partitions.

use rand::seq::SliceRandom;

use crate::data::{Dataset, Sign};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Indices of one train/test split, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `k` folds whose test parts partition `0..m`.
///
/// Examples are shuffled with a seeded stream and dealt round-robin. When
/// `stratified`, each class is shuffled and dealt separately, continuing the
/// rotation where the previous class stopped, so every test fold holds
/// within one example of its share of each class.
pub fn kfold(dataset: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<Vec<Fold>> {
    let m = dataset.m();
    if k < 2 || k > m {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= k <= m = {m}, got k = {k}"
        )));
    }
    let groups: Vec<Vec<usize>> = if stratified {
        [Sign::Negative, Sign::Positive]
            .iter()
            .map(|&c| {
                (0..m)
                    .filter(|&i| dataset.labels()[i] == c)
                    .collect::<Vec<_>>()
            })
            .collect()
    } else {
        vec![(0..m).collect()]
    };
    if stratified {
        for (c, g) in [Sign::Negative, Sign::Positive].iter().zip(&groups) {
            if g.len() < k {
                return Err(Error::InvalidArgument(format!(
                    "class {c} has {} examples, fewer than k = {k}",
                    g.len()
                )));
            }
        }
    }

    let mut tests = vec![Vec::new(); k];
    let mut offset = 0usize;
    for (g, mut members) in groups.into_iter().enumerate() {
        let mut rng = rng::stream(seed, Domain::Folds, g as u64);
        members.shuffle(&mut rng);
        let count = members.len();
        for (pos, i) in members.into_iter().enumerate() {
            tests[(offset + pos) % k].push(i);
        }
        offset = (offset + count) % k;
    }

    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; m];
            test.iter().for_each(|&i| in_test[i] = true);
            let train = (0..m).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect())
}
