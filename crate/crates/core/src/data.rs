//! Labeled examples and their edge vectors.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value in {-1, +1}; used both for class labels and for Rademacher signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Positive => 1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Sign::Negative),
            1 => Ok(Sign::Positive),
            other => Err(Error::InvalidArgument(format!(
                "sign must be -1 or +1, got {other}"
            ))),
        }
    }

    /// Sign of a score, with the tie at zero resolved to `Positive`.
    pub fn of_score(score: f64) -> Self {
        if score >= 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Positive => Sign::Negative,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// `m` labeled examples in `d` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<Sign>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<Sign>, feature_names: Vec<String>) -> Result<Self> {
        let (m, d) = features.dim();
        if m == 0 || d == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one example and one feature, got {m}x{d}"
            )));
        }
        if labels.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: labels.len(),
            });
        }
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: feature_names.len(),
            });
        }
        if let Some(((i, k), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value {v} at example {i}, feature {k}"
            )));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a dataset from row vectors and integer labels, naming the
    /// features `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[i8]) -> Result<Self> {
        let m = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let features = Array2::from_shape_vec((m, d), flat)
            .map_err(|e| Error::InvalidDataset(e.to_string()))?;
        let labels = labels
            .iter()
            .map(|&y| Sign::from_i8(y))
            .collect::<Result<Vec<_>>>()?;
        let names = (0..d).map(|k| format!("x{k}")).collect();
        Self::new(features, labels, names)
    }

    pub fn m(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[Sign] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn class_count(&self, class: Sign) -> usize {
        self.labels.iter().filter(|&&y| y == class).count()
    }

    /// Examples at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(features, labels, self.feature_names.clone())
    }

    /// Same examples with every label flipped.
    pub fn with_flipped_labels(&self) -> Self {
        Self {
            features: self.features.clone(),
            labels: self.labels.iter().map(|y| y.flip()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// The `m x d` matrix whose i-th row is `y_i * x_i`.
    pub fn edge_matrix(&self) -> Array2<f64> {
        let mut edges = self.features.clone();
        for (mut row, y) in edges.rows_mut().into_iter().zip(&self.labels) {
            row *= y.value();
        }
        edges
    }
}

/// `y_i * x_i`: a positive inner product with `theta` means example `i` is
/// classified correctly.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector(Array1<f64>);

impl EdgeVector {
    pub fn values(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array1<f64> {
        self.0
    }
}

pub fn edge_vectors(dataset: &Dataset) -> Vec<EdgeVector> {
    dataset
        .edge_matrix()
        .rows()
        .into_iter()
        .map(|r| EdgeVector(r.to_owned()))
        .collect()
}

/// Per-feature min-max scaling onto [0, 1], fitted on one dataset and
/// replayed on others. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaling {
    pub fn fit(dataset: &Dataset) -> Self {
        let (min, max) = dataset
            .features()
            .columns()
            .into_iter()
            .map(|c| {
                c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                })
            })
            .unzip();
        Self { min, max }
    }

    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.d() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                actual: dataset.d(),
            });
        }
        let mut features = dataset.features().clone();
        for (k, mut col) in features.columns_mut().into_iter().enumerate() {
            let span = self.max[k] - self.min[k];
            col.mapv_inplace(|v| if span > 0.0 { (v - self.min[k]) / span } else { 0.0 });
        }
        Dataset::new(
            features,
            dataset.labels().to_vec(),
            dataset.feature_names().to_vec(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_example_has_zero_edge() {
        let ds = Dataset::from_rows(&[vec![0.0, 0.0, 0.0]], &[1]).unwrap();
        assert_eq!(edge_vectors(&ds)[0].values().to_vec(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn negative_label_flips_sign() {
        let ds = Dataset::from_rows(&[vec![2.0, -1.0]], &[-1]).unwrap();
        assert_eq!(edge_vectors(&ds)[0].values().to_vec(), vec![-2.0, 1.0]);
    }

    #[test]
    fn two_examples() {
        let ds = Dataset::from_rows(&[vec![1.0, 3.0], vec![4.0, 0.0]], &[1, -1]).unwrap();
        let e: Vec<Vec<f64>> = edge_vectors(&ds).into_iter().map(|e| e.values().to_vec()).collect();
        assert_eq!(e, vec![vec![1.0, 3.0], vec![-4.0, 0.0]]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Dataset::from_rows(&[vec![1.0]], &[0]).is_err());
        assert!(Dataset::from_rows(&[vec![f64::NAN]], &[1]).is_err());
        assert!(Dataset::from_rows(&[], &[]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0], vec![1.0, 2.0]], &[1, 1]).is_err());
    }

    #[test]
    fn label_flip_negates_edges() {
        let ds = Dataset::from_rows(&[vec![1.5, -3.0], vec![0.25, 7.0]], &[1, -1]).unwrap();
        let flipped = edge_vectors(&ds.with_flipped_labels());
        for (a, b) in edge_vectors(&ds).iter().zip(&flipped) {
            assert_eq!(a.values().mapv(|v| -v), *b.values());
        }
    }

    #[test]
    fn min_max_scaling_maps_to_unit_interval() {
        let ds = Dataset::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]], &[1, -1]).unwrap();
        let s = MinMaxScaling::fit(&ds);
        let scaled = s.apply(&ds).unwrap();
        assert_eq!(scaled.row(0).to_vec(), vec![0.0, 0.0]);
        assert_eq!(scaled.row(1).to_vec(), vec![1.0, 0.0]);
    }
}
