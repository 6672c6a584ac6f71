//! Learned linear classifiers and their training history.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::boost::BoostConfig;
use crate::data::{Dataset, MinMaxScaling, Sign};
use crate::error::{Error, Result};
use crate::regularizers::RegularizerSpec;

/// One boosting iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub t: usize,
    pub feature: usize,
    pub alpha: f64,
    /// Edge used for the step (post-clamp for ridge), in [-1, 1].
    pub edge_r: f64,
    pub delta: f64,
    /// Weight normalizer `Z_t > 0`.
    pub z_norm: f64,
    /// `ln Z_t`, kept separately since long products leave `f64` range.
    pub ln_z: f64,
    /// Weights raised to the underflow floor during this iteration.
    pub floored_weights: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    theta: Array1<f64>,
    feature_names: Vec<String>,
    history: Vec<IterationRecord>,
    config: BoostConfig,
    selected_iteration: usize,
    scaling: Option<MinMaxScaling>,
}

impl LinearModel {
    pub fn new(
        theta: Array1<f64>,
        feature_names: Vec<String>,
        history: Vec<IterationRecord>,
        config: BoostConfig,
        selected_iteration: usize,
    ) -> Result<Self> {
        if feature_names.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                actual: feature_names.len(),
            });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("model weights must be finite".into()));
        }
        if selected_iteration > history.len() {
            return Err(Error::InvalidArgument(format!(
                "selected iteration {selected_iteration} exceeds the {} recorded",
                history.len()
            )));
        }
        Ok(Self {
            theta,
            feature_names,
            history,
            config,
            selected_iteration,
            scaling: None,
        })
    }

    pub fn with_scaling(mut self, scaling: Option<MinMaxScaling>) -> Result<Self> {
        if let Some(s) = &scaling {
            if s.min.len() != self.d() {
                return Err(Error::DimensionMismatch {
                    expected: self.d(),
                    actual: s.min.len(),
                });
            }
        }
        self.scaling = scaling;
        Ok(self)
    }

    pub fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    pub fn d(&self) -> usize {
        self.theta.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn iterations_run(&self) -> usize {
        self.history.len()
    }

    pub fn config(&self) -> &BoostConfig {
        &self.config
    }

    pub fn regularizer(&self) -> &RegularizerSpec {
        &self.config.regularizer
    }

    /// Iteration whose `theta` was kept.
    pub fn selected_iteration(&self) -> usize {
        self.selected_iteration
    }

    pub fn scaling(&self) -> Option<&MinMaxScaling> {
        self.scaling.as_ref()
    }

    /// `sum_t ln Z_t`.
    pub fn ln_z_product(&self) -> f64 {
        self.history.iter().map(|r| r.ln_z).sum()
    }

    /// `100 * ||theta||_0 / d`.
    pub fn support_percent(&self) -> f64 {
        support_percent(&self.theta)
    }

    /// Maps raw examples into the space `theta` lives in.
    pub fn prepare(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: dataset.d(),
            });
        }
        match &self.scaling {
            Some(s) => s.apply(dataset),
            None => Ok(dataset.clone()),
        }
    }

    /// Percentage of misclassified examples after [`LinearModel::prepare`].
    pub fn error_percent(&self, dataset: &Dataset) -> Result<f64> {
        let prepared = self.prepare(dataset)?;
        let mut wrong = 0usize;
        for (i, &y) in prepared.labels().iter().enumerate() {
            if predict(self, prepared.row(i))?.1 != y {
                wrong += 1;
            }
        }
        Ok(100.0 * wrong as f64 / prepared.m() as f64)
    }
}

pub fn support_percent(theta: &Array1<f64>) -> f64 {
    let nonzero = theta.iter().filter(|&&v| v != 0.0).count();
    100.0 * nonzero as f64 / theta.len() as f64
}

/// Score `theta . x` and its sign (ties at 0 go to `+1`).
pub fn predict(model: &LinearModel, x: ArrayView1<'_, f64>) -> Result<(f64, Sign)> {
    if x.len() != model.d() {
        return Err(Error::DimensionMismatch {
            expected: model.d(),
            actual: x.len(),
        });
    }
    let score = model.theta.dot(&x);
    Ok((score, Sign::of_score(score)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizers::RegularizerSpec;
    use ndarray::array;

    fn model(theta: Array1<f64>) -> LinearModel {
        let names = (0..theta.len()).map(|k| format!("x{k}")).collect();
        let config = BoostConfig::new(1, RegularizerSpec::unregularized());
        LinearModel::new(theta, names, Vec::new(), config, 0).unwrap()
    }

    #[test]
    fn predict_examples() {
        let zero = model(array![0.0, 0.0]);
        assert_eq!(predict(&zero, array![5.0, -7.0].view()).unwrap(), (0.0, Sign::Positive));
        let m = model(array![1.0, -1.0]);
        assert_eq!(predict(&m, array![3.0, 1.0].view()).unwrap(), (2.0, Sign::Positive));
        assert_eq!(predict(&m, array![1.0, 3.0].view()).unwrap(), (-2.0, Sign::Negative));
        assert!(predict(&m, array![1.0].view()).is_err());
    }

    #[test]
    fn support_counts_nonzeros() {
        assert_eq!(model(array![0.0, 0.0]).support_percent(), 0.0);
        assert_eq!(model(array![0.0, 2.0, 0.0, -1.0]).support_percent(), 50.0);
    }

    #[test]
    fn rejects_non_finite_weights() {
        let config = BoostConfig::new(1, RegularizerSpec::unregularized());
        assert!(LinearModel::new(array![f64::NAN], vec!["a".into()], Vec::new(), config, 0).is_err());
    }
}
