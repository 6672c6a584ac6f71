//! Coordinate boosting of the regularized exponential rado loss.
//!
//! Each iteration picks one feature through the weak learner, takes the
//! closed-form step `alpha = ln((1 + r) / (1 - r)) / (2 pi*_k)` on it, and
//! folds the change of `omega * Omega(theta)` into the weight normalizer, so
//! that `prod_t Z_t` equals the regularized loss of the current `theta`.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::LossValue;
use crate::math::log_sum_exp;
use crate::model::{IterationRecord, LinearModel};
use crate::rados::{singleton_rados, RadoSet};
use crate::regularizers::{Regularizer, RegularizerSpec};

pub const DEFAULT_CLAMP_GAMMA: f64 = 0.98;

/// Weights below this are raised to it and renormalized.
pub const WEIGHT_FLOOR: f64 = 1e-300;

/// Work (`n * d`) above which the feature scan runs on the thread pool.
const PARALLEL_SCAN_WORK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakLearnerMode {
    /// Largest `|r|`.
    FirstAdmissible,
    /// Largest `|r_k| - delta_k`, where `delta_k` is the regularization cost
    /// of the step that feature would take.
    PreferenceOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Last,
    /// The iterate with the smallest regularized loss on the training rados.
    #[serde(alias = "best")]
    BestOnTraining,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub t: usize,
    pub regularizer: RegularizerSpec,
    /// Edge clamp for ridge, in (0, 1].
    pub clamp_gamma: f64,
    pub wl_mode: WeakLearnerMode,
    pub select: Selection,
    /// Recorded for provenance; boosting itself is deterministic.
    pub seed: u64,
}

impl BoostConfig {
    pub fn new(t: usize, regularizer: RegularizerSpec) -> Self {
        Self {
            t,
            regularizer,
            clamp_gamma: DEFAULT_CLAMP_GAMMA,
            wl_mode: WeakLearnerMode::PreferenceOrder,
            select: Selection::Last,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(Error::InvalidArgument("T must be at least 1".into()));
        }
        if !(self.clamp_gamma > 0.0 && self.clamp_gamma <= 1.0) {
            return Err(Error::OutOfRange {
                name: "clamp_gamma",
                value: self.clamp_gamma,
                range: "(0, 1]",
            });
        }
        RegularizerSpec::new(self.regularizer.kind.clone(), self.regularizer.omega).map(|_| ())
    }

    fn clamps(&self) -> bool {
        self.regularizer.kind.is_ridge()
    }
}

/// Rado weights on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(w))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `pi*_k = max_j |pi_jk|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScale {
    pi_star: Vec<f64>,
}

impl FeatureScale {
    pub fn from_rados(rados: &RadoSet) -> Self {
        Self {
            pi_star: rados.column_abs_max(),
        }
    }

    pub fn pi_star(&self) -> &[f64] {
        &self.pi_star
    }

    pub fn is_live(&self, k: usize) -> bool {
        self.pi_star[k] > 0.0
    }
}

/// `r_k = sum_j w_j pi_jk / pi*_k`, and 0 for a dead feature.
pub fn edge(rados: &RadoSet, w: &WeightVector, k: usize, scale: &FeatureScale) -> Result<f64> {
    if w.values().len() != rados.n() {
        return Err(Error::DimensionMismatch {
            expected: rados.n(),
            actual: w.values().len(),
        });
    }
    if k >= rados.d() {
        return Err(Error::InvalidArgument(format!("feature {k} out of range")));
    }
    if !scale.is_live(k) {
        return Ok(0.0);
    }
    let col = rados.rados().column(k);
    Ok(scaled_edge(col.iter().copied(), w.values(), scale.pi_star[k]))
}

fn scaled_edge(col: impl Iterator<Item = f64>, w: &[f64], pi_star: f64) -> f64 {
    let s: f64 = col.zip(w).map(|(p, w)| w * p).sum();
    (s / pi_star).clamp(-1.0, 1.0)
}

pub fn alpha_update(r: f64, pi_star_k: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::EdgeAtBoundary(r));
    }
    if !(pi_star_k > 0.0) {
        return Err(Error::OutOfRange {
            name: "pi_star",
            value: pi_star_k,
            range: "(0, inf)",
        });
    }
    Ok(((1.0 + r) / (1.0 - r)).ln() / (2.0 * pi_star_k))
}

pub fn clamp_edge_ridge(r: f64, gamma: f64) -> f64 {
    if r.abs() <= gamma {
        r
    } else {
        gamma.copysign(r)
    }
}

/// Per-run state the weak learner reads.
struct Problem<'a> {
    rados: &'a RadoSet,
    /// Rados transposed so that each feature column is contiguous.
    columns: Array2<f64>,
    scale: FeatureScale,
    reg: Regularizer,
    config: &'a BoostConfig,
}

impl<'a> Problem<'a> {
    fn new(rados: &'a RadoSet, config: &'a BoostConfig) -> Result<Self> {
        config.validate()?;
        let reg = config.regularizer.evaluator(rados.d())?;
        let scale = FeatureScale::from_rados(rados);
        if !(0..rados.d()).any(|k| scale.is_live(k)) {
            return Err(Error::AllFeaturesDead);
        }
        Ok(Self {
            rados,
            columns: rados.rados().t().as_standard_layout().into_owned(),
            scale,
            reg,
            config,
        })
    }

    fn raw_edges(&self, w: &[f64]) -> Vec<f64> {
        let one = |k: usize| {
            if self.scale.is_live(k) {
                let col = self.columns.row(k);
                scaled_edge(col.iter().copied(), w, self.scale.pi_star[k])
            } else {
                0.0
            }
        };
        let d = self.rados.d();
        if self.rados.n() * d >= PARALLEL_SCAN_WORK {
            (0..d).into_par_iter().map(one).collect()
        } else {
            (0..d).map(one).collect()
        }
    }

    /// `omega * (Omega(theta + alpha e_k) - Omega(theta))` for the step
    /// feature `k` would take with edge `r`.
    fn lookahead_delta(&self, theta: &mut [f64], base: f64, k: usize, r: f64) -> f64 {
        let omega = self.config.regularizer.omega;
        let alpha = match alpha_update(r, self.scale.pi_star[k]) {
            Ok(a) => a,
            Err(_) if omega == 0.0 => return 0.0,
            Err(_) => return f64::INFINITY,
        };
        if omega == 0.0 {
            return 0.0;
        }
        let old = theta[k];
        theta[k] += alpha;
        let after = self.reg.value(theta);
        theta[k] = old;
        omega * (after - base)
    }

    fn pick(&self, w: &[f64], theta: &[f64]) -> (usize, f64) {
        let raw = self.raw_edges(w);
        let clamp = |r: f64| {
            if self.config.clamps() {
                clamp_edge_ridge(r, self.config.clamp_gamma)
            } else {
                r
            }
        };
        let live = (0..raw.len()).filter(|&k| self.scale.is_live(k));
        let scores: Vec<(usize, f64)> = match self.config.wl_mode {
            WeakLearnerMode::FirstAdmissible => live.map(|k| (k, raw[k].abs())).collect(),
            WeakLearnerMode::PreferenceOrder => {
                let mut scratch = theta.to_vec();
                let base = self.reg.value(theta);
                live.map(|k| {
                    let r = clamp(raw[k]);
                    (k, r.abs() - self.lookahead_delta(&mut scratch, base, k, r))
                })
                .collect()
            }
        };
        // Strictly greater wins, so ties keep the lowest index.
        let best = scores
            .iter()
            .fold(None::<(usize, f64)>, |acc, &(k, s)| match acc {
                Some((_, bs)) if !(s > bs) => acc,
                _ => Some((k, s)),
            })
            .map_or(scores[0].0, |(k, _)| k);
        (best, clamp(raw[best]))
    }
}

/// Feature choice and its (post-clamp for ridge) edge.
pub fn weak_learner(
    rados: &RadoSet,
    w: &WeightVector,
    config: &BoostConfig,
    theta: &Array1<f64>,
) -> Result<(usize, f64)> {
    if w.values().len() != rados.n() {
        return Err(Error::DimensionMismatch {
            expected: rados.n(),
            actual: w.values().len(),
        });
    }
    if theta.len() != rados.d() {
        return Err(Error::DimensionMismatch {
            expected: rados.d(),
            actual: theta.len(),
        });
    }
    let problem = Problem::new(rados, config)?;
    Ok(problem.pick(w.values(), &theta.to_vec()))
}

fn ln_loss_from_margins(margins: &[f64], reg_term: f64) -> f64 {
    let neg: Vec<f64> = margins.iter().map(|m| -m).collect();
    reg_term + log_sum_exp(&neg) - (margins.len() as f64).ln()
}

/// `(1/n) sum_j exp(-theta . pi_j + omega Omega(theta))`, aggregated in log
/// space.
pub fn regularized_exp_rado_loss(
    rados: &RadoSet,
    theta: &Array1<f64>,
    spec: &RegularizerSpec,
) -> Result<LossValue> {
    if theta.len() != rados.d() {
        return Err(Error::DimensionMismatch {
            expected: rados.d(),
            actual: theta.len(),
        });
    }
    let margins = rados.rados().dot(theta);
    let reg_term = if spec.omega == 0.0 || theta.iter().all(|&v| v == 0.0) {
        0.0
    } else {
        spec.omega * spec.evaluator(theta.len())?.value(&theta.to_vec())
    };
    Ok(LossValue::from_ln(ln_loss_from_margins(
        margins.as_slice().expect("fresh array is contiguous"),
        reg_term,
    )))
}

/// Runs `config.t` boosting iterations from `theta = 0` and uniform weights.
pub fn boost(rados: &RadoSet, config: &BoostConfig) -> Result<LinearModel> {
    boost_observed(rados, config, |_, _| {})
}

/// [`boost`], calling `observer(t, w_t)` after each weight update.
pub fn boost_observed(
    rados: &RadoSet,
    config: &BoostConfig,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<LinearModel> {
    let problem = Problem::new(rados, config)?;
    let (n, d) = (rados.n(), rados.d());
    let omega = config.regularizer.omega;

    let mut theta = vec![0.0; d];
    let mut w = vec![1.0 / n as f64; n];
    let mut margins = vec![0.0; n];
    let mut reg_prev = 0.0;
    let mut history = Vec::with_capacity(config.t);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;

    for t in 1..=config.t {
        let (k, r) = problem.pick(&w, &theta);
        let alpha = alpha_update(r, problem.scale.pi_star[k]).map_err(|_| Error::DegenerateEdge {
            iteration: t,
            feature: k,
            edge: r,
        })?;
        theta[k] += alpha;
        let reg_now = problem.reg.value(&theta);
        let delta = omega * (reg_now - reg_prev);
        reg_prev = reg_now;

        let col = problem.columns.row(k);
        let ln_u: Vec<f64> = w
            .iter()
            .zip(col.iter())
            .map(|(&wj, &p)| wj.ln() - alpha * p)
            .collect();
        let ln_s = log_sum_exp(&ln_u);
        let ln_z = delta + ln_s;
        let mut floored = 0usize;
        for (wj, lu) in w.iter_mut().zip(&ln_u) {
            *wj = (lu - ln_s).exp();
            if *wj < WEIGHT_FLOOR {
                *wj = WEIGHT_FLOOR;
                floored += 1;
            }
        }
        if floored > 0 {
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wj| *wj /= total);
            log::warn!("iteration {t}: {floored} rado weights raised to {WEIGHT_FLOOR:e}");
        }
        observer(t, &w);
        for (mj, &p) in margins.iter_mut().zip(col.iter()) {
            *mj += alpha * p;
        }

        if config.select == Selection::BestOnTraining {
            let ln_loss = ln_loss_from_margins(&margins, omega * reg_now);
            if best.as_ref().is_none_or(|(b, _, _)| ln_loss < *b) {
                best = Some((ln_loss, t, theta.clone()));
            }
        }

        history.push(IterationRecord {
            t,
            feature: k,
            alpha,
            edge_r: r,
            delta,
            z_norm: ln_z.exp(),
            ln_z,
            floored_weights: floored,
        });
    }

    let (selected, final_theta) = match best {
        Some((_, t, th)) => (t, th),
        None => (config.t, theta),
    };
    LinearModel::new(
        Array1::from(final_theta),
        rados.feature_names().to_vec(),
        history,
        config.clone(),
        selected,
    )
}

/// Boosting over the rado set whose rados are the edge vectors themselves,
/// which minimizes the exponential loss over examples.
pub fn baseline_example_boost(dataset: &Dataset, config: &BoostConfig) -> Result<LinearModel> {
    boost(&singleton_rados(dataset)?, config)
}
