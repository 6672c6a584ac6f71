//! Cross-validated evaluation over a grid of regularizers.
//!
//! Rados are generated once per training fold; every grid cell is trained on
//! them and scored by 0/1 error on the held-out examples. Both the last and
//! the best-on-training iterate come from the same run.

use std::path::{Path, PathBuf};

use ndarray::Array1;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{boost, BoostConfig, Selection, WeakLearnerMode, DEFAULT_CLAMP_GAMMA};
use crate::data::MinMaxScaling;
use crate::error::{Error, Result};
use crate::folds::kfold;
use crate::io::load_csv;
use crate::model::{support_percent, LinearModel};
use crate::rados::{generate, Generation};
use crate::regularizers::{parse_regularizer, RegularizerKind, RegularizerSpec};
use crate::rng::{self, Domain};

fn default_true() -> bool {
    true
}

fn default_clamp() -> f64 {
    DEFAULT_CLAMP_GAMMA
}

fn default_select() -> Vec<Selection> {
    vec![Selection::Last]
}

fn default_wl() -> WeakLearnerMode {
    WeakLearnerMode::PreferenceOrder
}

fn default_mode() -> Generation {
    Generation::Plain
}

fn default_q() -> f64 {
    0.1
}

/// One row of the grid: a regularizer and the strengths to try.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    /// `lasso`, `ridge`, `linf`, `slope` or a combination (`0.5*lasso+ridge`).
    pub regularizer: String,
    pub omegas: Vec<f64>,
    /// Slope `q`.
    #[serde(default = "default_q")]
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Relative paths resolve against the config file's directory.
    pub dataset_path: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub positive_token: Option<String>,
    /// Name reported in the results; defaults to the dataset file stem.
    #[serde(default)]
    pub domain: Option<String>,
    pub folds: usize,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default = "default_mode")]
    pub rado_mode: Generation,
    /// Rados per training fold; the fold size when absent.
    #[serde(default)]
    pub n_rados: Option<usize>,
    #[serde(rename = "T", alias = "t")]
    pub t: usize,
    #[serde(default = "default_clamp")]
    pub clamp_gamma: f64,
    #[serde(default = "default_select")]
    pub select: Vec<Selection>,
    #[serde(default = "default_wl")]
    pub wl_mode: WeakLearnerMode,
    #[serde(default)]
    pub seed: u64,
    /// Fit min-max scaling on each training fold.
    #[serde(default)]
    pub min_max_scaling: bool,
    pub grid: Vec<GridEntry>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: Self =
            toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("experiment config: {e}")))?;
        if config.dataset_path.is_relative() {
            config.dataset_path = base_dir.join(&config.dataset_path);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be at least 2".into()));
        }
        if self.t < 1 {
            return Err(Error::InvalidArgument("T must be at least 1".into()));
        }
        if self.select.is_empty() {
            return Err(Error::InvalidArgument("select must name at least one rule".into()));
        }
        if self.n_rados == Some(0) {
            return Err(Error::InvalidArgument("n_rados must be positive".into()));
        }
        if self.cells()?.is_empty() {
            return Err(Error::InvalidArgument("the regularizer grid is empty".into()));
        }
        Ok(())
    }

    /// Grid cells in declaration order.
    pub fn cells(&self) -> Result<Vec<(RegularizerKind, f64)>> {
        let mut cells = Vec::new();
        for entry in &self.grid {
            let kind = parse_regularizer(&entry.regularizer, entry.q)?;
            for &omega in &entry.omegas {
                RegularizerSpec::new(kind.clone(), omega)?;
                cells.push((kind.clone(), omega));
            }
        }
        Ok(cells)
    }

    fn domain_name(&self) -> String {
        self.domain.clone().unwrap_or_else(|| {
            self.dataset_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        })
    }
}

/// Mean and standard deviation over folds, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsRow {
    pub domain: String,
    pub regularizer: String,
    pub omega: f64,
    pub select: String,
    pub test_error_mean: f64,
    pub test_error_std: f64,
    pub support_mean: f64,
    pub support_std: f64,
}

/// Score of one trained model on one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub cell: usize,
    pub select: Selection,
    pub test_error: f64,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ResultsRow>,
    pub outcomes: Vec<FoldOutcome>,
}

pub fn selection_name(select: Selection) -> &'static str {
    match select {
        Selection::Last => "last",
        Selection::BestOnTraining => "best",
    }
}

/// `theta_T`, replayed from the history in training order.
pub fn last_theta(model: &LinearModel) -> Array1<f64> {
    let mut theta = vec![0.0; model.d()];
    for rec in model.history() {
        theta[rec.feature] += rec.alpha;
    }
    Array1::from(theta)
}

fn mean_and_sample_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = load_csv(
        &config.dataset_path,
        &config.label_column,
        config.positive_token.as_deref(),
    )?;
    let folds = kfold(&dataset, config.folds, config.seed, config.stratified)?;
    let cells = config.cells()?;
    let want_best = config.select.contains(&Selection::BestOnTraining);

    let prepared: Vec<_> = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let raw_train = dataset.subset(&fold.train)?;
            let scaling = config.min_max_scaling.then(|| MinMaxScaling::fit(&raw_train));
            let train = match &scaling {
                Some(s) => s.apply(&raw_train)?,
                None => raw_train,
            };
            let test = dataset.subset(&fold.test)?;
            let rado_seed: u64 = rng::stream(config.seed, Domain::Experiment, f as u64).random();
            let n = config.n_rados.unwrap_or(train.m());
            let rados = generate(&train, config.rado_mode, n, rado_seed)?;
            Ok((rados, test, scaling))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..folds.len())
        .flat_map(|f| (0..cells.len()).map(move |c| (f, c)))
        .collect();
    let results: Vec<Vec<FoldOutcome>> = jobs
        .par_iter()
        .map(|&(f, c)| {
            let (rados, test, scaling) = &prepared[f];
            let (kind, omega) = &cells[c];
            let mut boost_config = BoostConfig::new(config.t, RegularizerSpec::new(kind.clone(), *omega)?);
            boost_config.clamp_gamma = config.clamp_gamma;
            boost_config.wl_mode = config.wl_mode;
            boost_config.select = if want_best {
                Selection::BestOnTraining
            } else {
                Selection::Last
            };
            boost_config.seed = config.seed;
            let trained = boost(rados, &boost_config)?.with_scaling(scaling.clone())?;
            config
                .select
                .iter()
                .map(|&select| {
                    let model = match select {
                        Selection::BestOnTraining => trained.clone(),
                        Selection::Last => LinearModel::new(
                            last_theta(&trained),
                            trained.feature_names().to_vec(),
                            trained.history().to_vec(),
                            trained.config().clone(),
                            trained.iterations_run(),
                        )?
                        .with_scaling(scaling.clone())?,
                    };
                    Ok(FoldOutcome {
                        fold: f,
                        cell: c,
                        select,
                        test_error: model.error_percent(test)?,
                        support: support_percent(model.theta()),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<FoldOutcome> = results.into_iter().flatten().collect();

    let domain = config.domain_name();
    let mut rows = Vec::new();
    for (c, (kind, omega)) in cells.iter().enumerate() {
        for &select in &config.select {
            let picked: Vec<&FoldOutcome> = outcomes
                .iter()
                .filter(|o| o.cell == c && o.select == select)
                .collect();
            let errors: Vec<f64> = picked.iter().map(|o| o.test_error).collect();
            let supports: Vec<f64> = picked.iter().map(|o| o.support).collect();
            let (test_error_mean, test_error_std) = mean_and_sample_std(&errors);
            let (support_mean, support_std) = mean_and_sample_std(&supports);
            rows.push(ResultsRow {
                domain: domain.clone(),
                regularizer: kind.name(),
                omega: *omega,
                select: selection_name(select).into(),
                test_error_mean,
                test_error_std,
                support_mean,
                support_std,
            });
        }
    }
    Ok(ExperimentReport { rows, outcomes })
}

/// Results CSV with the [`ResultsRow`] columns in declaration order.
pub fn write_results_csv(path: &Path, rows: &[ResultsRow]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
