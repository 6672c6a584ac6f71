//! Rademacher observations (rados).
//!
//! For a sign vector `sigma`, the rado is `pi_sigma = 1/2 * sum_i (sigma_i + y_i) x_i`,
//! i.e. the sum of the edge vectors of the examples on which `sigma` agrees
//! with the label. Rado index `j` of a full enumeration encodes the agreeing
//! examples as a bit set: bit `i` is 1 iff `sigma_i = y_i`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sign};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Largest `m` for which [`enumerate_rados`] agrees to build all `2^m` rados
/// unless the caller raises the cap.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaVector(Vec<Sign>);

impl SigmaVector {
    pub fn new(entries: Vec<Sign>) -> Self {
        Self(entries)
    }

    pub fn from_i8(entries: &[i8]) -> Result<Self> {
        entries
            .iter()
            .map(|&s| Sign::from_i8(s))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// The sign vector whose agreement set with `labels` is the bit set `mask`.
    pub fn from_mask(labels: &[Sign], mask: u64) -> Self {
        Self(
            labels
                .iter()
                .enumerate()
                .map(|(i, &y)| if mask >> i & 1 == 1 { y } else { y.flip() })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadoMode {
    Full,
    PlainRandom,
    ClassWise,
    Protected,
    /// One rado per example (`pi_j = e_j`); the example-boosting comparator.
    Singletons,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: RadoMode,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    /// l1 diameter bound used for Laplace calibration.
    pub r_e: Option<f64>,
    pub source_m: usize,
    /// Cheap diameter bound `2 max_i ||e_i||_1` of the source dataset.
    pub edge_l1_bound: Option<f64>,
    /// Hex SHA-256 of the noise seed, published in place of the seed itself.
    pub seed_commitment: Option<String>,
}

impl Provenance {
    pub fn new(mode: RadoMode, seed: Option<u64>, source_m: usize) -> Self {
        Self {
            mode,
            seed,
            epsilon: None,
            r_e: None,
            source_m,
            edge_l1_bound: None,
            seed_commitment: None,
        }
    }
}

/// `n` rados in `R^d` plus where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RadoSet {
    rados: Array2<f64>,
    feature_names: Vec<String>,
    provenance: Provenance,
}

impl RadoSet {
    pub fn new(rados: Array2<f64>, feature_names: Vec<String>, provenance: Provenance) -> Result<Self> {
        let (n, d) = rados.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "a rado set needs n >= 1 and d >= 1, got {n}x{d}"
            )));
        }
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: feature_names.len(),
            });
        }
        if rados.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("rado entries must be finite".into()));
        }
        if provenance.mode == RadoMode::Full
            && (provenance.source_m >= 64 || n as u64 != 1u64 << provenance.source_m)
        {
            return Err(Error::InvalidArgument(format!(
                "a full enumeration over m = {} must hold 2^m rados, got {n}",
                provenance.source_m
            )));
        }
        Ok(Self {
            rados,
            feature_names,
            provenance,
        })
    }

    /// Unnamed rados (`x0, x1, ...`) with the given mode; handy for tests and
    /// synthetic problems.
    pub fn from_matrix(rados: Array2<f64>, mode: RadoMode) -> Result<Self> {
        let names = (0..rados.ncols()).map(|k| format!("x{k}")).collect();
        let source_m = match mode {
            RadoMode::Full => rados.nrows().trailing_zeros() as usize,
            _ => rados.nrows(),
        };
        Self::new(rados, names, Provenance::new(mode, None, source_m))
    }

    pub fn n(&self) -> usize {
        self.rados.nrows()
    }

    pub fn d(&self) -> usize {
        self.rados.ncols()
    }

    pub fn rados(&self) -> &Array2<f64> {
        &self.rados
    }

    pub fn rado(&self, j: usize) -> ArrayView1<'_, f64> {
        self.rados.row(j)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Result<Self> {
        self.provenance = provenance;
        Self::new(self.rados, self.feature_names, self.provenance)
    }

    /// `max_j |pi_jk|` for every feature `k`.
    pub fn column_abs_max(&self) -> Vec<f64> {
        self.rados
            .columns()
            .into_iter()
            .map(|c| c.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .collect()
    }
}

pub fn rado_from_sigma(dataset: &Dataset, sigma: &SigmaVector) -> Result<Array1<f64>> {
    if sigma.len() != dataset.m() {
        return Err(Error::DimensionMismatch {
            expected: dataset.m(),
            actual: sigma.len(),
        });
    }
    let mut rado = Array1::zeros(dataset.d());
    for (i, (&s, &y)) in sigma.entries().iter().zip(dataset.labels()).enumerate() {
        if s == y {
            rado.scaled_add(y.value(), &dataset.row(i));
        }
    }
    Ok(rado)
}

/// All `2^m` rados, indexed by agreement bit set.
pub fn enumerate_rados(dataset: &Dataset, cap: usize) -> Result<RadoSet> {
    let m = dataset.m();
    if m > cap || m >= 63 {
        return Err(Error::EnumerationCap { m, cap });
    }
    let edges = dataset.edge_matrix();
    let n = 1usize << m;
    let d = dataset.d();
    let mut rados = Array2::<f64>::zeros((n, d));
    for mask in 1..n {
        let top = usize::BITS - 1 - mask.leading_zeros();
        let rest = mask & !(1 << top);
        let base = rados.row(rest).to_owned();
        rados.row_mut(mask).assign(&(base + &edges.row(top as usize)));
    }
    RadoSet::new(
        rados,
        dataset.feature_names().to_vec(),
        Provenance::new(RadoMode::Full, None, m),
    )
}

/// One rado per example, equal to its edge vector.
pub fn singleton_rados(dataset: &Dataset) -> Result<RadoSet> {
    RadoSet::new(
        dataset.edge_matrix(),
        dataset.feature_names().to_vec(),
        Provenance::new(RadoMode::Singletons, None, dataset.m()),
    )
}

fn sum_selected(edges: &Array2<f64>, include: impl Iterator<Item = bool>) -> Vec<f64> {
    let mut rado = Array1::<f64>::zeros(edges.ncols());
    for (i, take) in include.enumerate() {
        if take {
            rado += &edges.row(i);
        }
    }
    rado.to_vec()
}

fn assemble(
    dataset: &Dataset,
    rows: Vec<Vec<f64>>,
    provenance: Provenance,
) -> Result<RadoSet> {
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let rados = Array2::from_shape_vec((n, dataset.d()), flat)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    RadoSet::new(rados, dataset.feature_names().to_vec(), provenance)
}

/// Agreement pattern of plain random rado `j`: each example agrees w.p. 1/2.
fn plain_agreement(m: usize, seed: u64, j: usize) -> Vec<bool> {
    let mut rng = rng::stream(seed, Domain::PlainRados, j as u64);
    (0..m).map(|_| rng.random::<bool>()).collect()
}

/// `n` rados from independent uniform sign vectors.
pub fn sample_plain(dataset: &Dataset, n: usize, seed: u64) -> Result<RadoSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one rado".into()));
    }
    let edges = dataset.edge_matrix();
    let m = dataset.m();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| sum_selected(&edges, plain_agreement(m, seed, j).into_iter()))
        .collect();
    assemble(dataset, rows, Provenance::new(RadoMode::PlainRandom, Some(seed), m))
}

/// `n` rados, each summing a random half-subset of a single random class.
pub fn sample_classwise(dataset: &Dataset, n: usize, seed: u64) -> Result<RadoSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one rado".into()));
    }
    for class in [Sign::Negative, Sign::Positive] {
        if dataset.class_count(class) == 0 {
            return Err(Error::MissingClass(class.as_i8()));
        }
    }
    let edges = dataset.edge_matrix();
    let labels = dataset.labels();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng::stream(seed, Domain::ClassWiseRados, j as u64);
            let class = if rng.random::<bool>() {
                Sign::Positive
            } else {
                Sign::Negative
            };
            let include: Vec<bool> = labels
                .iter()
                .map(|&y| y == class && rng.random::<bool>())
                .collect();
            sum_selected(&edges, include.into_iter())
        })
        .collect();
    assemble(
        dataset,
        rows,
        Provenance::new(RadoMode::ClassWise, Some(seed), dataset.m()),
    )
}

/// How a rado set is produced from a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generation {
    Plain,
    Classwise,
    Full,
    Singletons,
}

impl std::str::FromStr for Generation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(Generation::Plain),
            "classwise" | "class_wise" => Ok(Generation::Classwise),
            "full" => Ok(Generation::Full),
            "singletons" => Ok(Generation::Singletons),
            other => Err(Error::InvalidArgument(format!("unknown rado mode `{other}`"))),
        }
    }
}

/// Builds rados per `mode` and records the cheap edge diameter bound.
/// `n` is ignored by the deterministic modes.
pub fn generate(dataset: &Dataset, mode: Generation, n: usize, seed: u64) -> Result<RadoSet> {
    let set = match mode {
        Generation::Plain => sample_plain(dataset, n, seed)?,
        Generation::Classwise => sample_classwise(dataset, n, seed)?,
        Generation::Full => enumerate_rados(dataset, DEFAULT_ENUMERATION_CAP)?,
        Generation::Singletons => singleton_rados(dataset)?,
    };
    let mut provenance = set.provenance().clone();
    provenance.edge_l1_bound = Some(crate::privacy::edge_diameter_bound(dataset));
    set.with_provenance(provenance)
}

/// Minkowski shift `pi -> pi - (a_e * omega_value / ||theta||^2) * theta`.
///
/// `omega_value` is `Omega(theta)` as computed by the caller. A zero `theta`
/// leaves the set unchanged.
pub fn regularize_rados(
    rados: &RadoSet,
    theta: &Array1<f64>,
    a_e: f64,
    omega_value: f64,
) -> Result<RadoSet> {
    if theta.len() != rados.d() {
        return Err(Error::DimensionMismatch {
            expected: rados.d(),
            actual: theta.len(),
        });
    }
    let norm_sq = theta.dot(theta);
    if norm_sq == 0.0 {
        return Ok(rados.clone());
    }
    let shift = a_e * omega_value / norm_sq;
    let mut shifted = rados.rados.clone();
    for mut row in shifted.rows_mut() {
        row.scaled_add(-shift, theta);
    }
    RadoSet::new(shifted, rados.feature_names.clone(), rados.provenance.clone())
}
