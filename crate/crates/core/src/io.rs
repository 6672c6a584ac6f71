//! Datasets, rado sets and models on disk.
//!
//! * Dataset: CSV with a header row; one label column, every other column a
//!   numeric feature.
//! * Rado set: CSV with the feature names as header and one rado per line,
//!   plus a JSON sidecar `<path>.meta.json` holding the provenance.
//! * Model: a JSON document carrying `format_version`, the weights, the
//!   training configuration and the full iteration history.
//!
//! Floats are written in shortest round-trip decimal form, so every finite
//! value reads back bit for bit.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::boost::BoostConfig;
use crate::data::{Dataset, MinMaxScaling, Sign};
use crate::error::{Error, Result};
use crate::model::{IterationRecord, LinearModel};
use crate::rados::{Provenance, RadoSet};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const RADO_META_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Fails with [`Error::OutputExists`] if `path` exists and `force` is off.
pub fn ensure_writable(path: &Path, force: bool) -> Result<()> {
    if !force && path.exists() {
        return Err(Error::OutputExists(path.to_path_buf()));
    }
    Ok(())
}

/// Reads a labeled dataset.
///
/// Labels must take exactly two distinct values. The lexicographically
/// smaller token maps to `-1` unless `positive_token` names the `+1` class.
pub fn load_csv(path: &Path, label_column: &str, positive_token: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::UnknownColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut values = Vec::new();
    let mut tokens = Vec::new();
    let mut m = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        // Header is line 1.
        let line = row + 2;
        for (i, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    path: path.to_path_buf(),
                    line,
                    column: headers.get(i).unwrap_or("?").to_string(),
                });
            }
            if i == label_idx {
                tokens.push(cell.to_string());
            } else {
                values.push(cell.parse::<f64>().map_err(|_| Error::ParseNumber {
                    path: path.to_path_buf(),
                    line,
                    value: cell.to_string(),
                })?);
            }
        }
        m += 1;
    }

    let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::LabelTokens {
            path: path.to_path_buf(),
            found: distinct.iter().map(|s| s.to_string()).collect(),
        });
    }
    let positive = match positive_token {
        Some(p) if distinct.contains(p) => p.to_string(),
        Some(p) => {
            return Err(Error::InvalidArgument(format!(
                "positive token `{p}` not among labels {distinct:?}"
            )))
        }
        None => distinct.iter().next_back().expect("two tokens").to_string(),
    };
    let labels = tokens
        .iter()
        .map(|t| if *t == positive { Sign::Positive } else { Sign::Negative })
        .collect();
    let features = Array2::from_shape_vec((m, feature_names.len()), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    Dataset::new(features, labels, feature_names)
}

#[derive(Debug, Serialize, Deserialize)]
struct RadoMeta {
    format_version: u32,
    n: usize,
    d: usize,
    provenance: Provenance,
}

/// Path of the metadata sidecar of a rado CSV.
pub fn rado_meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_rados(path: &Path, rados: &RadoSet) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(rados.feature_names()).map_err(csv_err(path))?;
    for row in rados.rados().rows() {
        writer
            .write_record(row.iter().map(|v| v.to_string()))
            .map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))?;
    let meta = RadoMeta {
        format_version: RADO_META_VERSION,
        n: rados.n(),
        d: rados.d(),
        provenance: rados.provenance().clone(),
    };
    write_json(&rado_meta_path(path), &meta)
}

pub fn read_rados(path: &Path) -> Result<RadoSet> {
    let meta_path = rado_meta_path(path);
    let text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let version = peek_version(&meta_path, &text)?;
    if version > RADO_META_VERSION {
        return Err(Error::FormatVersion {
            found: version,
            supported: RADO_META_VERSION,
        });
    }
    let meta: RadoMeta = serde_json::from_str(&text).map_err(|e| Error::Corrupt {
        path: meta_path.clone(),
        reason: e.to_string(),
    })?;

    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut values = Vec::new();
    let mut n = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        for cell in record.iter() {
            values.push(cell.trim().parse::<f64>().map_err(|_| Error::ParseNumber {
                path: path.to_path_buf(),
                line: row + 2,
                value: cell.to_string(),
            })?);
        }
        n += 1;
    }
    if n != meta.n || names.len() != meta.d {
        return Err(Error::Corrupt {
            path: path.to_path_buf(),
            reason: format!(
                "{n}x{} rados on disk, metadata says {}x{}",
                names.len(),
                meta.n,
                meta.d
            ),
        });
    }
    let rados = Array2::from_shape_vec((n, names.len()), values).map_err(|e| Error::Corrupt {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    RadoSet::new(rados, names, meta.provenance)
}

/// On-disk model schema.
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    feature_names: Vec<String>,
    theta: Vec<f64>,
    config: BoostConfig,
    iterations_run: usize,
    selected_iteration: usize,
    scaling: Option<MinMaxScaling>,
    history: Vec<IterationRecord>,
}

pub fn model_to_json(model: &LinearModel) -> Result<String> {
    if model.history().is_empty() {
        return Err(Error::EmptyHistory);
    }
    let doc = ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: model.feature_names().to_vec(),
        theta: model.theta().to_vec(),
        config: model.config().clone(),
        iterations_run: model.iterations_run(),
        selected_iteration: model.selected_iteration(),
        scaling: model.scaling().cloned(),
        history: model.history().to_vec(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn model_from_json(path: &Path, text: &str) -> Result<LinearModel> {
    let version = peek_version(path, text)?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let corrupt = |reason: String| Error::Corrupt {
        path: path.to_path_buf(),
        reason,
    };
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    if doc.iterations_run != doc.history.len() {
        return Err(corrupt(format!(
            "iterations_run = {} but {} history records",
            doc.iterations_run,
            doc.history.len()
        )));
    }
    LinearModel::new(
        Array1::from(doc.theta),
        doc.feature_names,
        doc.history,
        doc.config,
        doc.selected_iteration,
    )
    .and_then(|m| m.with_scaling(doc.scaling))
    .map_err(|e| corrupt(e.to_string()))
}

pub fn write_model(path: &Path, model: &LinearModel) -> Result<()> {
    let text = model_to_json(model)?;
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    out.write_all(text.as_bytes()).map_err(io_err(path))?;
    out.write_all(b"\n").map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn read_model(path: &Path) -> Result<LinearModel> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    model_from_json(path, &text)
}

fn peek_version(path: &Path, text: &str) -> Result<u32> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Corrupt {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| Error::Corrupt {
            path: path.to_path_buf(),
            reason: "missing or invalid format_version".into(),
        })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}
