use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error kinds surfaced by the library.
///
/// [`Error::category`] groups them into data problems and numeric failures so
/// that front ends can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("refusing to enumerate 2^{m} rados: m exceeds the cap of {cap}")]
    EnumerationCap { m: usize, cap: usize },

    #[error("class {0} has no examples")]
    MissingClass(i8),

    #[error("invalid game coupling for {kind}: {reason}")]
    InvalidCoupling { kind: &'static str, reason: String },

    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("no regularizer admits a closed-form omega for {0}")]
    NoAdmissibleOmega(String),

    #[error("every feature is dead (all rado coordinates are zero)")]
    AllFeaturesDead,

    #[error("iteration {iteration}: edge on feature {feature} is {edge}, |r| = 1 gives an infinite step")]
    DegenerateEdge {
        iteration: usize,
        feature: usize,
        edge: f64,
    },

    #[error("edge magnitude must be < 1, got {0}")]
    EdgeAtBoundary(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: csv error: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}, line {line}: cannot parse `{value}` as a number")]
    ParseNumber {
        path: PathBuf,
        line: usize,
        value: String,
    },

    #[error("{path}, line {line}: missing value in column `{column}`")]
    MissingValue {
        path: PathBuf,
        line: usize,
        column: String,
    },

    #[error("{path}: expected exactly two label tokens, found {found:?}")]
    LabelTokens { path: PathBuf, found: Vec<String> },

    #[error("{path}: no column named `{column}`")]
    UnknownColumn { path: PathBuf, column: String },

    #[error("unsupported format version {found} (this build reads versions up to {supported})")]
    FormatVersion { found: u32, supported: u32 },

    #[error("corrupt document {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("refusing to write a model with an empty history")]
    EmptyHistory,

    #[error("output {0} already exists (pass --force to overwrite)")]
    OutputExists(PathBuf),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::DegenerateEdge { .. }
            | Error::EdgeAtBoundary(_)
            | Error::AllFeaturesDead => ErrorCategory::Numeric,
            Error::InvalidArgument(_)
            | Error::OutOfRange { .. }
            | Error::NoAdmissibleOmega(_)
            | Error::InvalidCoupling { .. }
            | Error::OutputExists(_) => ErrorCategory::Usage,
            _ => ErrorCategory::Data,
        }
    }
}
