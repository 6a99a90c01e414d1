use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate sparsity: all {attempts} sampled projection vectors were zero")]
    DegenerateSparsity { attempts: usize },

    #[error("no threshold splits the histogram mass on both sides")]
    NoValleySplit,

    #[error("all values are identical")]
    IdenticalValues,

    #[error("labels must contain both classes")]
    SingleClass,

    #[error("mean must be positive, got {0}")]
    NonPositiveMean(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("label column required")]
    Unlabeled,

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a finite number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: label '{value}' is not 0 or 1")]
    InvalidLabel { row: usize, value: String },

    #[error("unsupported model format_version {found} (expected {expected})")]
    ModelVersion { found: u64, expected: u64 },

    #[error("malformed model: {0}")]
    ModelStructure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
