//! Whole-grid orchestration: plans, the results registry, resumable runs and
//! result matrices.

mod matrix;
mod plan;
mod registry;
mod runner;

use std::path::PathBuf;

use thiserror::Error;

pub use matrix::{
    matrix_accuracy, matrix_method_diff, matrix_vs_baseline, read_csv, render_heatmap, write_csv, MatrixKind,
    ResultMatrix,
};
pub use plan::{cell_seed, Cell, ExperimentPlan, PlanKind, Scale, ScaleSettings, DESK_SCHEMES};
pub use registry::{FailureRecord, Registry, FAILURES_FILE, REGISTRY_FILE};
pub use runner::{run_cell, run_plan, RunSummary};

use crate::datastore::StoreError;
use crate::harness::HarnessError;
use crate::net::NetError;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("PNG error in {path}: {source}")]
    Png {
        path: PathBuf,
        #[source]
        source: png::EncodingError,
    },
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("incomplete grid, missing cells: {}", .0.join(", "))]
    Incomplete(Vec<String>),
    #[error("source checkpoint for `{0}` has not been trained")]
    MissingSource(String),
    #[error("malformed matrix: {0}")]
    Matrix(String),
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ExpError {
    let path = path.into();
    move |source| ExpError::Io { path, source }
}

pub(crate) fn json_err(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> ExpError {
    let path = path.into();
    move |source| ExpError::Json { path, source }
}
