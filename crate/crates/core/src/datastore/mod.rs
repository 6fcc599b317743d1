//! SigMF persistence, the master dataset, and metadata-filtered subsets.

mod master;
mod sigmf;
mod subset;
mod sweeps;
mod window;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use master::{build_master, Manifest, ManifestRow, MasterSpec, MANIFEST_FILE};
pub use sigmf::{read_components, read_recording, write_components, write_recording, SIGMF_DATATYPE};
pub use subset::{select_subset, DatasetView, ExampleRef, PerClass, Split, SubsetConfig, SubsetViews};
pub use sweeps::{
    make_mod_exp1, make_mod_exp2, make_snr_fo_sweep, make_snr_sweep, make_fo_sweep, mod_exp2_chain,
    MOD_EXP1_GROUPS, PAPER_PER_CLASS, SMALL_SUBSET,
};
pub use window::{load_view, slice_window, window_at, ExampleSet, WINDOW_LEN};

use crate::scheme::Scheme;
use crate::sigsynth::{ModParams, Recording, SynthError};

/// Generation metadata stored alongside every recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub fo_frac: f64,
    pub mod_params: ModParams,
    pub length: usize,
    pub seed: u64,
    pub dataset_id: String,
}

impl RecordingMeta {
    pub fn for_recording(rec: &Recording, seed: u64, dataset_id: impl Into<String>) -> Self {
        RecordingMeta {
            scheme: rec.scheme,
            snr_db: rec.impairments.snr_db,
            fo_frac: rec.impairments.fo_frac,
            mod_params: rec.params.clone(),
            length: rec.len(),
            seed,
            dataset_id: dataset_id.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
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
    #[error("{path}: missing metadata field `{field}`")]
    MissingField { path: PathBuf, field: String },
    #[error("{path}: datatype `{found}` is not {expected}")]
    DatatypeMismatch { path: PathBuf, found: String, expected: &'static str },
    #[error("{path}: data holds {actual} bytes, metadata promises {expected}")]
    Truncated { path: PathBuf, expected: u64, actual: u64 },
    #[error("insufficient data for class {class}: need {needed} matching recordings, have {available}")]
    InsufficientData { class: Scheme, needed: usize, available: usize },
    #[error("invalid subset config: {0}")]
    InvalidConfig(String),
    #[error("recording of {0} samples is shorter than the {WINDOW_LEN}-sample window")]
    ShortRecording(usize),
    #[error("recording `{0}` is not in the manifest")]
    UnknownRecording(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> StoreError {
    let path = path.into();
    move |source| StoreError::Io { path, source }
}

pub(crate) fn json_err(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> StoreError {
    let path = path.into();
    move |source| StoreError::Json { path, source }
}
