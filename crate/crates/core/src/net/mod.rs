//! A small two-convolution CNN with hand-written backpropagation.
//!
//! Inputs are `(B, 1, 2, 128)` windows stored as `B` rows of an I row followed
//! by a Q row. All arithmetic is `f32`.

mod adam;
mod checkpoint;
mod config;
mod gemm;
mod model;

use thiserror::Error;

pub use adam::{AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::ModelConfig;
pub use model::{cross_entropy, softmax, Model, Params, Trainable, TENSOR_NAMES};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("input holds {got} values, expected a multiple of {row}")]
    ShapeMismatch { got: usize, row: usize },
    #[error("{inputs} inputs but {labels} labels")]
    LabelCount { inputs: usize, labels: usize },
    #[error("label {label} out of range for {n} classes")]
    LabelOutOfRange { label: usize, n: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt checkpoint {path}: {reason}")]
    Corrupt { path: std::path::PathBuf, reason: String },
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

pub type Result<T, E = NetError> = std::result::Result<T, E>;
