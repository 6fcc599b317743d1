//! Pre-training, baselines, head re-training, fine-tuning and top-1 evaluation.
//!
//! Every procedure evaluates the validation loss before the first epoch and
//! after each epoch, runs the whole epoch budget, and returns the snapshot
//! with the lowest validation loss (earliest on ties).

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datastore::{ExampleSet, StoreError};
use crate::net::{AdamState, Checkpoint, Model, ModelConfig, NetError, Trainable};
use crate::scheme::Scheme;

pub const PRETRAIN_LR: f32 = 1e-3;
pub const FINE_TUNE_LR: f32 = 1e-4;
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_BATCH: usize = 128;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("class {class} has {available} examples, {needed} required")]
    Insufficient { class: Scheme, needed: usize, available: usize },
    #[error("class {0} is not in the model's class list")]
    ClassMismatch(Scheme),
    #[error("empty example set")]
    Empty,
    #[error("invalid training spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pretrain,
    Baseline,
    HeadRetrain,
    FineTune,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pretrain, Method::Baseline, Method::HeadRetrain, Method::FineTune];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pretrain => "pretrain",
            Method::Baseline => "baseline",
            Method::HeadRetrain => "head_retrain",
            Method::FineTune => "fine_tune",
        }
    }

    pub fn is_transfer(self) -> bool {
        matches!(self, Method::HeadRetrain | Method::FineTune)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezeMask {
    None,
    AllButHead,
}

impl FreezeMask {
    fn trainable(self) -> Trainable {
        match self {
            FreezeMask::None => Trainable::All,
            FreezeMask::AllButHead => Trainable::Head,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub epochs: usize,
    pub lr: f32,
    pub batch_size: usize,
    pub per_class_train: usize,
    pub per_class_val: usize,
    pub freeze_mask: FreezeMask,
    pub seed: u64,
}

impl TrainSpec {
    pub fn pretrain(seed: u64) -> Self {
        TrainSpec {
            epochs: DEFAULT_EPOCHS,
            lr: PRETRAIN_LR,
            batch_size: DEFAULT_BATCH,
            per_class_train: 5000,
            per_class_val: 500,
            freeze_mask: FreezeMask::None,
            seed,
        }
    }

    pub fn baseline(seed: u64) -> Self {
        TrainSpec { per_class_train: 500, per_class_val: 50, ..Self::pretrain(seed) }
    }

    pub fn head_retrain(seed: u64) -> Self {
        TrainSpec { freeze_mask: FreezeMask::AllButHead, ..Self::baseline(seed) }
    }

    pub fn fine_tune(seed: u64) -> Self {
        TrainSpec { lr: FINE_TUNE_LR, ..Self::baseline(seed) }
    }

    pub fn for_method(method: Method, seed: u64) -> Self {
        match method {
            Method::Pretrain => Self::pretrain(seed),
            Method::Baseline => Self::baseline(seed),
            Method::HeadRetrain => Self::head_retrain(seed),
            Method::FineTune => Self::fine_tune(seed),
        }
    }

    pub fn with_volume(mut self, train: usize, val: usize) -> Self {
        self.per_class_train = train;
        self.per_class_val = val;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(HarnessError::InvalidSpec(format!("{self:?}")));
        }
        if self.per_class_train == 0 || self.per_class_val == 0 {
            return Err(HarnessError::InvalidSpec("per-class volumes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean minibatch loss; `None` for the pre-training evaluation at epoch 0.
    pub train_loss: Option<f64>,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub best: Checkpoint,
    pub history: Vec<EpochRecord>,
}

impl TrainOutcome {
    pub fn epochs_run(&self) -> usize {
        self.history.len().saturating_sub(1)
    }
}

/// One grid cell's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub source_id: String,
    pub target_id: String,
    pub method: Method,
    pub seed: u64,
    pub cell_seed: u64,
    pub top1: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub checkpoint_path: Option<String>,
}

/// Keeps the first `k` examples of every class, failing if any class is short.
fn take_volume(set: &ExampleSet, k: usize) -> Result<ExampleSet> {
    if set.is_empty() {
        return Err(HarnessError::Empty);
    }
    let out = set.take_per_class(k);
    let mut counts = vec![0usize; set.n_classes()];
    for &l in &out.labels {
        counts[l] += 1;
    }
    for (class, &c) in set.class_list.iter().zip(&counts) {
        if c < k {
            return Err(HarnessError::Insufficient { class: *class, needed: k, available: c });
        }
    }
    Ok(out)
}

/// Relabels `set` into `model`'s class indices.
fn relabel(model: &Model, set: &ExampleSet) -> Result<Vec<usize>> {
    let map: Vec<usize> = set
        .class_list
        .iter()
        .map(|c| model.class_list.iter().position(|m| m == c).ok_or(HarnessError::ClassMismatch(*c)))
        .collect::<Result<_>>()?;
    Ok(set.labels.iter().map(|&l| map[l]).collect())
}

fn train_loop(
    mut model: Model,
    train: &ExampleSet,
    val: &ExampleSet,
    spec: &TrainSpec,
    rng: &mut ChaCha8Rng,
) -> Result<TrainOutcome> {
    spec.validate()?;
    let train = take_volume(train, spec.per_class_train)?;
    let val = take_volume(val, spec.per_class_val)?;
    let train_labels = relabel(&model, &train)?;
    let val_labels = relabel(&model, &val)?;
    let trainable = spec.freeze_mask.trainable();
    // Frozen convolutions make their activations constant across epochs.
    let cached = match trainable {
        Trainable::Head => Some(model.features(&train.inputs)?),
        Trainable::All => None,
    };
    let flat = model.config.flat();
    let row = model.config.row();

    let mut opt = AdamState::new(&model.config);
    let v0 = model.loss(&val.inputs, &val_labels)?;
    let mut history = vec![EpochRecord { epoch: 0, train_loss: None, val_loss: v0 }];
    let mut best = Checkpoint { model: model.clone(), optimizer: opt.clone(), epoch: 0, val_loss: v0 };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut xb = Vec::new();
    let mut yb = Vec::new();
    for epoch in 1..=spec.epochs {
        order.shuffle(rng);
        let mut total = 0.0f64;
        let mut batches = 0usize;
        for idx in order.chunks(spec.batch_size) {
            xb.clear();
            yb.clear();
            for &i in idx {
                match &cached {
                    Some(f) => xb.extend_from_slice(&f[i * flat..(i + 1) * flat]),
                    None => xb.extend_from_slice(&train.inputs[i * row..(i + 1) * row]),
                }
                yb.push(train_labels[i]);
            }
            let (loss, grads) = match cached {
                Some(_) => model.head_loss_and_grads(&xb, &yb, rng)?,
                None => model.loss_and_grads(&xb, &yb, rng, trainable)?,
            };
            opt.step(&mut model, &grads, spec.lr, trainable)?;
            total += loss as f64;
            batches += 1;
        }
        let val_loss = model.loss(&val.inputs, &val_labels)?;
        history.push(EpochRecord { epoch, train_loss: Some(total / batches as f64), val_loss });
        if val_loss < best.val_loss {
            best = Checkpoint { model: model.clone(), optimizer: opt.clone(), epoch, val_loss };
        }
    }
    Ok(TrainOutcome { best, history })
}

fn from_scratch(config: &ModelConfig, train: &ExampleSet, val: &ExampleSet, spec: &TrainSpec) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let model = Model::init(config.with_classes(train.n_classes()), train.class_list.clone(), &mut rng)?;
    train_loop(model, train, val, spec, &mut rng)
}

/// Trains from random initialization at source-scale volumes.
pub fn pretrain(config: &ModelConfig, train: &ExampleSet, val: &ExampleSet, spec: &TrainSpec) -> Result<TrainOutcome> {
    from_scratch(config, train, val, spec)
}

/// Trains from random initialization at target-scale volumes.
pub fn train_baseline(
    config: &ModelConfig,
    train: &ExampleSet,
    val: &ExampleSet,
    spec: &TrainSpec,
) -> Result<TrainOutcome> {
    from_scratch(config, train, val, spec)
}

fn transfer(source: &Checkpoint, train: &ExampleSet, val: &ExampleSet, spec: &TrainSpec) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let model = if source.model.class_list == train.class_list {
        source.model.clone()
    } else {
        source.model.replace_head(train.class_list.clone(), &mut rng)?
    };
    train_loop(model, train, val, spec, &mut rng)
}

/// Trains only the final layer of `source`, replacing it first when the
/// target class list differs.
pub fn head_retrain(source: &Checkpoint, train: &ExampleSet, val: &ExampleSet, spec: &TrainSpec) -> Result<TrainOutcome> {
    let spec = TrainSpec { freeze_mask: FreezeMask::AllButHead, ..spec.clone() };
    transfer(source, train, val, &spec)
}

/// Trains every layer of `source`, replacing the head first when the target
/// class list differs.
pub fn fine_tune(source: &Checkpoint, train: &ExampleSet, val: &ExampleSet, spec: &TrainSpec) -> Result<TrainOutcome> {
    let spec = TrainSpec { freeze_mask: FreezeMask::None, ..spec.clone() };
    transfer(source, train, val, &spec)
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Top-1 accuracy with dropout off.
pub fn evaluate(model: &Model, test: &ExampleSet) -> Result<f64> {
    if test.is_empty() {
        return Err(HarnessError::Empty);
    }
    let labels = relabel(model, test)?;
    let logits = model.predict(&test.inputs)?;
    let n = model.n_classes();
    let correct = labels
        .iter()
        .enumerate()
        .filter(|(i, &y)| argmax(&logits[i * n..(i + 1) * n]) == y)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}
