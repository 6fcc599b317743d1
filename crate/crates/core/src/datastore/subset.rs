use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Manifest, RecordingMeta, Result, StoreError, WINDOW_LEN};
use crate::scheme::Scheme;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerClass {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl PerClass {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

/// Declarative metadata filter over a master dataset.
///
/// Ranges are closed intervals; `fo_range` is a fraction of the sample rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetConfig {
    pub name: String,
    pub snr_range: [f64; 2],
    pub fo_range: [f64; 2],
    pub schemes: Vec<Scheme>,
    pub per_class: PerClass,
}

impl SubsetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(StoreError::InvalidConfig(format!("{}: {m}", self.name)));
        if !(self.snr_range[0] <= self.snr_range[1]) {
            return bad(format!("snr range {:?} is inverted", self.snr_range));
        }
        if !(self.fo_range[0] <= self.fo_range[1]) {
            return bad(format!("fo range {:?} is inverted", self.fo_range));
        }
        if self.schemes.is_empty() {
            return bad("no schemes".into());
        }
        let p = self.per_class;
        if p.train == 0 || p.val == 0 || p.test == 0 {
            return bad(format!("per-class counts must be positive, got {p:?}"));
        }
        Ok(())
    }

    pub fn matches(&self, meta: &RecordingMeta) -> bool {
        self.schemes.contains(&meta.scheme)
            && meta.snr_db >= self.snr_range[0]
            && meta.snr_db <= self.snr_range[1]
            && meta.fo_frac >= self.fo_range[0]
            && meta.fo_frac <= self.fo_range[1]
    }

    /// Label order: the canonical scheme order restricted to this subset.
    pub fn class_list(&self) -> Vec<Scheme> {
        Scheme::canonical(&self.schemes)
    }

    pub fn with_per_class(mut self, per_class: PerClass) -> Self {
        self.per_class = per_class;
        self
    }

    pub fn with_schemes(mut self, schemes: &[Scheme]) -> Self {
        self.schemes = Scheme::canonical(schemes);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// One example: a recording and the start of its 128-sample window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRef {
    pub recording_id: String,
    pub scheme: Scheme,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetView {
    pub config: SubsetConfig,
    pub split: Split,
    pub example_refs: Vec<ExampleRef>,
}

impl DatasetView {
    pub fn len(&self) -> usize {
        self.example_refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.example_refs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetViews {
    pub train: DatasetView,
    pub val: DatasetView,
    pub test: DatasetView,
}

/// Samples matching recordings without replacement and splits them per class.
///
/// Each recording lands in at most one split. Window offsets are drawn
/// uniformly over the recording.
pub fn select_subset(manifest: &Manifest, config: &SubsetConfig, seed: u64) -> Result<SubsetViews> {
    config.validate()?;
    let p = config.per_class;
    let mut views = [Split::Train, Split::Val, Split::Test].map(|split| DatasetView {
        config: config.clone(),
        split,
        example_refs: Vec::new(),
    });
    for class in config.class_list() {
        let mut candidates: Vec<_> = manifest
            .rows
            .iter()
            .filter(|r| r.meta.scheme == class && config.matches(&r.meta))
            .collect();
        if candidates.len() < p.total() {
            return Err(StoreError::InsufficientData {
                class,
                needed: p.total(),
                available: candidates.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            seed,
            &[config.name.as_bytes(), class.name().as_bytes()],
        ));
        candidates.shuffle(&mut rng);
        let bounds = [(0, p.train), (p.train, p.train + p.val), (p.train + p.val, p.total())];
        for (view, (lo, hi)) in views.iter_mut().zip(bounds) {
            for row in &candidates[lo..hi] {
                if row.meta.length < WINDOW_LEN {
                    return Err(StoreError::ShortRecording(row.meta.length));
                }
                let offset = rng.random_range(0..=row.meta.length - WINDOW_LEN);
                view.example_refs.push(ExampleRef {
                    recording_id: row.id.clone(),
                    scheme: class,
                    offset,
                });
            }
        }
    }
    let [train, val, test] = views;
    Ok(SubsetViews { train, val, test })
}
