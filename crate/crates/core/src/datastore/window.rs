use num_complex::Complex32;
use rand::Rng;
use rayon::prelude::*;

use super::{read_recording, DatasetView, Manifest, Result, StoreError};
use crate::scheme::Scheme;

/// Samples per network input window.
pub const WINDOW_LEN: usize = 128;

/// Extracts the window starting at `offset` as an I row followed by a Q row,
/// scaled to unit average power.
pub fn window_at(samples: &[Complex32], offset: usize) -> Result<Vec<f32>> {
    if samples.len() < WINDOW_LEN || offset > samples.len() - WINDOW_LEN {
        return Err(StoreError::ShortRecording(samples.len().saturating_sub(offset)));
    }
    let w = &samples[offset..offset + WINDOW_LEN];
    let power: f64 = w.iter().map(|c| (c.re as f64).powi(2) + (c.im as f64).powi(2)).sum::<f64>()
        / WINDOW_LEN as f64;
    let scale = if power > 0.0 { 1.0 / power.sqrt() } else { 1.0 };
    let mut out = vec![0.0f32; 2 * WINDOW_LEN];
    let (i_row, q_row) = out.split_at_mut(WINDOW_LEN);
    for (k, c) in w.iter().enumerate() {
        i_row[k] = (c.re as f64 * scale) as f32;
        q_row[k] = (c.im as f64 * scale) as f32;
    }
    Ok(out)
}

/// Draws a uniform window offset and returns it with the window.
pub fn slice_window<R: Rng + ?Sized>(samples: &[Complex32], rng: &mut R) -> Result<(usize, Vec<f32>)> {
    if samples.len() < WINDOW_LEN {
        return Err(StoreError::ShortRecording(samples.len()));
    }
    let offset = rng.random_range(0..=samples.len() - WINDOW_LEN);
    Ok((offset, window_at(samples, offset)?))
}

/// Dense examples ready for the network: `inputs` holds `len()` rows of
/// `2 * WINDOW_LEN` values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSet {
    pub class_list: Vec<Scheme>,
    pub inputs: Vec<f32>,
    pub labels: Vec<usize>,
}

impl ExampleSet {
    pub const ROW: usize = 2 * WINDOW_LEN;

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.inputs[i * Self::ROW..(i + 1) * Self::ROW]
    }

    pub fn n_classes(&self) -> usize {
        self.class_list.len()
    }

    /// Keeps the first `k` examples of each class, preserving order.
    pub fn take_per_class(&self, k: usize) -> ExampleSet {
        let mut seen = vec![0usize; self.class_list.len()];
        let mut out = ExampleSet { class_list: self.class_list.clone(), inputs: Vec::new(), labels: Vec::new() };
        for i in 0..self.len() {
            let l = self.labels[i];
            if seen[l] < k {
                seen[l] += 1;
                out.inputs.extend_from_slice(self.row(i));
                out.labels.push(l);
            }
        }
        out
    }

    /// Gathers the given rows.
    pub fn select(&self, idx: &[usize]) -> ExampleSet {
        let mut inputs = Vec::with_capacity(idx.len() * Self::ROW);
        for &i in idx {
            inputs.extend_from_slice(self.row(i));
        }
        ExampleSet {
            class_list: self.class_list.clone(),
            inputs,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Reads every referenced recording and materializes its window.
pub fn load_view(manifest: &Manifest, view: &DatasetView) -> Result<ExampleSet> {
    let class_list = view.config.class_list();
    let rows: Vec<(Vec<f32>, usize)> = view
        .example_refs
        .par_iter()
        .map(|r| -> Result<(Vec<f32>, usize)> {
            let label = class_list
                .iter()
                .position(|&s| s == r.scheme)
                .ok_or_else(|| StoreError::InvalidConfig(format!("{} is not in the class list", r.scheme)))?;
            let base = manifest.base_for_id(&r.recording_id)?;
            let (samples, _) = read_recording(&base)?;
            Ok((window_at(&samples, r.offset)?, label))
        })
        .collect::<Result<_>>()?;
    let mut inputs = Vec::with_capacity(rows.len() * ExampleSet::ROW);
    let mut labels = Vec::with_capacity(rows.len());
    for (x, l) in rows {
        inputs.extend_from_slice(&x);
        labels.push(l);
    }
    Ok(ExampleSet { class_list, inputs, labels })
}
