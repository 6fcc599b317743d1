use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sigmf::{write_components, write_recording};
use super::{io_err, json_err, RecordingMeta, Result, StoreError};
use crate::scheme::Scheme;
use crate::seed::derive_seed;
use crate::sigsynth::{apply_impairments, generate, ImpairmentParams, ModParams, Recording, DEFAULT_SAMPLE_RATE_HZ};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
const SPEC_FILE: &str = "master.json";

/// Parameters of a master dataset build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterSpec {
    pub per_class: usize,
    pub seed: u64,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: f64,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_dataset_id")]
    pub dataset_id: String,
    #[serde(default = "default_snr_range")]
    pub snr_range: [f64; 2],
    #[serde(default = "default_fo_range")]
    pub fo_range: [f64; 2],
    /// Also persist clean and noise sidecars.
    #[serde(default)]
    pub write_components: bool,
}

fn default_length() -> usize {
    1024
}
fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE_HZ
}
fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}
fn default_dataset_id() -> String {
    "master".to_string()
}
fn default_snr_range() -> [f64; 2] {
    [-10.0, 20.0]
}
fn default_fo_range() -> [f64; 2] {
    [-0.10, 0.10]
}

impl MasterSpec {
    pub fn new(per_class: usize, seed: u64) -> Self {
        MasterSpec {
            per_class,
            seed,
            length: default_length(),
            sample_rate_hz: default_sample_rate(),
            schemes: all_schemes(),
            dataset_id: default_dataset_id(),
            snr_range: default_snr_range(),
            fo_range: default_fo_range(),
            write_components: false,
        }
    }

    pub fn recording_id(scheme: Scheme, index: usize) -> String {
        format!("{}_{index:07}", scheme.name())
    }

    pub fn recording_seed(&self, scheme: Scheme, index: usize) -> u64 {
        derive_seed(self.seed, &[scheme.name().as_bytes(), &(index as u64).to_le_bytes()])
    }

    /// Synthesizes one master recording from its own seed: parameters, SNR and
    /// FO are drawn uniformly from their spaces.
    pub fn synthesize(&self, scheme: Scheme, seed: u64) -> Result<Recording> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ModParams::sample(scheme, self.sample_rate_hz, &mut rng);
        let snr_db = rng.random_range(self.snr_range[0]..=self.snr_range[1]);
        let fo_frac = rng.random_range(self.fo_range[0]..=self.fo_range[1]);
        let clean = generate(scheme, &params, self.length, &mut rng)?;
        Ok(apply_impairments(clean, ImpairmentParams::new(fo_frac, snr_db), &mut rng)?)
    }
}

/// One manifest line: the recording id plus its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    #[serde(flatten)]
    pub meta: RecordingMeta,
}

/// Index of a master dataset directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub root: PathBuf,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let path = root.join(MANIFEST_FILE);
        let file = File::open(&path).map_err(io_err(&path))?;
        let mut rows = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(io_err(&path))?;
            if line.trim().is_empty() {
                continue;
            }
            rows.push(serde_json::from_str(&line).map_err(json_err(&path))?);
        }
        Ok(Manifest { root, rows })
    }

    /// Path prefix of a recording's SigMF pair.
    pub fn recording_base(&self, row: &ManifestRow) -> PathBuf {
        self.root.join(row.meta.scheme.name()).join(&row.id)
    }

    pub fn base_for_id(&self, id: &str) -> Result<PathBuf> {
        // ids are `<scheme>_<index>`; the scheme names the directory
        let scheme = id
            .rsplit_once('_')
            .map(|(s, _)| s)
            .ok_or_else(|| StoreError::UnknownRecording(id.to_string()))?;
        Ok(self.root.join(scheme).join(id))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Generates `per_class` recordings for every scheme and writes the manifest.
pub fn build_master(spec: &MasterSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    if spec.per_class == 0 {
        return Err(StoreError::InvalidConfig("per_class must be at least 1".into()));
    }
    let root = out_dir.as_ref().to_path_buf();
    let schemes = Scheme::canonical(&spec.schemes);
    for s in &schemes {
        let dir = root.join(s.name());
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    }

    let jobs: Vec<(Scheme, usize)> = schemes
        .iter()
        .flat_map(|&s| (0..spec.per_class).map(move |i| (s, i)))
        .collect();
    let rows: Vec<ManifestRow> = jobs
        .into_par_iter()
        .map(|(scheme, i)| -> Result<ManifestRow> {
            let seed = spec.recording_seed(scheme, i);
            let rec = spec.synthesize(scheme, seed)?;
            let id = MasterSpec::recording_id(scheme, i);
            let meta = RecordingMeta::for_recording(&rec, seed, spec.dataset_id.clone());
            let base = root.join(scheme.name()).join(&id);
            write_recording(&rec, &meta, &base)?;
            if spec.write_components {
                write_components(&rec, &base)?;
            }
            Ok(ManifestRow { id, meta })
        })
        .collect::<Result<_>>()?;

    let manifest_path = root.join(MANIFEST_FILE);
    let file = File::create(&manifest_path).map_err(io_err(&manifest_path))?;
    let mut w = BufWriter::new(file);
    for row in &rows {
        serde_json::to_writer(&mut w, row).map_err(json_err(&manifest_path))?;
        w.write_all(b"\n").map_err(io_err(&manifest_path))?;
    }
    w.flush().map_err(io_err(&manifest_path))?;

    let spec_path = root.join(SPEC_FILE);
    let spec_json = serde_json::to_vec_pretty(spec).map_err(json_err(&spec_path))?;
    fs::write(&spec_path, spec_json).map_err(io_err(&spec_path))?;

    Ok(Manifest { root, rows })
}
