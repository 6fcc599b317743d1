use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{io_err, json_err, RecordingMeta, Result, StoreError};
use crate::scheme::Scheme;
use crate::sigsynth::{ModParams, Recording};

pub const SIGMF_DATATYPE: &str = "cf32_le";
const SIGMF_VERSION: &str = "1.0.0";
const NAMESPACE: &str = "rftl";
const NAMESPACE_VERSION: &str = "1.0.0";

const REQUIRED_FIELDS: [&str; 10] = [
    "core:datatype",
    "core:sample_rate",
    "core:version",
    "rftl:scheme",
    "rftl:snr_db",
    "rftl:fo_frac",
    "rftl:mod_params",
    "rftl:length",
    "rftl:seed",
    "rftl:dataset_id",
];

#[derive(Debug, Serialize, Deserialize)]
struct Extension {
    name: String,
    version: String,
    optional: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct Global {
    #[serde(rename = "core:datatype")]
    datatype: String,
    #[serde(rename = "core:sample_rate")]
    sample_rate: f64,
    #[serde(rename = "core:version")]
    version: String,
    #[serde(rename = "core:extensions", default)]
    extensions: Vec<Extension>,
    #[serde(rename = "rftl:scheme")]
    scheme: Scheme,
    #[serde(rename = "rftl:snr_db")]
    snr_db: f64,
    #[serde(rename = "rftl:fo_frac")]
    fo_frac: f64,
    #[serde(rename = "rftl:mod_params")]
    mod_params: ModParams,
    #[serde(rename = "rftl:length")]
    length: usize,
    #[serde(rename = "rftl:seed")]
    seed: u64,
    #[serde(rename = "rftl:dataset_id")]
    dataset_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Capture {
    #[serde(rename = "core:sample_start")]
    sample_start: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaFile {
    global: Global,
    captures: Vec<Capture>,
    annotations: Vec<Value>,
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn encode(samples: impl Iterator<Item = Complex32>) -> Vec<u8> {
    let mut out = Vec::new();
    for c in samples {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn narrow(x: &[Complex64]) -> impl Iterator<Item = Complex32> + '_ {
    x.iter().map(|c| Complex32::new(c.re as f32, c.im as f32))
}

fn decode(bytes: &[u8]) -> Vec<Complex32> {
    bytes
        .chunks_exact(8)
        .map(|b| {
            let re = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
            let im = f32::from_le_bytes([b[4], b[5], b[6], b[7]]);
            Complex32::new(re, im)
        })
        .collect()
}

fn read_data(path: &Path, length: usize) -> Result<Vec<Complex32>> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let expected = length as u64 * 8;
    if bytes.len() as u64 != expected {
        return Err(StoreError::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    Ok(decode(&bytes))
}

/// Writes `<base>.sigmf-data` (interleaved little-endian f32 I/Q of the impaired
/// samples) and `<base>.sigmf-meta`.
pub fn write_recording(rec: &Recording, meta: &RecordingMeta, base: &Path) -> Result<()> {
    let data_path = with_suffix(base, ".sigmf-data");
    let meta_path = with_suffix(base, ".sigmf-meta");
    let file = MetaFile {
        global: Global {
            datatype: SIGMF_DATATYPE.to_string(),
            sample_rate: meta.mod_params.sample_rate_hz,
            version: SIGMF_VERSION.to_string(),
            extensions: vec![Extension {
                name: NAMESPACE.to_string(),
                version: NAMESPACE_VERSION.to_string(),
                optional: true,
            }],
            scheme: meta.scheme,
            snr_db: meta.snr_db,
            fo_frac: meta.fo_frac,
            mod_params: meta.mod_params.clone(),
            length: meta.length,
            seed: meta.seed,
            dataset_id: meta.dataset_id.clone(),
        },
        captures: vec![Capture { sample_start: 0 }],
        annotations: Vec::new(),
    };
    let json = serde_json::to_vec_pretty(&file).map_err(json_err(&meta_path))?;
    fs::write(&data_path, encode(narrow(&rec.impaired))).map_err(io_err(&data_path))?;
    fs::write(&meta_path, json).map_err(io_err(&meta_path))?;
    Ok(())
}

/// Writes the clean and noise components as `<base>.clean.sigmf-data` and
/// `<base>.noise.sigmf-data`.
pub fn write_components(rec: &Recording, base: &Path) -> Result<()> {
    for (suffix, buf) in [(".clean.sigmf-data", &rec.clean), (".noise.sigmf-data", &rec.noise)] {
        let path = with_suffix(base, suffix);
        fs::write(&path, encode(narrow(buf))).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Reads the `(clean, noise)` sidecars written by [`write_components`].
pub fn read_components(base: &Path, length: usize) -> Result<(Vec<Complex32>, Vec<Complex32>)> {
    let clean = read_data(&with_suffix(base, ".clean.sigmf-data"), length)?;
    let noise = read_data(&with_suffix(base, ".noise.sigmf-data"), length)?;
    Ok((clean, noise))
}

/// Inverse of [`write_recording`].
pub fn read_recording(base: &Path) -> Result<(Vec<Complex32>, RecordingMeta)> {
    let meta_path = with_suffix(base, ".sigmf-meta");
    let text = fs::read(&meta_path).map_err(io_err(&meta_path))?;
    let value: Value = serde_json::from_slice(&text).map_err(json_err(&meta_path))?;
    let global = value.get("global").ok_or_else(|| StoreError::MissingField {
        path: meta_path.clone(),
        field: "global".to_string(),
    })?;
    for field in REQUIRED_FIELDS {
        if global.get(field).is_none() {
            return Err(StoreError::MissingField { path: meta_path, field: field.to_string() });
        }
    }
    let file: MetaFile = serde_json::from_value(value).map_err(json_err(&meta_path))?;
    let g = file.global;
    if g.datatype != SIGMF_DATATYPE {
        return Err(StoreError::DatatypeMismatch {
            path: meta_path,
            found: g.datatype,
            expected: SIGMF_DATATYPE,
        });
    }
    let samples = read_data(&with_suffix(base, ".sigmf-data"), g.length)?;
    let meta = RecordingMeta {
        scheme: g.scheme,
        snr_db: g.snr_db,
        fo_frac: g.fo_frac,
        mod_params: g.mod_params,
        length: g.length,
        seed: g.seed,
        dataset_id: g.dataset_id,
    };
    Ok((samples, meta))
}
