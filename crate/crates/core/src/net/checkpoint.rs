use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AdamState, Model, ModelConfig, NetError, Params, Result};
use crate::scheme::Scheme;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"RFTLCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

/// A model snapshot with the optimizer state it was saved with.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub optimizer: AdamState,
    pub epoch: usize,
    pub val_loss: f64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    class_list: Vec<Scheme>,
    epoch: usize,
    val_loss: f64,
    adam_step: u64,
    tensor_lens: Vec<usize>,
}

fn push_tensor(out: &mut Vec<u8>, t: &[f32]) {
    for v in t {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Layout: magic, version (u32 LE), header length (u32 LE), JSON header,
/// weights, first moments, second moments (each in tensor order, f32 LE),
/// then a SHA-256 of everything before it.
pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = Header {
        config: ckpt.model.config.clone(),
        class_list: ckpt.model.class_list.clone(),
        epoch: ckpt.epoch,
        val_loss: ckpt.val_loss,
        adam_step: ckpt.optimizer.step,
        tensor_lens: ckpt.model.config.tensor_lens().to_vec(),
    };
    let json = serde_json::to_vec(&header).expect("header always serializes");
    let mut out = Vec::with_capacity(64 + json.len() + 12 * ckpt.model.params.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in [&ckpt.model.params, &ckpt.optimizer.m, &ckpt.optimizer.v] {
        for t in p.tensors() {
            push_tensor(&mut out, t);
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| NetError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, out).map_err(|source| NetError::Io { path: path.to_path_buf(), source })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| NetError::Io { path: path.to_path_buf(), source })?;
    let corrupt = |reason: &str| NetError::Corrupt { path: path.to_path_buf(), reason: reason.to_string() };
    if bytes.len() < 16 + DIGEST_LEN || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(NetError::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(corrupt("checksum mismatch"));
    }
    let hlen = u32::from_le_bytes(body[12..16].try_into().unwrap()) as usize;
    let json = body.get(16..16 + hlen).ok_or_else(|| corrupt("header overruns file"))?;
    let header: Header = serde_json::from_slice(json).map_err(|e| corrupt(&e.to_string()))?;
    header.config.validate()?;
    if header.tensor_lens != header.config.tensor_lens() || header.class_list.len() != header.config.n_classes {
        return Err(corrupt("tensor shapes disagree with the config"));
    }

    let mut cursor = &body[16 + hlen..];
    let mut read = || -> Result<Params> {
        let mut p = Params::zeros(&header.config);
        for t in p.tensors_mut() {
            let n = t.len() * 4;
            if cursor.len() < n {
                return Err(corrupt("truncated tensor data"));
            }
            let (head, rest) = cursor.split_at(n);
            for (v, b) in t.iter_mut().zip(head.chunks_exact(4)) {
                *v = f32::from_le_bytes(b.try_into().unwrap());
            }
            cursor = rest;
        }
        Ok(p)
    };
    let params = read()?;
    let m = read()?;
    let v = read()?;
    if !cursor.is_empty() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(Checkpoint {
        model: Model { config: header.config, class_list: header.class_list, params },
        optimizer: AdamState { m, v, step: header.adam_step },
        epoch: header.epoch,
        val_loss: header.val_loss,
    })
}
