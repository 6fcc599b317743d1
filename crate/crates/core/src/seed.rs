//! Stable seed derivation for independent random streams.

use sha2::{Digest, Sha256};

/// Derives a child seed from a base seed and a list of labels.
///
/// The mapping is stable across platforms and releases, so recorded seeds
/// keep reproducing the same streams.
pub fn derive_seed(base: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}
