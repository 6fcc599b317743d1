//! Clean complex-baseband signal synthesis and channel impairments.
//!
//! Every generator takes an explicit random stream, so a recording is a pure
//! function of its seed and parameters. Buffers are `f64` complex; they are
//! narrowed to `f32` only when written to disk.

mod analog;
mod cpm;
mod filters;
mod impair;
mod linear;
mod params;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub use analog::{gen_analog, modulate_analog, synth_message, MESSAGE_BANDWIDTH};
pub use cpm::{gen_cpm, modulate_cpm};
pub use filters::{convolve_same, design_gaussian, design_rrc, lowpass, FilterTaps};
pub use impair::{apply_impairments, gen_awgn, measure_snr, ImpairmentParams, Recording};
pub use linear::{constellation, gen_linear};
pub use params::{ModParams, PulseShape, DEFAULT_SAMPLE_RATE_HZ};

use crate::scheme::{Family, Scheme};

/// Minimum number of samples any generated capture may have.
pub const MIN_SAMPLES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("undefined SNR: noise energy is zero")]
    UndefinedSnr,
    #[error("length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),
}

pub type Result<T, E = SynthError> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SynthError::InvalidParameter(msg.into()))
}

/// A noise-free generated capture.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanSignal {
    pub samples: Vec<Complex64>,
    pub scheme: Scheme,
    pub sps: u32,
    pub params: ModParams,
    /// Transmitted symbol values; symbol `k` is aligned with sample `k * sps`.
    /// Empty for analog and noise captures.
    pub symbols: Vec<Complex64>,
}

impl CleanSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum()
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        energy(x) / x.len() as f64
    }
}

pub(crate) fn normalize_power(x: &mut [Complex64]) {
    let p = mean_power(x);
    if p > 0.0 {
        let g = 1.0 / p.sqrt();
        for v in x.iter_mut() {
            *v *= g;
        }
    }
}

/// Generates exactly `num_samples` clean samples of any scheme.
pub fn generate<R: Rng + ?Sized>(
    scheme: Scheme,
    params: &ModParams,
    num_samples: usize,
    rng: &mut R,
) -> Result<CleanSignal> {
    if num_samples < MIN_SAMPLES {
        return invalid(format!("{num_samples} samples requested, need at least {MIN_SAMPLES}"));
    }
    let sps = params.sps.max(1) as usize;
    let num_symbols = num_samples.div_ceil(sps);
    let mut sig = match scheme.family() {
        Family::Linear => gen_linear(scheme, params, num_symbols, rng)?,
        Family::Cpm => gen_cpm(scheme, params, num_symbols, rng)?,
        Family::Analog => gen_analog(scheme, params, num_samples, rng)?,
        Family::Noise => gen_awgn(num_samples, rng)?,
    };
    if sig.samples.len() > num_samples {
        sig.samples.truncate(num_samples);
        sig.symbols.truncate(num_samples.div_ceil(sps));
        if scheme.family() == Family::Linear {
            normalize_power(&mut sig.samples);
        }
    }
    Ok(sig)
}
