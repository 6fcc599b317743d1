use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{invalid, Result};
use crate::scheme::{Family, Scheme};

/// Sample rate used to normalize the Hz-valued carrier spacings.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 250_000.0;

const EXCESS_BANDWIDTHS: [f64; 2] = [0.35, 0.5];
const RRC_OVERLAPS: [u32; 3] = [3, 4, 5];
const GAUSSIAN_OVERLAPS: [u32; 3] = [2, 3, 4];
const BETA_RANGE: (f64, f64) = (0.3, 0.5);
const SPS_CHOICES: [u32; 2] = [2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Rrc,
    Rect,
    Gaussian,
    None,
}

/// Per-scheme generation parameters. `None` marks a field the scheme ignores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModParams {
    pub symbol_order: Option<u32>,
    pub pulse_shape: PulseShape,
    pub excess_bandwidth: Option<f64>,
    pub symbol_overlap: Option<u32>,
    pub beta: Option<f64>,
    pub carrier_spacing_hz: Option<f64>,
    pub modulation_index: Option<f64>,
    pub sample_rate_hz: f64,
    /// Samples per symbol; 1 for captures without a symbol clock.
    pub sps: u32,
}

pub(crate) fn symbol_order(scheme: Scheme) -> Option<u32> {
    use Scheme::*;
    match scheme {
        Bpsk => Some(2),
        Qpsk | Oqpsk => Some(4),
        Psk8 => Some(8),
        Psk16 | Qam16 | Apsk16 => Some(16),
        Qam32 | Apsk32 => Some(32),
        Qam64 => Some(64),
        _ => None,
    }
}

pub(crate) fn carrier_spacing_hz(scheme: Scheme) -> Option<f64> {
    use Scheme::*;
    match scheme {
        Fsk5k | Gfsk5k => Some(5_000.0),
        Fsk75k | Gfsk75k => Some(75_000.0),
        Msk | Gmsk => Some(2_500.0),
        _ => None,
    }
}

pub(crate) fn index_range(scheme: Scheme) -> Option<(f64, f64)> {
    use Scheme::*;
    match scheme {
        FmNb => Some((0.05, 0.4)),
        FmWb => Some((0.825, 1.88)),
        AmDsb | AmDsbsc | AmLsb | AmUsb => Some((0.5, 0.9)),
        _ => None,
    }
}

fn is_gaussian(scheme: Scheme) -> bool {
    matches!(scheme, Scheme::Gfsk5k | Scheme::Gfsk75k | Scheme::Gmsk)
}

fn pick<T: Copy, R: Rng + ?Sized>(rng: &mut R, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

impl ModParams {
    fn blank(sample_rate_hz: f64) -> Self {
        ModParams {
            symbol_order: None,
            pulse_shape: PulseShape::None,
            excess_bandwidth: None,
            symbol_overlap: None,
            beta: None,
            carrier_spacing_hz: None,
            modulation_index: None,
            sample_rate_hz,
            sps: 1,
        }
    }

    /// RRC-shaped linear scheme parameters.
    pub fn linear(scheme: Scheme, excess_bandwidth: f64, overlap: u32, sps: u32) -> Self {
        ModParams {
            symbol_order: symbol_order(scheme),
            pulse_shape: PulseShape::Rrc,
            excess_bandwidth: Some(excess_bandwidth),
            symbol_overlap: Some(overlap),
            sps,
            ..Self::blank(DEFAULT_SAMPLE_RATE_HZ)
        }
    }

    /// CPM parameters; `beta` and `overlap` are ignored for rectangular schemes.
    pub fn cpm(scheme: Scheme, beta: f64, overlap: u32, sps: u32, sample_rate_hz: f64) -> Self {
        let gaussian = is_gaussian(scheme);
        ModParams {
            pulse_shape: if gaussian { PulseShape::Gaussian } else { PulseShape::Rect },
            symbol_overlap: Some(if gaussian { overlap } else { 1 }),
            beta: gaussian.then_some(beta),
            carrier_spacing_hz: carrier_spacing_hz(scheme),
            sps,
            ..Self::blank(sample_rate_hz)
        }
    }

    pub fn analog(modulation_index: f64) -> Self {
        ModParams {
            modulation_index: Some(modulation_index),
            ..Self::blank(DEFAULT_SAMPLE_RATE_HZ)
        }
    }

    pub fn noise() -> Self {
        Self::blank(DEFAULT_SAMPLE_RATE_HZ)
    }

    /// Draws every field uniformly from the scheme's parameter space.
    pub fn sample<R: Rng + ?Sized>(scheme: Scheme, sample_rate_hz: f64, rng: &mut R) -> Self {
        let mut p = match scheme.family() {
            Family::Linear => {
                let eb = pick(rng, &EXCESS_BANDWIDTHS);
                let ov = pick(rng, &RRC_OVERLAPS);
                let sps = pick(rng, &SPS_CHOICES);
                Self::linear(scheme, eb, ov, sps)
            }
            Family::Cpm => {
                let sps = pick(rng, &SPS_CHOICES);
                if is_gaussian(scheme) {
                    let ov = pick(rng, &GAUSSIAN_OVERLAPS);
                    let beta = rng.random_range(BETA_RANGE.0..=BETA_RANGE.1);
                    Self::cpm(scheme, beta, ov, sps, sample_rate_hz)
                } else {
                    Self::cpm(scheme, 0.0, 1, sps, sample_rate_hz)
                }
            }
            Family::Analog => {
                let (lo, hi) = index_range(scheme).expect("analog schemes carry an index range");
                Self::analog(rng.random_range(lo..=hi))
            }
            Family::Noise => Self::noise(),
        };
        p.sample_rate_hz = sample_rate_hz;
        p
    }

    /// Checks that every field lies in the scheme's parameter space.
    pub fn validate(&self, scheme: Scheme) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return invalid(format!("sample rate {} must be positive", self.sample_rate_hz));
        }
        match scheme.family() {
            Family::Linear => {
                if self.pulse_shape != PulseShape::Rrc {
                    return invalid(format!("{scheme} requires an RRC pulse"));
                }
                if self.symbol_order != symbol_order(scheme) {
                    return invalid(format!("{scheme} symbol order {:?}", self.symbol_order));
                }
                let eb = self.excess_bandwidth.unwrap_or(f64::NAN);
                if !EXCESS_BANDWIDTHS.contains(&eb) {
                    return invalid(format!("{scheme} excess bandwidth {eb} not in {{0.35, 0.5}}"));
                }
                let ov = self.symbol_overlap.unwrap_or(0);
                if !RRC_OVERLAPS.contains(&ov) {
                    return invalid(format!("{scheme} symbol overlap {ov} not in [3, 5]"));
                }
                if !SPS_CHOICES.contains(&self.sps) {
                    return invalid(format!("{scheme} sps {} not in {{2, 3}}", self.sps));
                }
            }
            Family::Cpm => {
                if self.carrier_spacing_hz != carrier_spacing_hz(scheme) {
                    return invalid(format!("{scheme} carrier spacing {:?}", self.carrier_spacing_hz));
                }
                if !SPS_CHOICES.contains(&self.sps) {
                    return invalid(format!("{scheme} sps {} not in {{2, 3}}", self.sps));
                }
                if is_gaussian(scheme) {
                    let beta = self.beta.unwrap_or(f64::NAN);
                    if !(BETA_RANGE.0..=BETA_RANGE.1).contains(&beta) {
                        return invalid(format!("{scheme} beta {beta} not in [0.3, 0.5]"));
                    }
                    let ov = self.symbol_overlap.unwrap_or(0);
                    if !GAUSSIAN_OVERLAPS.contains(&ov) {
                        return invalid(format!("{scheme} symbol overlap {ov} not in {{2, 3, 4}}"));
                    }
                } else if self.symbol_overlap != Some(1) || self.pulse_shape != PulseShape::Rect {
                    return invalid(format!("{scheme} requires a rectangular pulse of overlap 1"));
                }
            }
            Family::Analog => {
                let (lo, hi) = index_range(scheme).expect("analog range");
                let idx = self.modulation_index.unwrap_or(f64::NAN);
                if !(lo..=hi).contains(&idx) {
                    return invalid(format!("{scheme} modulation index {idx} not in [{lo}, {hi}]"));
                }
            }
            Family::Noise => {}
        }
        Ok(())
    }
}
