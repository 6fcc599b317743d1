use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{energy, invalid, CleanSignal, ModParams, Result, SynthError, MIN_SAMPLES};
use crate::scheme::Scheme;

/// Transmitter/receiver offsets and the target SNR of one capture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentParams {
    /// Frequency offset as a fraction of the sample rate.
    pub fo_frac: f64,
    pub phase_offset_rad: f64,
    pub gain: f64,
    /// Target SNR; `f64::INFINITY` disables the noise entirely.
    pub snr_db: f64,
}

impl ImpairmentParams {
    /// Unit gain and zero phase offset, as used for every generated capture.
    pub fn new(fo_frac: f64, snr_db: f64) -> Self {
        ImpairmentParams { fo_frac, phase_offset_rad: 0.0, gain: 1.0, snr_db }
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, f64::INFINITY)
    }
}

/// Impaired capture together with its clean and noise components.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub impaired: Vec<Complex64>,
    pub clean: Vec<Complex64>,
    pub noise: Vec<Complex64>,
    pub scheme: Scheme,
    pub params: ModParams,
    pub impairments: ImpairmentParams,
}

impl Recording {
    pub fn len(&self) -> usize {
        self.impaired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.impaired.is_empty()
    }
}

fn circular_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// i.i.d. circular complex Gaussian samples with `E|v|^2 = 1`.
pub fn gen_awgn<R: Rng + ?Sized>(num_samples: usize, rng: &mut R) -> Result<CleanSignal> {
    if num_samples < MIN_SAMPLES {
        return invalid(format!("{num_samples} samples requested, need at least {MIN_SAMPLES}"));
    }
    Ok(CleanSignal {
        samples: (0..num_samples).map(|_| circular_normal(rng)).collect(),
        scheme: Scheme::Awgn,
        sps: 1,
        params: ModParams::noise(),
        symbols: Vec::new(),
    })
}

/// `10 log10(sum |s - v|^2 / sum |v|^2)` given `s - v` and `v`.
pub fn measure_snr(signal_minus_noise: &[Complex64], noise: &[Complex64]) -> Result<f64> {
    if signal_minus_noise.len() != noise.len() {
        return Err(SynthError::LengthMismatch(signal_minus_noise.len(), noise.len()));
    }
    let en = energy(noise);
    if en == 0.0 {
        return Err(SynthError::UndefinedSnr);
    }
    Ok(10.0 * (energy(signal_minus_noise) / en).log10())
}

/// Applies gain, phase and frequency offset, then adds noise scaled so the
/// realized SNR of this capture equals `imp.snr_db`.
pub fn apply_impairments<R: Rng + ?Sized>(
    clean: CleanSignal,
    imp: ImpairmentParams,
    rng: &mut R,
) -> Result<Recording> {
    if imp.snr_db.is_nan() || imp.snr_db == f64::NEG_INFINITY {
        return invalid(format!("SNR {} dB is not usable", imp.snr_db));
    }
    let identity = imp.fo_frac == 0.0 && imp.phase_offset_rad == 0.0 && imp.gain == 1.0;
    let rotated: Vec<Complex64> = if identity {
        clean.samples.clone()
    } else {
        clean
            .samples
            .iter()
            .enumerate()
            .map(|(t, &c)| {
                let ph = 2.0 * PI * imp.fo_frac * t as f64 + imp.phase_offset_rad;
                c * Complex64::from_polar(imp.gain, ph)
            })
            .collect()
    };

    let n = rotated.len();
    let (impaired, noise) = if imp.snr_db == f64::INFINITY {
        (rotated, vec![Complex64::new(0.0, 0.0); n])
    } else {
        let mut noise: Vec<Complex64> = (0..n).map(|_| circular_normal(rng)).collect();
        let es = energy(&rotated);
        let en = energy(&noise);
        let scale = (es / (en * 10f64.powf(imp.snr_db / 10.0))).sqrt();
        noise.iter_mut().for_each(|v| *v *= scale);
        let impaired = rotated.iter().zip(&noise).map(|(s, v)| s + v).collect();
        (impaired, noise)
    };

    Ok(Recording {
        impaired,
        clean: clean.samples,
        noise,
        scheme: clean.scheme,
        params: clean.params,
        impairments: imp,
    })
}
