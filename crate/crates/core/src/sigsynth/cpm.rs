use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::filters::design_gaussian;
use super::{invalid, CleanSignal, ModParams, PulseShape, Result, MIN_SAMPLES};
use crate::scheme::{Family, Scheme};

/// Binary CPFSK with tones at +-spacing/2, driven by random symbols.
pub fn gen_cpm<R: Rng + ?Sized>(
    scheme: Scheme,
    params: &ModParams,
    num_symbols: usize,
    rng: &mut R,
) -> Result<CleanSignal> {
    let guard = guard_symbols(params);
    let bits: Vec<f64> = (0..num_symbols + 2 * guard)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    modulate_cpm(scheme, params, &bits)
}

fn guard_symbols(params: &ModParams) -> usize {
    match params.pulse_shape {
        PulseShape::Gaussian => params.symbol_overlap.unwrap_or(0) as usize,
        _ => 0,
    }
}

/// Modulates a +-1 symbol stream. For Gaussian shaping the first and last
/// `symbol_overlap` symbols only warm up the filter and fall outside the capture.
pub fn modulate_cpm(scheme: Scheme, params: &ModParams, bits: &[f64]) -> Result<CleanSignal> {
    if scheme.family() != Family::Cpm {
        return invalid(format!("{scheme} is not a CPM scheme"));
    }
    let spacing = params
        .carrier_spacing_hz
        .ok_or_else(|| super::SynthError::InvalidParameter(format!("{scheme} needs a carrier spacing")))?;
    if spacing >= params.sample_rate_hz / 2.0 {
        return invalid(format!(
            "carrier spacing {spacing} Hz must be below half the sample rate {} Hz",
            params.sample_rate_hz
        ));
    }
    params.validate(scheme)?;
    let sps = params.sps as usize;
    let guard = guard_symbols(params);
    if bits.len() < 2 * guard || (bits.len() - 2 * guard) * sps < MIN_SAMPLES {
        return invalid(format!("{} symbols is too short a CPM burst", bits.len()));
    }
    let num_symbols = bits.len() - 2 * guard;

    // frequency pulse scaled so a rectangular symbol holds +-1 for its duration
    let total = bits.len() * sps;
    let mut freq = vec![0.0; total];
    match params.pulse_shape {
        PulseShape::Gaussian => {
            let taps = design_gaussian(
                params.beta.expect("validated"),
                params.symbol_overlap.expect("validated"),
                params.sps,
            )?;
            let c = taps.center() as isize;
            for (j, b) in bits.iter().enumerate() {
                for (k, t) in taps.taps.iter().enumerate() {
                    let n = (j * sps) as isize + k as isize - c;
                    if n >= 0 && (n as usize) < total {
                        freq[n as usize] += b * t * sps as f64;
                    }
                }
            }
        }
        _ => {
            for (j, b) in bits.iter().enumerate() {
                freq[j * sps..(j + 1) * sps].iter_mut().for_each(|f| *f = *b);
            }
        }
    }

    let half_dev = PI * spacing / params.sample_rate_hz;
    let start = guard * sps;
    let mut phase = 0.0f64;
    let mut samples = Vec::with_capacity(num_symbols * sps);
    for f in &freq[..start + num_symbols * sps] {
        samples.push(Complex64::from_polar(1.0, phase));
        phase = (phase + half_dev * f) % (2.0 * PI);
    }
    let samples = samples.split_off(start);

    Ok(CleanSignal {
        samples,
        scheme,
        sps: params.sps,
        params: params.clone(),
        symbols: bits[guard..guard + num_symbols].iter().map(|&b| Complex64::new(b, 0.0)).collect(),
    })
}
