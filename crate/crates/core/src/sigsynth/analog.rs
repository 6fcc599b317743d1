use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::filters::lowpass;
use super::{invalid, normalize_power, CleanSignal, ModParams, Result, MIN_SAMPLES};
use crate::scheme::{Family, Scheme};

/// Bandwidth of the synthetic message as a fraction of the sample rate.
pub const MESSAGE_BANDWIDTH: f64 = 0.1;
const MESSAGE_FILTER_HALF_LEN: usize = 32;

/// Unit-power Gaussian message lowpassed to [`MESSAGE_BANDWIDTH`].
pub fn synth_message<R: Rng + ?Sized>(num_samples: usize, rng: &mut R) -> Vec<f64> {
    let taps = lowpass(MESSAGE_BANDWIDTH, MESSAGE_FILTER_HALF_LEN);
    let half = MESSAGE_FILTER_HALF_LEN;
    let raw: Vec<f64> = (0..num_samples + 2 * half).map(|_| rng.sample(StandardNormal)).collect();
    let mut msg: Vec<f64> = (0..num_samples)
        .map(|n| taps.iter().enumerate().map(|(k, t)| t * raw[n + 2 * half - k]).sum())
        .collect();
    let p = msg.iter().map(|m| m * m).sum::<f64>() / num_samples as f64;
    if p > 0.0 {
        let g = 1.0 / p.sqrt();
        msg.iter_mut().for_each(|m| *m *= g);
    }
    msg
}

pub fn gen_analog<R: Rng + ?Sized>(
    scheme: Scheme,
    params: &ModParams,
    num_samples: usize,
    rng: &mut R,
) -> Result<CleanSignal> {
    if scheme.family() != Family::Analog {
        return invalid(format!("{scheme} is not an analog scheme"));
    }
    params.validate(scheme)?;
    let msg = synth_message(num_samples, rng);
    modulate_analog(scheme, params, &msg)
}

/// One-sided spectrum of a real message: keeps positive (`upper`) or negative frequencies.
fn single_sideband(msg: &[f64], upper: bool) -> Vec<Complex64> {
    let n = msg.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = msg.iter().map(|&m| Complex64::new(m, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            continue;
        }
        let positive = k < n.div_ceil(2);
        *v *= if positive == upper { 2.0 } else { 0.0 };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Modulates a caller-supplied real message.
///
/// FM integrates `index * MESSAGE_BANDWIDTH * m[n]` cycles per sample. AM-DSB
/// uses the peak-normalized message so `index` is the modulation depth.
pub fn modulate_analog(scheme: Scheme, params: &ModParams, message: &[f64]) -> Result<CleanSignal> {
    if scheme.family() != Family::Analog {
        return invalid(format!("{scheme} is not an analog scheme"));
    }
    params.validate(scheme)?;
    if message.len() < MIN_SAMPLES {
        return invalid(format!("message of {} samples is shorter than {MIN_SAMPLES}", message.len()));
    }
    let index = params.modulation_index.expect("validated");
    let mut samples: Vec<Complex64> = match scheme {
        Scheme::FmNb | Scheme::FmWb => {
            let k = 2.0 * PI * index * MESSAGE_BANDWIDTH;
            let mut phase = 0.0f64;
            message
                .iter()
                .map(|m| {
                    let s = Complex64::from_polar(1.0, phase);
                    phase = (phase + k * m) % (2.0 * PI);
                    s
                })
                .collect()
        }
        Scheme::AmDsb => {
            let peak = message.iter().fold(0.0f64, |a, m| a.max(m.abs()));
            let peak = if peak > 0.0 { peak } else { 1.0 };
            message.iter().map(|m| Complex64::new(1.0 + index * m / peak, 0.0)).collect()
        }
        Scheme::AmDsbsc => message.iter().map(|m| Complex64::new(index * m, 0.0)).collect(),
        Scheme::AmLsb | Scheme::AmUsb => {
            let scaled: Vec<f64> = message.iter().map(|m| index * m).collect();
            single_sideband(&scaled, scheme == Scheme::AmUsb)
        }
        _ => unreachable!("family checked above"),
    };
    normalize_power(&mut samples);
    Ok(CleanSignal {
        samples,
        scheme,
        sps: params.sps,
        params: params.clone(),
        symbols: Vec::new(),
    })
}
