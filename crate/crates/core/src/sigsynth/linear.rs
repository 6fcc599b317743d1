use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::filters::{convolve_same, design_rrc};
use super::{invalid, normalize_power, CleanSignal, ModParams, Result, MIN_SAMPLES};
use crate::scheme::{Family, Scheme};

// DVB-S2 ring ratios for code rate 3/4.
const APSK16_RATIO: f64 = 2.85;
const APSK32_RATIOS: (f64, f64) = (2.84, 5.27);

fn psk(m: usize, offset: f64) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, offset + 2.0 * PI * k as f64 / m as f64))
        .collect()
}

fn square_qam(side: usize) -> Vec<Complex64> {
    let coord = |i: usize| 2.0 * i as f64 - (side as f64 - 1.0);
    let mut pts = Vec::with_capacity(side * side);
    for i in 0..side {
        for q in 0..side {
            pts.push(Complex64::new(coord(i), coord(q)));
        }
    }
    pts
}

fn cross_qam32() -> Vec<Complex64> {
    // 6x6 odd-integer grid with the four (+-5, +-5) corners removed
    square_qam(6)
        .into_iter()
        .filter(|p| !(p.re.abs() == 5.0 && p.im.abs() == 5.0))
        .collect()
}

fn rings(spec: &[(usize, f64, f64)]) -> Vec<Complex64> {
    spec.iter()
        .flat_map(|&(n, radius, offset)| {
            (0..n).map(move |k| Complex64::from_polar(radius, offset + 2.0 * PI * k as f64 / n as f64))
        })
        .collect()
}

fn unit_power(mut pts: Vec<Complex64>) -> Vec<Complex64> {
    let p = pts.iter().map(|c| c.norm_sqr()).sum::<f64>() / pts.len() as f64;
    let g = 1.0 / p.sqrt();
    pts.iter_mut().for_each(|c| *c *= g);
    pts
}

/// Unit-average-power constellation of a linear scheme.
pub fn constellation(scheme: Scheme) -> Result<Vec<Complex64>> {
    use Scheme::*;
    let pts = match scheme {
        Bpsk => psk(2, 0.0),
        Qpsk | Oqpsk => psk(4, PI / 4.0),
        Psk8 => psk(8, 0.0),
        Psk16 => psk(16, 0.0),
        Qam16 => square_qam(4),
        Qam32 => cross_qam32(),
        Qam64 => square_qam(8),
        Apsk16 => rings(&[(4, 1.0, PI / 4.0), (12, APSK16_RATIO, PI / 12.0)]),
        Apsk32 => rings(&[
            (4, 1.0, PI / 4.0),
            (12, APSK32_RATIOS.0, PI / 12.0),
            (16, APSK32_RATIOS.1, 0.0),
        ]),
        _ => return invalid(format!("{scheme} has no linear constellation")),
    };
    Ok(unit_power(pts))
}

/// RRC-shaped linear modulation of `num_symbols` i.i.d. uniform symbols.
///
/// The capture is cut from the middle of a longer burst so that no pulse is
/// truncated by the capture edges.
pub fn gen_linear<R: Rng + ?Sized>(
    scheme: Scheme,
    params: &ModParams,
    num_symbols: usize,
    rng: &mut R,
) -> Result<CleanSignal> {
    if scheme.family() != Family::Linear {
        return invalid(format!("{scheme} is not a linear scheme"));
    }
    params.validate(scheme)?;
    let sps = params.sps as usize;
    if num_symbols * sps < MIN_SAMPLES {
        return invalid(format!(
            "{num_symbols} symbols at {sps} sps is shorter than {MIN_SAMPLES} samples"
        ));
    }
    let overlap = params.symbol_overlap.expect("validated") as usize;
    let taps = design_rrc(params.excess_bandwidth.expect("validated"), overlap as u32, params.sps)?;
    let points = constellation(scheme)?;

    let guard = overlap;
    let total = num_symbols + 2 * guard;
    let drawn: Vec<Complex64> = (0..total).map(|_| points[rng.random_range(0..points.len())]).collect();

    let q_delay = if scheme == Scheme::Oqpsk { sps / 2 } else { 0 };
    let mut impulses = vec![Complex64::new(0.0, 0.0); total * sps];
    for (j, s) in drawn.iter().enumerate() {
        impulses[j * sps].re += s.re;
        let qi = j * sps + q_delay;
        if qi < impulses.len() {
            impulses[qi].im += s.im;
        }
    }
    let shaped = convolve_same(&impulses, &taps.taps);
    let start = guard * sps;
    let mut samples = shaped[start..start + num_symbols * sps].to_vec();
    normalize_power(&mut samples);

    Ok(CleanSignal {
        samples,
        scheme,
        sps: params.sps,
        params: params.clone(),
        symbols: drawn[guard..guard + num_symbols].to_vec(),
    })
}
