use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{invalid, Result};

/// Real FIR taps with `2 * overlap * sps + 1` coefficients, centered on the middle tap.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTaps {
    pub taps: Vec<f64>,
    pub sps: u32,
    pub overlap: u32,
}

impl FilterTaps {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn center(&self) -> usize {
        self.taps.len() / 2
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }
}

// Residual ISI of the truncated prototype is pulled toward zero by a regularized
// Gauss-Newton projection; the weight keeps the taps close to the analytic RRC.
const ISI_REGULARIZATION: f64 = 1e-4;
const ISI_MAX_ITERS: usize = 500;

fn rrc_value(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let four_bt = 4.0 * beta * t;
    if (four_bt.abs() - 1.0).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta / SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + four_bt * (PI * t * (1.0 + beta)).cos();
    num / (PI * t * (1.0 - four_bt * four_bt))
}

fn normalize_energy(taps: &mut [f64]) {
    let e: f64 = taps.iter().map(|t| t * t).sum();
    let g = 1.0 / e.sqrt();
    taps.iter_mut().for_each(|t| *t *= g);
}

/// Autocorrelation of `h` at lag `lag`.
fn autocorr(h: &[f64], lag: usize) -> f64 {
    h.iter().zip(&h[lag.min(h.len())..]).map(|(a, b)| a * b).sum()
}

fn expand_symmetric(half: &DVector<f64>, m: usize) -> Vec<f64> {
    let mut h = vec![0.0; 2 * m + 1];
    for i in 0..=m {
        h[m + i] = half[i];
        h[m - i] = half[i];
    }
    h
}

fn project_nyquist(proto: &[f64], sps: usize) -> Vec<f64> {
    let m = proto.len() / 2;
    let lags = 2 * m / sps;
    let a0 = DVector::from_iterator(m + 1, proto[m..].iter().copied());
    let mut a = a0.clone();
    for _ in 0..ISI_MAX_ITERS {
        let h = expand_symmetric(&a, m);
        let mut jac = DMatrix::<f64>::zeros(lags + 1, m + 1);
        let mut resid = DVector::<f64>::zeros(lags + 1);
        for k in 0..=lags {
            let s = k * sps;
            resid[k] = autocorr(&h, s) - if k == 0 { 1.0 } else { 0.0 };
            let d = |n: usize| -> f64 {
                let up = if n + s < h.len() { h[n + s] } else { 0.0 };
                let down = if n >= s { h[n - s] } else { 0.0 };
                up + down
            };
            jac[(k, 0)] = d(m);
            for i in 1..=m {
                jac[(k, i)] = d(m + i) + d(m - i);
            }
        }
        let jt = jac.transpose();
        let mut lhs = &jt * &jac;
        for i in 0..=m {
            lhs[(i, i)] += ISI_REGULARIZATION;
        }
        let rhs = &jt * &resid + (&a - &a0) * ISI_REGULARIZATION;
        let Some(step) = lhs.cholesky().map(|c| c.solve(&rhs)) else {
            break;
        };
        a -= &step;
        if step.amax() < 1e-15 {
            break;
        }
    }
    expand_symmetric(&a, m)
}

/// Root-raised-cosine taps whose self-convolution is Nyquist at symbol spacing.
pub fn design_rrc(excess_bandwidth: f64, overlap: u32, sps: u32) -> Result<FilterTaps> {
    if !(excess_bandwidth > 0.0 && excess_bandwidth <= 1.0) {
        return invalid(format!("excess bandwidth {excess_bandwidth} outside (0, 1]"));
    }
    if overlap < 1 {
        return invalid("symbol overlap must be at least 1");
    }
    if sps < 2 {
        return invalid(format!("RRC needs at least 2 samples per symbol, got {sps}"));
    }
    let m = (overlap * sps) as i64;
    let mut proto: Vec<f64> = (-m..=m)
        .map(|n| rrc_value(n as f64 / sps as f64, excess_bandwidth))
        .collect();
    normalize_energy(&mut proto);
    let mut taps = project_nyquist(&proto, sps as usize);
    normalize_energy(&mut taps);
    Ok(FilterTaps { taps, sps, overlap })
}

fn gauss_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Gaussian-smoothed rectangular frequency pulse with bandwidth-time product `beta`.
///
/// Taps sum to one, the area of a rectangular pulse of `sps` taps valued `1 / sps`,
/// so both shapes accrue the same phase per symbol.
pub fn design_gaussian(beta: f64, overlap: u32, sps: u32) -> Result<FilterTaps> {
    if !(beta > 0.0 && beta < 1.0) {
        return invalid(format!("Gaussian beta {beta} outside (0, 1)"));
    }
    if overlap < 1 || sps < 1 {
        return invalid("Gaussian pulse needs overlap >= 1 and sps >= 1");
    }
    let m = (overlap * sps) as i64;
    let k = 2.0 * PI * beta / 2f64.ln().sqrt();
    let mut taps: Vec<f64> = (-m..=m)
        .map(|n| {
            let t = n as f64 / sps as f64;
            gauss_q(k * (t - 0.5)) - gauss_q(k * (t + 0.5))
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(FilterTaps { taps, sps, overlap })
}

/// Hamming-windowed sinc lowpass with unit DC gain. `cutoff` is a fraction of the sample rate.
pub fn lowpass(cutoff: f64, half_len: usize) -> Vec<f64> {
    let n = 2 * half_len + 1;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 - half_len as f64;
            let sinc = if t == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * t).sin() / (PI * t)
            };
            let w = 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
            sinc * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Convolution of `x` with centered real `taps`, cropped to `x.len()` samples.
pub fn convolve_same(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let half = taps.len() / 2;
    (0..x.len())
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &t) in taps.iter().enumerate() {
                // x index n + half - j
                let idx = n as isize + half as isize - j as isize;
                if idx >= 0 && (idx as usize) < x.len() {
                    acc += x[idx as usize] * t;
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symbol_lag_response(taps: &[f64], sps: usize) -> (f64, f64) {
        let len = taps.len();
        let full: Vec<f64> = (0..2 * len - 1)
            .map(|n| {
                (0..len)
                    .filter(|&j| n >= j && n - j < len)
                    .map(|j| taps[j] * taps[n - j])
                    .sum()
            })
            .collect();
        let mid = full.len() / 2;
        let mut worst: f64 = 0.0;
        let mut k = sps;
        while k <= mid {
            worst = worst.max(full[mid + k].abs()).max(full[mid - k].abs());
            k += sps;
        }
        (full[mid], worst)
    }

    #[test]
    fn rrc_length_and_energy() {
        let f = design_rrc(0.35, 4, 3).unwrap();
        assert_eq!(f.len(), 25);
        assert!((f.energy() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rrc_symmetric() {
        let f = design_rrc(0.5, 3, 2).unwrap();
        let n = f.len();
        for i in 0..n {
            assert_eq!(f.taps[i], f.taps[n - 1 - i]);
        }
    }

    #[test]
    fn rrc_isi_at_symbol_lags() {
        let f = design_rrc(0.35, 5, 2).unwrap();
        let (center, worst) = symbol_lag_response(&f.taps, 2);
        assert!((center - 1.0).abs() < 1e-9, "center {center}");
        assert!(worst <= 1e-3, "worst ISI {worst}");
    }

    #[test]
    fn truncated_prototype_alone_misses_the_isi_target() {
        // The correction step is load-bearing: the raw truncated RRC is above 1e-3.
        let m = 10i64;
        let mut proto: Vec<f64> = (-m..=m).map(|n| rrc_value(n as f64 / 2.0, 0.35)).collect();
        normalize_energy(&mut proto);
        let (_, worst) = symbol_lag_response(&proto, 2);
        assert!(worst > 1e-3);
    }

    #[test]
    fn rrc_stays_close_to_prototype() {
        let f = design_rrc(0.5, 4, 3).unwrap();
        let m = 12i64;
        let mut proto: Vec<f64> = (-m..=m).map(|n| rrc_value(n as f64 / 3.0, 0.5)).collect();
        normalize_energy(&mut proto);
        let dev = f.taps.iter().zip(&proto).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 0.03, "deviation {dev}");
    }

    #[test]
    fn rrc_rejects_bad_params() {
        assert!(design_rrc(0.35, 0, 2).is_err());
        assert!(design_rrc(0.35, 3, 0).is_err());
        assert!(design_rrc(0.0, 3, 2).is_err());
        assert!(design_rrc(1.2, 3, 2).is_err());
    }

    #[test]
    fn gaussian_shape() {
        let g = design_gaussian(0.3, 2, 2).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.taps.iter().all(|&t| t > 0.0));
        for i in 0..9 {
            assert!((g.taps[i] - g.taps[8 - i]).abs() < 1e-15);
        }
        let g = design_gaussian(0.5, 4, 3).unwrap();
        let sum: f64 = g.taps.iter().sum();
        // rectangular pulse: sps taps of 1/sps
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(design_gaussian(1.0, 2, 2).is_err());
        assert!(design_gaussian(0.0, 2, 2).is_err());
    }

    fn three_db_width(taps: &[f64]) -> f64 {
        // magnitude response on a dense grid, normalized to DC
        let dc: f64 = taps.iter().sum();
        let n = 8192;
        for i in 0..n / 2 {
            let f = i as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (k, &t) in taps.iter().enumerate() {
                let ph = -2.0 * PI * f * k as f64;
                re += t * ph.cos();
                im += t * ph.sin();
            }
            if (re * re + im * im).sqrt() / dc < 1.0 / SQRT_2 {
                return f;
            }
        }
        0.5
    }

    #[test]
    fn smaller_beta_is_narrower() {
        let narrow = design_gaussian(0.4, 3, 3).unwrap();
        let wide = design_gaussian(0.5, 3, 3).unwrap();
        assert!(three_db_width(&narrow.taps) < three_db_width(&wide.taps));
    }

    #[test]
    fn lowpass_unit_dc() {
        let h = lowpass(0.1, 32);
        assert_eq!(h.len(), 65);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convolve_same_identity() {
        let x: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        assert_eq!(convolve_same(&x, &[0.0, 1.0, 0.0]), x);
    }
}
