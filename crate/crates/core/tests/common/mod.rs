//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;

use num_complex::Complex64;
use rftl::datastore::{build_master, Manifest, MasterSpec};
use rftl::net::Model;
use rftl::Scheme;
use rustfft::FftPlanner;

/// Forward FFT of `x`, zero-padded or truncated to `n` points.
pub fn fft(x: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().copied().take(n).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

pub fn peak_bin(spec: &[Complex64]) -> usize {
    let mut best = 0;
    for (i, v) in spec.iter().enumerate() {
        if v.norm_sqr() > spec[best].norm_sqr() {
            best = i;
        }
    }
    best
}

/// Circular distance between FFT bins.
pub fn bin_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// Direct-form matched filter: correlates `x` with symmetric `taps` centred on each sample.
pub fn matched_filter(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let c = taps.len() / 2;
    (0..x.len())
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &h) in taps.iter().enumerate() {
                let idx = n as isize + k as isize - c as isize;
                if idx >= 0 && (idx as usize) < x.len() {
                    acc += x[idx as usize] * h;
                }
            }
            acc
        })
        .collect()
}

pub fn nearest(points: &[Complex64], y: Complex64) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if (p - y).norm_sqr() < (points[best] - y).norm_sqr() {
            best = i;
        }
    }
    best
}

/// `f64` forward pass with naive loops, dropout off. Returns the mean
/// cross-entropy over the batch for a flat parameter vector laid out in
/// tensor order.
pub struct NaiveNet {
    pub k1: usize,
    pub k2: usize,
    pub h: usize,
    pub n: usize,
    pub w1: usize,
    pub w2: usize,
    pub len: usize,
}

impl NaiveNet {
    pub fn of(model: &Model) -> Self {
        let c = &model.config;
        NaiveNet { k1: c.k1(), k2: c.k2(), h: c.h(), n: c.n_classes, w1: c.w1(), w2: c.w2(), len: c.input_len }
    }

    pub fn sizes(&self) -> [usize; 8] {
        let t2 = self.len + 2 - self.w1 - self.w2;
        [
            self.k1 * self.w1,
            self.k1,
            self.k2 * self.k1 * 2 * self.w2,
            self.k2,
            self.h * self.k2 * t2,
            self.h,
            self.n * self.h,
            self.n,
        ]
    }

    pub fn loss(&self, p: &[f64], x: &[f32], labels: &[usize]) -> f64 {
        self.loss_gated(p, x, labels, None).0
    }

    /// Like `loss`, also returning every ReLU on/off decision in evaluation
    /// order. With `gates` given, those decisions are replayed instead of
    /// recomputed, so the loss is evaluated on one linear piece of the network.
    pub fn loss_gated(&self, p: &[f64], x: &[f32], labels: &[usize], gates: Option<&[bool]>) -> (f64, Vec<bool>) {
        let mut seen = Vec::new();
        let mut relu = |z: f64| {
            let on = match gates {
                Some(g) => g[seen.len()],
                None => z > 0.0,
            };
            seen.push(on);
            if on { z } else { 0.0 }
        };
        let s = self.sizes();
        let mut off = [0usize; 8];
        for i in 1..8 {
            off[i] = off[i - 1] + s[i - 1];
        }
        let (w1, b1, w2, b2, w3, b3, w4, b4) = (
            &p[off[0]..],
            &p[off[1]..],
            &p[off[2]..],
            &p[off[3]..],
            &p[off[4]..],
            &p[off[5]..],
            &p[off[6]..],
            &p[off[7]..],
        );
        let t1 = self.len + 1 - self.w1;
        let t2 = t1 + 1 - self.w2;
        let mut total = 0.0;
        for (b, &y) in labels.iter().enumerate() {
            let xin = |r: usize, t: usize| x[b * 2 * self.len + r * self.len + t] as f64;
            let mut a1 = vec![0.0; self.k1 * 2 * t1];
            for k in 0..self.k1 {
                for r in 0..2 {
                    for t in 0..t1 {
                        let mut z = b1[k];
                        for j in 0..self.w1 {
                            z += w1[k * self.w1 + j] * xin(r, t + j);
                        }
                        a1[(k * 2 + r) * t1 + t] = relu(z);
                    }
                }
            }
            let mut a2 = vec![0.0; self.k2 * t2];
            for k in 0..self.k2 {
                for t in 0..t2 {
                    let mut z = b2[k];
                    for c in 0..self.k1 {
                        for r in 0..2 {
                            for j in 0..self.w2 {
                                z += w2[((k * self.k1 + c) * 2 + r) * self.w2 + j] * a1[(c * 2 + r) * t1 + t + j];
                            }
                        }
                    }
                    a2[k * t2 + t] = relu(z);
                }
            }
            let f = self.k2 * t2;
            let mut a3 = vec![0.0; self.h];
            for u in 0..self.h {
                let mut z = b3[u];
                for i in 0..f {
                    z += w3[u * f + i] * a2[i];
                }
                a3[u] = relu(z);
            }
            let mut logits = vec![0.0; self.n];
            for o in 0..self.n {
                let mut z = b4[o];
                for u in 0..self.h {
                    z += w4[o * self.h + u] * a3[u];
                }
                logits[o] = z;
            }
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
            total += lse - logits[y];
        }
        (total / labels.len() as f64, seen)
    }
}

/// Result of comparing analytic gradients against central differences.
pub struct GradCheck {
    pub checked: usize,
    pub agreeing: usize,
    pub per_tensor: [usize; 8],
    pub worst: f64,
}

/// Compares `analytic` (flat, tensor order) against central differences of
/// the naive oracle at `samples` indices per tensor. With `hold_gates` the
/// ReLU pattern of the unperturbed point is kept for both probes, so a probe
/// that straddles a kink measures the local slope rather than a chord.
pub fn grad_check(
    net: &NaiveNet,
    params: &[f64],
    analytic: &[f64],
    x: &[f32],
    labels: &[usize],
    eps: f64,
    rel_tol: f64,
    samples: usize,
    hold_gates: bool,
) -> GradCheck {
    let gates = net.loss_gated(params, x, labels, None).1;
    let gates = hold_gates.then_some(gates.as_slice());
    let sizes = net.sizes();
    let mut off = 0;
    let mut out = GradCheck { checked: 0, agreeing: 0, per_tensor: [0; 8], worst: 0.0 };
    let mut p = params.to_vec();
    for (ti, &sz) in sizes.iter().enumerate() {
        let stride = (sz / samples).max(1);
        for idx in (0..sz).step_by(stride).take(samples) {
            let i = off + idx;
            let orig = p[i];
            p[i] = orig + eps;
            let lp = net.loss_gated(&p, x, labels, gates).0;
            p[i] = orig - eps;
            let lm = net.loss_gated(&p, x, labels, gates).0;
            p[i] = orig;
            let num = (lp - lm) / (2.0 * eps);
            let ana = analytic[i];
            let scale = num.abs().max(ana.abs());
            let rel = if scale == 0.0 { 0.0 } else { (num - ana).abs() / scale };
            out.checked += 1;
            out.per_tensor[ti] += 1;
            if rel <= rel_tol {
                out.agreeing += 1;
            } else {
                out.worst = out.worst.max(rel);
            }
        }
        off += sz;
    }
    out
}

/// Builds a master with `per_class` recordings of `length` samples for `schemes`.
pub fn small_master(dir: &Path, schemes: &[Scheme], per_class: usize, length: usize, seed: u64) -> Manifest {
    let mut spec = MasterSpec::new(per_class, seed);
    spec.length = length;
    spec.schemes = schemes.to_vec();
    build_master(&spec, dir).expect("master builds")
}

/// Outcome of matched-filter demodulation of a clean linear capture.
pub struct Demod {
    pub checked: usize,
    pub errors: usize,
    pub distinct: usize,
    /// RMS error vector magnitude relative to the constellation RMS.
    pub evm: f64,
}

/// Matched filter with the transmit taps, symbol-spaced sampling, a least
/// squares gain fit against the known symbols, then nearest-point decisions.
/// Only symbols whose filter window lies inside the capture are scored.
pub fn demodulate(sig: &rftl::sigsynth::CleanSignal) -> Demod {
    use rftl::sigsynth::{constellation, design_rrc};
    let p = &sig.params;
    let ov = p.symbol_overlap.unwrap() as usize;
    let sps = p.sps as usize;
    let taps = design_rrc(p.excess_bandwidth.unwrap(), ov as u32, p.sps).unwrap();
    let y = matched_filter(&sig.samples, &taps.taps);
    let points = constellation(sig.scheme).unwrap();
    let q_delay = if sig.scheme == Scheme::Oqpsk { sps / 2 } else { 0 };
    let last = (sig.samples.len() - 1 - q_delay) / sps;
    let ks: Vec<usize> = (ov..sig.symbols.len().min(last + 1).saturating_sub(ov)).collect();
    let rx: Vec<Complex64> = ks.iter().map(|&k| Complex64::new(y[k * sps].re, y[k * sps + q_delay].im)).collect();
    let tx: Vec<Complex64> = ks.iter().map(|&k| sig.symbols[k]).collect();
    let num: Complex64 = rx.iter().zip(&tx).map(|(r, s)| r * s.conj()).sum();
    let den: f64 = tx.iter().map(|s| s.norm_sqr()).sum();
    let g = num / den;
    let mut errors = 0;
    let mut seen = std::collections::BTreeSet::new();
    let mut err_energy = 0.0;
    for (r, s) in rx.iter().zip(&tx) {
        let z = r / g;
        err_energy += (z - s).norm_sqr();
        let d = nearest(&points, z);
        seen.insert(d);
        if (points[d] - s).norm() > 1e-9 {
            errors += 1;
        }
    }
    Demod { checked: ks.len(), errors, distinct: seen.len(), evm: (err_energy / den).sqrt() }
}

/// A recording with parameters drawn from the scheme's space.
pub fn random_recording(scheme: Scheme, snr_db: f64, fo: f64, len: usize, seed: u64) -> rftl::sigsynth::Recording {
    use rand::SeedableRng;
    use rftl::sigsynth::{apply_impairments, generate, ImpairmentParams, ModParams, DEFAULT_SAMPLE_RATE_HZ};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let params = ModParams::sample(scheme, DEFAULT_SAMPLE_RATE_HZ, &mut rng);
    let clean = generate(scheme, &params, len, &mut rng).unwrap();
    apply_impairments(clean, ImpairmentParams::new(fo, snr_db), &mut rng).unwrap()
}
