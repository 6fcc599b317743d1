//! Source/target subset grids for the SNR, FO, joint and modulation experiments.

use super::{PerClass, SubsetConfig};
use crate::scheme::Scheme;
use crate::scheme::Scheme::*;

/// Pre-training volumes plus the held-out test size.
pub const PAPER_PER_CLASS: PerClass = PerClass { train: 5000, val: 500, test: 1000 };

const ALL_SNR: [f64; 2] = [0.0, 20.0];
const CENTER_FO: [f64; 2] = [-0.05, 0.05];

pub const SMALL_SUBSET: [Scheme; 12] =
    [Bpsk, Qpsk, Oqpsk, Qam16, Qam64, Apsk16, Fsk5k, Msk, FmNb, AmDsb, AmUsb, Awgn];

/// Schemes added one at a time, in order, to grow `small` into `all`.
const CHAIN_ADDITIONS: [Scheme; 11] =
    [Psk8, Psk16, Qam32, Apsk32, Fsk75k, Gfsk5k, Gfsk75k, Gmsk, FmWb, AmDsbsc, AmLsb];

const LINEAR_GROUP: [Scheme; 11] =
    [Bpsk, Qpsk, Psk8, Psk16, Oqpsk, Qam16, Qam32, Qam64, Apsk16, Apsk32, Awgn];
const FREQ_GROUP: [Scheme; 7] = [Fsk5k, Fsk75k, Gfsk5k, Gfsk75k, Msk, Gmsk, Awgn];
const ANALOG_GROUP: [Scheme; 7] = [FmNb, FmWb, AmDsb, AmDsbsc, AmLsb, AmUsb, Awgn];

pub const MOD_EXP1_GROUPS: [(&str, &[Scheme]); 5] = [
    ("all", &Scheme::ALL),
    ("small", &SMALL_SUBSET),
    ("linear", &LINEAR_GROUP),
    ("freq_shifted", &FREQ_GROUP),
    ("analog", &ANALOG_GROUP),
];

fn config(name: String, snr_range: [f64; 2], fo_range: [f64; 2], schemes: &[Scheme]) -> SubsetConfig {
    SubsetConfig {
        name,
        snr_range,
        fo_range,
        schemes: Scheme::canonical(schemes),
        per_class: PAPER_PER_CLASS,
    }
}

// Endpoints are built from integers so they equal the decimal literals exactly.
fn pct(tenths_of_percent: i32) -> f64 {
    tenths_of_percent as f64 / 1000.0
}

fn fmt_pct(tenths: i32) -> String {
    format!("{:.1}", tenths as f64 / 10.0)
}

/// 26 windows of 5 dB in 1 dB steps, FO in [-5%, 5%].
pub fn make_snr_sweep() -> Vec<SubsetConfig> {
    (0..26)
        .map(|i| {
            let lo = -10 + i;
            let hi = lo + 5;
            config(format!("snr_{lo}_{hi}"), [lo as f64, hi as f64], CENTER_FO, &Scheme::ALL)
        })
        .collect()
}

/// 31 windows of 5% in 0.5% steps, SNR in [0, 20] dB.
pub fn make_fo_sweep() -> Vec<SubsetConfig> {
    (0..31)
        .map(|i| {
            let lo = -100 + 5 * i;
            let hi = lo + 50;
            config(
                format!("fo_{}_{}", fmt_pct(lo), fmt_pct(hi)),
                ALL_SNR,
                [pct(lo), pct(hi)],
                &Scheme::ALL,
            )
        })
        .collect()
}

/// 5 SNR windows of 10 dB x 5 FO windows of 10%, SNR-major.
pub fn make_snr_fo_sweep() -> Vec<SubsetConfig> {
    let mut out = Vec::with_capacity(25);
    for i in 0..5 {
        let slo = -10 + 5 * i;
        let shi = slo + 10;
        for j in 0..5 {
            let flo = -100 + 25 * j;
            let fhi = flo + 100;
            out.push(config(
                format!("snr_{slo}_{shi}__fo_{}_{}", fmt_pct(flo), fmt_pct(fhi)),
                [slo as f64, shi as f64],
                [pct(flo), pct(fhi)],
                &Scheme::ALL,
            ));
        }
    }
    out
}

/// The five scheme groups: all, small, linear, frequency-shifted, analog.
pub fn make_mod_exp1() -> Vec<SubsetConfig> {
    MOD_EXP1_GROUPS
        .iter()
        .map(|(name, schemes)| config(name.to_string(), ALL_SNR, CENTER_FO, schemes))
        .collect()
}

/// Scheme sets of the nested chain `small, subset1, ..., subset10, all`.
pub fn mod_exp2_chain() -> Vec<(String, Vec<Scheme>)> {
    let mut current: Vec<Scheme> = SMALL_SUBSET.to_vec();
    let mut out = vec![("small".to_string(), Scheme::canonical(&current))];
    for (i, add) in CHAIN_ADDITIONS.iter().enumerate() {
        current.push(*add);
        let name = if i + 1 == CHAIN_ADDITIONS.len() { "all".to_string() } else { format!("subset{}", i + 1) };
        out.push((name, Scheme::canonical(&current)));
    }
    out
}

pub fn make_mod_exp2() -> Vec<SubsetConfig> {
    mod_exp2_chain()
        .into_iter()
        .map(|(name, schemes)| config(name, ALL_SNR, CENTER_FO, &schemes))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_sweep_endpoints() {
        let s = make_snr_sweep();
        assert_eq!(s.len(), 26);
        assert_eq!(s[0].snr_range, [-10.0, -5.0]);
        assert_eq!(s[1].snr_range, [-9.0, -4.0]);
        assert_eq!(s[25].snr_range, [15.0, 20.0]);
        assert!(s.iter().all(|c| c.fo_range == [-0.05, 0.05] && c.schemes.len() == 23));
    }

    #[test]
    fn fo_sweep_endpoints() {
        let s = make_fo_sweep();
        assert_eq!(s.len(), 31);
        assert_eq!(s[0].fo_range, [-0.10, -0.05]);
        assert_eq!(s[1].fo_range, [-0.095, -0.045]);
        assert_eq!(s[30].fo_range, [0.05, 0.10]);
        assert!(s.iter().all(|c| c.snr_range == [0.0, 20.0]));
    }

    #[test]
    fn joint_sweep_corners() {
        let s = make_snr_fo_sweep();
        assert_eq!(s.len(), 25);
        assert_eq!(s[0].snr_range, [-10.0, 0.0]);
        assert_eq!(s[0].fo_range, [-0.10, 0.0]);
        assert_eq!(s[1].fo_range, [-0.075, 0.025]);
        assert_eq!(s[12].snr_range, [0.0, 10.0]);
        assert_eq!(s[12].fo_range, [-0.05, 0.05]);
        assert_eq!(s[24].snr_range, [10.0, 20.0]);
        assert_eq!(s[24].fo_range, [0.0, 0.10]);
    }

    #[test]
    fn mod_exp1_group_sizes() {
        let s = make_mod_exp1();
        let sizes: Vec<usize> = s.iter().map(|c| c.schemes.len()).collect();
        assert_eq!(sizes, vec![23, 12, 11, 7, 7]);
    }

    #[test]
    fn mod_exp2_chain_is_nested() {
        let s = make_mod_exp2();
        assert_eq!(s.len(), 12);
        assert_eq!(s[0].name, "small");
        assert_eq!(s[11].name, "all");
        for w in s.windows(2) {
            assert_eq!(w[1].schemes.len(), w[0].schemes.len() + 1);
            assert!(w[0].schemes.iter().all(|x| w[1].schemes.contains(x)));
        }
        let added: Vec<Scheme> = s[3].schemes.iter().filter(|x| !s[2].schemes.contains(x)).copied().collect();
        assert_eq!(added, vec![Qam32]);
        assert_eq!(s[11].schemes.len() - s[0].schemes.len(), 11);
    }
}
