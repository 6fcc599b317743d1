//! The 23 signal classes and their canonical ordering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Broad generation family a scheme belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// RRC-shaped linear constellations.
    Linear,
    /// Continuous-phase frequency modulations.
    Cpm,
    /// Analog AM/FM of a synthetic message.
    Analog,
    /// Pure noise captures.
    Noise,
}

/// Modulation scheme identifier. Declaration order is the canonical label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "BPSK")]
    Bpsk,
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "PSK8")]
    Psk8,
    #[serde(rename = "PSK16")]
    Psk16,
    #[serde(rename = "OQPSK")]
    Oqpsk,
    #[serde(rename = "QAM16")]
    Qam16,
    #[serde(rename = "QAM32")]
    Qam32,
    #[serde(rename = "QAM64")]
    Qam64,
    #[serde(rename = "APSK16")]
    Apsk16,
    #[serde(rename = "APSK32")]
    Apsk32,
    #[serde(rename = "FSK5k")]
    Fsk5k,
    #[serde(rename = "FSK75k")]
    Fsk75k,
    #[serde(rename = "GFSK5k")]
    Gfsk5k,
    #[serde(rename = "GFSK75k")]
    Gfsk75k,
    #[serde(rename = "MSK")]
    Msk,
    #[serde(rename = "GMSK")]
    Gmsk,
    #[serde(rename = "FM-NB")]
    FmNb,
    #[serde(rename = "FM-WB")]
    FmWb,
    #[serde(rename = "AM-DSB")]
    AmDsb,
    #[serde(rename = "AM-DSBSC")]
    AmDsbsc,
    #[serde(rename = "AM-LSB")]
    AmLsb,
    #[serde(rename = "AM-USB")]
    AmUsb,
    #[serde(rename = "AWGN")]
    Awgn,
}

impl Scheme {
    pub const ALL: [Scheme; 23] = [
        Scheme::Bpsk,
        Scheme::Qpsk,
        Scheme::Psk8,
        Scheme::Psk16,
        Scheme::Oqpsk,
        Scheme::Qam16,
        Scheme::Qam32,
        Scheme::Qam64,
        Scheme::Apsk16,
        Scheme::Apsk32,
        Scheme::Fsk5k,
        Scheme::Fsk75k,
        Scheme::Gfsk5k,
        Scheme::Gfsk75k,
        Scheme::Msk,
        Scheme::Gmsk,
        Scheme::FmNb,
        Scheme::FmWb,
        Scheme::AmDsb,
        Scheme::AmDsbsc,
        Scheme::AmLsb,
        Scheme::AmUsb,
        Scheme::Awgn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bpsk => "BPSK",
            Scheme::Qpsk => "QPSK",
            Scheme::Psk8 => "PSK8",
            Scheme::Psk16 => "PSK16",
            Scheme::Oqpsk => "OQPSK",
            Scheme::Qam16 => "QAM16",
            Scheme::Qam32 => "QAM32",
            Scheme::Qam64 => "QAM64",
            Scheme::Apsk16 => "APSK16",
            Scheme::Apsk32 => "APSK32",
            Scheme::Fsk5k => "FSK5k",
            Scheme::Fsk75k => "FSK75k",
            Scheme::Gfsk5k => "GFSK5k",
            Scheme::Gfsk75k => "GFSK75k",
            Scheme::Msk => "MSK",
            Scheme::Gmsk => "GMSK",
            Scheme::FmNb => "FM-NB",
            Scheme::FmWb => "FM-WB",
            Scheme::AmDsb => "AM-DSB",
            Scheme::AmDsbsc => "AM-DSBSC",
            Scheme::AmLsb => "AM-LSB",
            Scheme::AmUsb => "AM-USB",
            Scheme::Awgn => "AWGN",
        }
    }

    /// Position in the canonical 23-class ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn family(self) -> Family {
        use Scheme::*;
        match self {
            Bpsk | Qpsk | Psk8 | Psk16 | Oqpsk | Qam16 | Qam32 | Qam64 | Apsk16 | Apsk32 => {
                Family::Linear
            }
            Fsk5k | Fsk75k | Gfsk5k | Gfsk75k | Msk | Gmsk => Family::Cpm,
            FmNb | FmWb | AmDsb | AmDsbsc | AmLsb | AmUsb => Family::Analog,
            Awgn => Family::Noise,
        }
    }

    /// Sorts and dedups a scheme list into canonical order.
    pub fn canonical(schemes: &[Scheme]) -> Vec<Scheme> {
        let mut out = schemes.to_vec();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown modulation scheme `{0}`")]
pub struct UnknownScheme(pub String);

impl FromStr for Scheme {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownScheme(s.to_string()))
    }
}
