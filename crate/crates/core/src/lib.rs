//! Synthetic RF modulation datasets and transfer-learning experiments.
//!
//! The crate is organised bottom-up:
//!
//! - [`sigsynth`] generates clean baseband captures for 23 modulation schemes
//!   and applies frequency offset and calibrated AWGN.
//! - [`datastore`] persists captures as SigMF, builds a master dataset and
//!   resolves metadata-filtered subsets and the sweep grids.
//! - [`net`] is a small CNN classifier with hand-written backpropagation and Adam.
//! - [`harness`] runs pre-training, baselines, head re-training and fine-tuning.
//! - [`experiment`] orchestrates whole grids, the results registry and matrix output.

pub mod datastore;
pub mod experiment;
pub mod harness;
pub mod net;
pub mod scheme;
pub mod seed;
pub mod sigsynth;

pub use scheme::{Family, Scheme};
