//! Allocation-only core for power side-channel hardware trojan detection.
//!
//! The crate turns power traces into a fixed 25-value feature vector
//! (12 time-domain statistics followed by 13 spectral descriptors), trains
//! four binary classifiers on those vectors and scores them with the usual
//! confusion-matrix metrics, ROC/AUC and kernel density curves.
//!
//! Everything here is `no_std` + `alloc`: there is no file or console IO.
//! Readers, writers and the command line live in the `htscan` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod seed;
pub mod split;
pub mod synth;
pub mod trace;

mod math;

pub use error::{Error, Result};
pub use trace::{Dataset, InputMode, PowerTrace, TraceSource, TrojanState};
