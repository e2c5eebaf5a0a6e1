//! Synthetic trojan-disabled / trojan-triggered trace generator.
//!
//! Disabled traces are a constant baseline plus a few carrier tones with
//! random phase plus white Gaussian noise. Triggered traces are drawn from
//! the same generator with one extra trojan effect whose strength is scaled
//! by `separability`; at `separability = 0` both classes come from the same
//! distribution.
//!
//! Effect amplitudes are expressed in units of `base_noise_sd`:
//!
//! | effect               | added to triggered traces                                   |
//! |----------------------|-------------------------------------------------------------|
//! | `spike_train`        | `max(1, len/32)` pulses of height `6·s·sd` at uniform slots  |
//! | `harmonic_injection` | tone of amplitude `2·s·sd` at twice the first carrier        |
//! | `variance_inflation` | noise standard deviation multiplied by `1 + s`               |
//! | `duty_drain`         | square wave, `2·s·sd` high for half of a `max(8, len/4)` period |
//!
//! Carrier tones have amplitude `sd` each. Every trace owns an RNG stream
//! derived from `(seed, class, index)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::seed;
use crate::trace::{Dataset, PowerTrace, TraceSource, TrojanState};

/// Minimum trace length, matching the smallest FFT size.
pub const MIN_TRACE_LEN: usize = 8;

const SPIKE_GAIN: f64 = 6.0;
const HARMONIC_GAIN: f64 = 2.0;
const DRAIN_GAIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    SpikeTrain,
    HarmonicInjection,
    VarianceInflation,
    DutyDrain,
}

fn default_trojan_id() -> String {
    String::from("SYN")
}

/// Omitted fields take their [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_per_class: usize,
    pub trace_len: usize,
    pub base_mean: f64,
    pub base_noise_sd: f64,
    /// Carrier frequencies in cycles/sample, each in (0, 0.5).
    pub carrier_freqs: Vec<f64>,
    pub separability: f64,
    pub effect: Effect,
    pub seed: u64,
    pub trojan_id: String,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_per_class: 100,
            trace_len: 256,
            base_mean: 1.0,
            base_noise_sd: 0.1,
            carrier_freqs: alloc::vec![0.05, 0.125],
            separability: 1.0,
            effect: Effect::VarianceInflation,
            seed: 0,
            trojan_id: default_trojan_id(),
        }
    }
}

fn config_err(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config { field, reason: reason.into() }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(config_err("n_per_class", "must be positive"));
        }
        if self.trace_len < MIN_TRACE_LEN {
            return Err(config_err(
                "trace_len",
                alloc::format!("must be at least {MIN_TRACE_LEN}, got {}", self.trace_len),
            ));
        }
        if !self.base_mean.is_finite() {
            return Err(config_err("base_mean", "must be finite"));
        }
        if !(self.base_noise_sd.is_finite() && self.base_noise_sd > 0.0) {
            return Err(config_err("base_noise_sd", "must be finite and positive"));
        }
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(config_err(
                "separability",
                alloc::format!("must lie in [0, 1], got {}", self.separability),
            ));
        }
        for &f in &self.carrier_freqs {
            if !(f > 0.0 && f < 0.5) {
                return Err(config_err("carrier_freqs", alloc::format!("{f} is outside (0, 0.5)")));
            }
        }
        if self.effect == Effect::HarmonicInjection {
            match self.carrier_freqs.first() {
                None => {
                    return Err(config_err("carrier_freqs", "harmonic_injection needs a carrier"));
                }
                Some(&f) if 2.0 * f >= 0.5 => {
                    return Err(config_err(
                        "carrier_freqs",
                        "harmonic_injection needs the first carrier below 0.25",
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Standard normal draw (Box-Muller, one value per call).
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // u1 in (0, 1] keeps the log finite.
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2)
}

fn generate_trace(cfg: &SyntheticConfig, state: TrojanState, index: usize) -> Vec<f64> {
    let stream = match state {
        TrojanState::Disabled => "synthetic/disabled",
        TrojanState::Triggered => "synthetic/triggered",
    };
    let mut rng = seed::rng(seed::derive_indexed(cfg.seed, stream, index as u64));
    let len = cfg.trace_len;
    let sd = cfg.base_noise_sd;
    let s = if state.is_positive() { cfg.separability } else { 0.0 };

    let mut x: Vec<f64> = alloc::vec![cfg.base_mean; len];
    for &f in &cfg.carrier_freqs {
        let phase = 2.0 * PI * rng.random::<f64>();
        for (n, v) in x.iter_mut().enumerate() {
            *v += sd * math::cos(2.0 * PI * f * n as f64 + phase);
        }
    }

    // Effect randomness is drawn for both classes so the streams line up.
    let mut noise_sd = sd;
    match cfg.effect {
        Effect::SpikeTrain => {
            let pulses = core::cmp::max(1, len / 32);
            for _ in 0..pulses {
                let at = rng.random_range(0..len);
                x[at] += s * SPIKE_GAIN * sd;
            }
        }
        Effect::HarmonicInjection => {
            let f = 2.0 * cfg.carrier_freqs[0];
            let phase = 2.0 * PI * rng.random::<f64>();
            for (n, v) in x.iter_mut().enumerate() {
                *v += s * HARMONIC_GAIN * sd * math::cos(2.0 * PI * f * n as f64 + phase);
            }
        }
        Effect::VarianceInflation => {
            noise_sd = sd * (1.0 + s);
        }
        Effect::DutyDrain => {
            let period = core::cmp::max(8, len / 4);
            let offset = rng.random_range(0..period);
            for (n, v) in x.iter_mut().enumerate() {
                if (n + offset) % period < period / 2 {
                    *v += s * DRAIN_GAIN * sd;
                }
            }
        }
    }

    for v in x.iter_mut() {
        *v += noise_sd * gaussian(&mut rng);
    }
    x
}

/// Generates `n_per_class` disabled traces followed by `n_per_class`
/// triggered traces. Pure function of `config`.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Dataset> {
    config.validate()?;
    let mut traces = Vec::with_capacity(2 * config.n_per_class);
    for state in [TrojanState::Disabled, TrojanState::Triggered] {
        for i in 0..config.n_per_class {
            let samples = generate_trace(config, state, i);
            traces.push(PowerTrace {
                samples,
                trojan_id: config.trojan_id.clone(),
                state,
                input_mode: Default::default(),
                temperature_c: crate::trace::DEFAULT_TEMPERATURE_C,
                source: TraceSource::Synthetic,
            });
        }
    }
    Dataset::new(traces)
}
