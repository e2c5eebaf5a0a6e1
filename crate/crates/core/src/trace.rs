//! Power traces and per-trojan datasets.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement condition of a trace. `Triggered` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrojanState {
    Disabled,
    Triggered,
}

impl TrojanState {
    pub fn is_positive(self) -> bool {
        self == TrojanState::Triggered
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            TrojanState::Triggered
        } else {
            TrojanState::Disabled
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrojanState::Disabled => "disabled",
            TrojanState::Triggered => "triggered",
        }
    }
}

/// How the circuit inputs were driven while the trace was captured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    #[default]
    FixedInput,
    /// Each encryption's output is fed back as the next input.
    ChainedInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    #[default]
    DatasetFile,
    Synthetic,
}

/// One labeled power-consumption time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTrace {
    pub samples: Vec<f64>,
    pub trojan_id: String,
    pub state: TrojanState,
    pub input_mode: InputMode,
    pub temperature_c: f64,
    pub source: TraceSource,
}

pub const DEFAULT_TEMPERATURE_C: f64 = 25.0;

impl PowerTrace {
    /// Builds a trace, rejecting empty or non-finite sample sequences.
    pub fn new(samples: Vec<f64>, trojan_id: impl Into<String>, state: TrojanState) -> Result<Self> {
        validate_samples(&samples, 1)?;
        Ok(Self {
            samples,
            trojan_id: trojan_id.into(),
            state,
            input_mode: InputMode::FixedInput,
            temperature_c: DEFAULT_TEMPERATURE_C,
            source: TraceSource::DatasetFile,
        })
    }

    pub fn with_source(mut self, source: TraceSource) -> Self {
        self.source = source;
        self
    }

    pub fn with_input_mode(mut self, mode: InputMode) -> Self {
        self.input_mode = mode;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Checks that `samples` holds at least `min` values, all finite.
pub fn validate_samples(samples: &[f64], min: usize) -> Result<()> {
    if samples.len() < min {
        return Err(Error::TooShort { min, got: samples.len() });
    }
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Traces of a single trojan benchmark, in load order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    traces: Vec<PowerTrace>,
}

impl Dataset {
    /// Wraps `traces`; all of them must carry the same trojan id.
    pub fn new(traces: Vec<PowerTrace>) -> Result<Self> {
        if let Some(first) = traces.first() {
            for t in &traces[1..] {
                if t.trojan_id != first.trojan_id {
                    return Err(Error::MixedTrojan {
                        expected: first.trojan_id.clone(),
                        found: t.trojan_id.clone(),
                    });
                }
            }
        }
        Ok(Self { traces })
    }

    /// Concatenates datasets of the same trojan, preserving order.
    pub fn concat(parts: impl IntoIterator<Item = Dataset>) -> Result<Self> {
        let traces = parts.into_iter().flat_map(|d| d.traces).collect();
        Self::new(traces)
    }

    pub fn traces(&self) -> &[PowerTrace] {
        &self.traces
    }

    pub fn into_traces(self) -> Vec<PowerTrace> {
        self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn trojan_id(&self) -> Option<&str> {
        self.traces.first().map(|t| t.trojan_id.as_str())
    }

    /// Binary labels, `true` for triggered traces.
    pub fn labels(&self) -> Vec<bool> {
        self.traces.iter().map(|t| t.state.is_positive()).collect()
    }

    /// `(disabled, triggered)` counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.traces.iter().filter(|t| t.state.is_positive()).count();
        (self.traces.len() - pos, pos)
    }

    /// Sub-dataset made of the traces at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset { traces: indices.iter().map(|&i| self.traces[i].clone()).collect() }
    }
}
