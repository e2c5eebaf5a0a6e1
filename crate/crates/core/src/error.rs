use alloc::string::String;

/// Errors produced by the detection core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A sample or feature value was NaN or infinite.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("input too short: need at least {min} samples, got {got}")]
    TooShort { min: usize, got: usize },

    /// A configuration field is outside its allowed range.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("stratification needs both classes, found only {present}")]
    Stratification { present: &'static str },

    #[error("training set has a single class")]
    DegenerateTraining,

    #[error("feature schema mismatch: {0}")]
    Schema(String),

    /// Lengths or dimensions of paired inputs disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unknown feature `{name}`; valid names: {}", crate::features::FEATURE_NAMES.join(", "))]
    UnknownFeature { name: String },

    #[error("class coverage: {0}")]
    ClassCoverage(String),

    #[error("mixed trojan ids in one dataset: `{expected}` vs `{found}`")]
    MixedTrojan { expected: String, found: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
