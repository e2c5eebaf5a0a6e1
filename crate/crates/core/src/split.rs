//! Seeded, optionally stratified train/test partitioning.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::trace::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.8, seed: 0, stratified: true }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config {
                field: "train_fraction",
                reason: alloc::format!("must lie in (0, 1), got {}", self.train_fraction),
            });
        }
        Ok(())
    }
}

fn take_count(n: usize, fraction: f64) -> usize {
    // Round half up; clamp so a class with ≥2 members lands in both parts.
    let k = libm::round(n as f64 * fraction) as usize;
    if n >= 2 { k.clamp(1, n - 1) } else { k.min(n) }
}

/// Index form of [`split`]: `(train, test)` positions into `dataset`.
pub fn split_indices(dataset: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seed::rng(seed::derive(spec.seed, "split"));
    let labels = dataset.labels();
    let mut train = Vec::new();
    let mut test = Vec::new();

    if spec.stratified {
        let (neg, pos) = dataset.class_counts();
        if neg == 0 {
            return Err(Error::Stratification { present: "triggered" });
        }
        if pos == 0 {
            return Err(Error::Stratification { present: "disabled" });
        }
        for class in [false, true] {
            let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            idx.shuffle(&mut rng);
            let k = take_count(idx.len(), spec.train_fraction);
            train.extend_from_slice(&idx[..k]);
            test.extend_from_slice(&idx[k..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut rng);
        let k = take_count(idx.len(), spec.train_fraction);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}

/// Disjoint `(train, test)` partition of `dataset`, deterministic under
/// `spec.seed`.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset, spec)?;
    Ok((dataset.select(&train), dataset.select(&test)))
}
