use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, Target, Tree};
use super::RandomForestParams;
use crate::seed;

/// Bagged Gini trees; each tree casts one hard vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &RandomForestParams, seed: u64) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, |r| r.len());
        let max_features = params.max_features.unwrap_or_else(|| libm::floor(libm::sqrt(d as f64)) as usize).max(1);
        let grow_params = GrowParams { max_depth: None, min_leaf: params.min_leaf, max_features: Some(max_features) };
        let vote = |idx: &[usize]| {
            let pos = idx.iter().filter(|&&i| y[i]).count();
            // an even split votes positive
            if 2 * pos >= idx.len() { 1.0 } else { 0.0 }
        };

        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = seed::rng(seed::derive_indexed(seed, "random_forest/tree", t as u64));
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grow(x, &rows, Target::Class(y), grow_params, Some(&mut rng), &vote)
            })
            .collect();
        Self { n_features: d, trees }
    }

    /// Fraction of trees voting positive.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.5;
        }
        let votes = self.trees.iter().filter(|t| t.predict(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}
