use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, Target, Tree};
use super::GradientBoostingParams;
use crate::math::{ln, sigmoid, softplus};

/// Newton-step denominators are floored here.
pub const HESSIAN_FLOOR: f64 = 1e-12;

/// Logistic-loss gradient boosting over depth-limited regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub n_features: usize,
    /// Prior log-odds of the positive class.
    pub init_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

/// Mean binary log-loss of raw scores.
pub fn log_loss(scores: &[f64], y: &[bool]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(&s, &yi)| softplus(s) - if yi { s } else { 0.0 })
        .sum();
    total / scores.len() as f64
}

impl GradientBoosting {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &GradientBoostingParams) -> Self {
        Self::fit_with_history(x, y, params).0
    }

    /// Also returns the training log-loss before the first stage and after
    /// every stage (`n_trees + 1` values).
    pub fn fit_with_history(x: &[Vec<f64>], y: &[bool], params: &GradientBoostingParams) -> (Self, Vec<f64>) {
        let n = x.len();
        let pos = y.iter().filter(|&&v| v).count() as f64;
        let p = pos / n as f64;
        let init_score = ln(p / (1.0 - p));
        let mut scores = alloc::vec![init_score; n];
        let mut history = Vec::with_capacity(params.n_trees + 1);
        history.push(log_loss(&scores, y));

        let rows: Vec<usize> = (0..n).collect();
        let grow_params = GrowParams { max_depth: Some(params.max_depth), min_leaf: 1, max_features: None };
        let mut trees = Vec::with_capacity(params.n_trees);
        let mut residual = alloc::vec![0.0; n];
        let mut prob = alloc::vec![0.0; n];

        for _ in 0..params.n_trees {
            for i in 0..n {
                prob[i] = sigmoid(scores[i]);
                residual[i] = if y[i] { 1.0 } else { 0.0 } - prob[i];
            }
            let newton = |idx: &[usize]| {
                let num: f64 = idx.iter().map(|&i| residual[i]).sum();
                let den: f64 = idx.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
                num / den.max(HESSIAN_FLOOR)
            };
            let tree = grow::<ChaCha8Rng>(x, &rows, Target::Value(&residual), grow_params, None, &newton);
            for (s, xi) in scores.iter_mut().zip(x) {
                *s += params.learning_rate * tree.predict(xi);
            }
            history.push(log_loss(&scores, y));
            trees.push(tree);
        }

        let model = Self {
            n_features: x.first().map_or(0, |r| r.len()),
            init_score,
            learning_rate: params.learning_rate,
            trees,
        };
        (model, history)
    }

    pub fn decision_function(&self, x: &[f64]) -> f64 {
        // same accumulation order as training
        self.trees.iter().fold(self.init_score, |s, t| s + self.learning_rate * t.predict(x))
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision_function(x))
    }
}
