//! One-hidden-layer ReLU network with a sigmoid output unit.
//!
//! Loss on a batch of size `B` is the mean binary cross-entropy plus
//! `l2 / (2B) · (‖W₁‖² + ‖w₂‖²)`; biases are not penalized.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeuralNetworkParams;
use crate::features::Standardizer;
use crate::math::{sigmoid, softplus, sqrt};
use crate::seed;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Raw network parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    pub n_inputs: usize,
    pub n_hidden: usize,
    /// `n_hidden × n_inputs`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradients, shaped like [`MlpWeights`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpWeights {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(n_inputs: usize, n_hidden: usize, rng: &mut R) -> Self {
        let limit1 = sqrt(6.0 / (n_inputs + n_hidden) as f64);
        let limit2 = sqrt(6.0 / (n_hidden + 1) as f64);
        let w1 = (0..n_inputs * n_hidden).map(|_| rng.random_range(-limit1..limit1)).collect();
        let w2 = (0..n_hidden).map(|_| rng.random_range(-limit2..limit2)).collect();
        Self { n_inputs, n_hidden, w1, b1: alloc::vec![0.0; n_hidden], w2, b2: 0.0 }
    }

    fn hidden(&self, x: &[f64], pre: &mut [f64]) {
        for (j, p) in pre.iter_mut().enumerate() {
            let row = &self.w1[j * self.n_inputs..(j + 1) * self.n_inputs];
            *p = self.b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// Output logit.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut pre = alloc::vec![0.0; self.n_hidden];
        self.hidden(x, &mut pre);
        self.b2 + pre.iter().zip(&self.w2).map(|(&p, &w)| p.max(0.0) * w).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    fn weight_norm_sq(&self) -> f64 {
        self.w1.iter().chain(&self.w2).map(|w| w * w).sum()
    }

    /// Batch loss and its exact gradient.
    pub fn loss_and_gradients(&self, xs: &[&[f64]], ys: &[bool], l2: f64) -> (f64, MlpGradients) {
        let b = xs.len() as f64;
        let h = self.n_hidden;
        let mut g = MlpGradients {
            w1: alloc::vec![0.0; self.w1.len()],
            b1: alloc::vec![0.0; h],
            w2: alloc::vec![0.0; h],
            b2: 0.0,
        };
        let mut pre = alloc::vec![0.0; h];
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            self.hidden(x, &mut pre);
            let z = self.b2 + pre.iter().zip(&self.w2).map(|(&p, &w)| p.max(0.0) * w).sum::<f64>();
            let target = if y { 1.0 } else { 0.0 };
            loss += softplus(z) - target * z;
            let dz = (sigmoid(z) - target) / b;
            g.b2 += dz;
            for j in 0..h {
                if pre[j] > 0.0 {
                    g.w2[j] += dz * pre[j];
                    let dh = dz * self.w2[j];
                    g.b1[j] += dh;
                    let row = &mut g.w1[j * self.n_inputs..(j + 1) * self.n_inputs];
                    for (gw, &v) in row.iter_mut().zip(x.iter()) {
                        *gw += dh * v;
                    }
                }
            }
        }
        loss = loss / b + 0.5 * l2 / b * self.weight_norm_sq();
        let scale = l2 / b;
        for (gw, &w) in g.w1.iter_mut().zip(&self.w1) {
            *gw += scale * w;
        }
        for (gw, &w) in g.w2.iter_mut().zip(&self.w2) {
            *gw += scale * w;
        }
        (loss, g)
    }
}

struct Adam {
    lr: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n_params: usize, lr: f64) -> Self {
        Self { lr, t: 0, m: alloc::vec![0.0; n_params], v: alloc::vec![0.0; n_params] }
    }

    fn step(&mut self, w: &mut MlpWeights, g: &MlpGradients) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(ADAM_BETA1, f64::from(self.t));
        let c2 = 1.0 - libm::pow(ADAM_BETA2, f64::from(self.t));
        let params = w.w1.iter_mut().chain(w.b1.iter_mut()).chain(w.w2.iter_mut()).chain(core::iter::once(&mut w.b2));
        let grads = g.w1.iter().chain(&g.b1).chain(&g.w2).chain(core::iter::once(&g.b2));
        for (((p, &gi), m), v) in params.zip(grads).zip(self.m.iter_mut()).zip(self.v.iter_mut()) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * gi;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * gi * gi;
            *p -= self.lr * (*m / c1) / (sqrt(*v / c2) + ADAM_EPSILON);
        }
    }
}

/// Standardized-input MLP classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralNetwork {
    pub n_features: usize,
    pub standardizer: Standardizer,
    pub weights: MlpWeights,
    /// Epochs actually run before early stopping.
    pub epochs_run: usize,
    /// Epoch whose weights were kept (1-based).
    pub best_epoch: usize,
}

fn accuracy(w: &MlpWeights, xs: &[Vec<f64>], ys: &[bool], idx: &[usize]) -> f64 {
    let correct = idx.iter().filter(|&&i| (w.logit(&xs[i]) >= 0.0) == ys[i]).count();
    correct as f64 / idx.len() as f64
}

impl NeuralNetwork {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &NeuralNetworkParams, seed: u64) -> crate::Result<Self> {
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let standardizer = Standardizer::fit_rows(&rows)?;
        let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform_values(r)).collect::<crate::Result<_>>()?;
        let n = z.len();
        let d = standardizer.dim();

        let mut rng = seed::rng(seed::derive(seed, "neural_network"));
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let n_val = (libm::round(params.val_fraction * n as f64) as usize).clamp(1, n - 1);
        let (val_idx, train_idx) = order.split_at(n_val);
        let mut train_idx = train_idx.to_vec();

        let mut weights = MlpWeights::init(d, params.hidden, &mut rng);
        let n_params = weights.w1.len() + 2 * params.hidden + 1;
        let mut adam = Adam::new(n_params, params.learning_rate);

        let mut best = weights.clone();
        let mut best_acc = f64::NEG_INFINITY;
        let mut best_epoch = 0;
        let mut stale = 0;
        let mut epochs_run = 0;
        let batch = params.batch_size.max(1);

        for epoch in 1..=params.max_epochs {
            epochs_run = epoch;
            train_idx.shuffle(&mut rng);
            for chunk in train_idx.chunks(batch) {
                let xs: Vec<&[f64]> = chunk.iter().map(|&i| z[i].as_slice()).collect();
                let ys: Vec<bool> = chunk.iter().map(|&i| y[i]).collect();
                let (_, g) = weights.loss_and_gradients(&xs, &ys, params.l2);
                adam.step(&mut weights, &g);
            }
            let acc = accuracy(&weights, &z, y, val_idx);
            if acc > best_acc {
                best_acc = acc;
                best = weights.clone();
                best_epoch = epoch;
                stale = 0;
            } else {
                stale += 1;
                if stale >= params.early_stop_patience {
                    break;
                }
            }
        }
        Ok(Self { n_features: d, standardizer, weights: best, epochs_run, best_epoch })
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_features);
        let s = &self.standardizer;
        let z: Vec<f64> = x.iter().zip(&s.mean).zip(&s.std).map(|((&v, &m), &sd)| (v - m) / sd).collect();
        self.weights.predict_proba(&z)
    }
}
