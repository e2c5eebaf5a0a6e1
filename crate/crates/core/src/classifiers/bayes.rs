use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::NaiveBayesParams;
use crate::features::Standardizer;
use crate::math::{ln, sigmoid};

const VAR_FLOOR: f64 = 1e-300;

/// Gaussian naive Bayes on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub n_features: usize,
    pub standardizer: Standardizer,
    /// Index 0 = negative class, 1 = positive class.
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl NaiveBayes {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &NaiveBayesParams) -> crate::Result<Self> {
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let standardizer = Standardizer::fit_rows(&rows)?;
        let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform_values(r)).collect::<crate::Result<_>>()?;
        let d = standardizer.dim();
        let n = z.len() as f64;

        // Smoothing scales with the widest feature variance over all samples.
        let mut max_var: f64 = 0.0;
        for j in 0..d {
            let m = z.iter().map(|r| r[j]).sum::<f64>() / n;
            let v = z.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
            max_var = max_var.max(v);
        }
        let epsilon = params.var_smoothing_ratio * max_var;

        let mut log_prior = [0.0; 2];
        let mut mean: [Vec<f64>; 2] = [alloc::vec![0.0; d], alloc::vec![0.0; d]];
        let mut var: [Vec<f64>; 2] = [alloc::vec![0.0; d], alloc::vec![0.0; d]];
        for class in [false, true] {
            let c = usize::from(class);
            let members: Vec<&Vec<f64>> = z.iter().zip(y).filter(|(_, &yi)| yi == class).map(|(r, _)| r).collect();
            let count = members.len() as f64;
            log_prior[c] = ln(count / n);
            for j in 0..d {
                let m = members.iter().map(|r| r[j]).sum::<f64>() / count;
                let v = members.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / count;
                mean[c][j] = m;
                var[c][j] = (v + epsilon).max(VAR_FLOOR);
            }
        }
        Ok(Self { n_features: d, standardizer, log_prior, mean, var })
    }

    fn joint_log_likelihood(&self, z: &[f64], c: usize) -> f64 {
        let mut ll = self.log_prior[c];
        for ((&x, &m), &v) in z.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            ll -= 0.5 * ln(2.0 * core::f64::consts::PI * v) + (x - m) * (x - m) / (2.0 * v);
        }
        ll
    }

    /// Posterior probability of the positive class.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_features);
        let s = &self.standardizer;
        let z: Vec<f64> = x.iter().zip(&s.mean).zip(&s.std).map(|((&v, &m), &sd)| (v - m) / sd).collect();
        sigmoid(self.joint_log_likelihood(&z, 1) - self.joint_log_likelihood(&z, 0))
    }
}
