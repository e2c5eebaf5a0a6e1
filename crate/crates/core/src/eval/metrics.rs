use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classifiers::{decide, TrainedModel};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

/// Counts outcomes with `true` as the positive (triggered) class.
pub fn confusion(labels: &[bool], predictions: &[bool]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::Shape(alloc::format!(
            "{} labels vs {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Shape(String::from("no samples")));
    }
    let mut cm = ConfusionMatrix::default();
    for (&l, &p) in labels.iter().zip(predictions) {
        match (l, p) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Which metrics had a zero denominator (and were reported as 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Undefined {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
    pub auc: bool,
}

impl Undefined {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1 || self.auc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub undefined: Undefined,
}

/// Metrics of one model on one trojan's test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub trojan_id: String,
    pub model: String,
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
    /// `(fpr, tpr)` points from (0,0) to (1,1).
    pub roc: Vec<[f64; 2]>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Threshold-free ROC curve: one point per distinct score, highest first.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Vec<[f64; 2]> {
    let p = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return alloc::vec![[0.0, 0.0], [1.0, 1.0]];
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = alloc::vec![[0.0, 0.0]];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]].total_cmp(&s).is_eq() {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push([fp as f64 / n as f64, tp as f64 / p as f64]);
    }
    points
}

/// Trapezoidal area under a piecewise-linear curve.
pub fn trapezoid_area(points: &[[f64; 2]]) -> f64 {
    points.windows(2).map(|w| (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]) / 2.0).sum()
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney with mid-ranks). `None` if a class is
/// missing.
pub fn auc_rank(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let p = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].total_cmp(&scores[order[i]]).is_eq() {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (pf, nf) = (p as f64, n as f64);
    Some((rank_sum - pf * (pf + 1.0) / 2.0) / (pf * nf))
}

/// The five headline metrics plus the ROC curve.
pub fn metrics(cm: &ConfusionMatrix, scores: &[f64], labels: &[bool]) -> Result<MetricsReport> {
    if labels.is_empty() || cm.total() == 0 {
        return Err(Error::Shape(String::from("no samples")));
    }
    if scores.len() != labels.len() || cm.total() != labels.len() as u64 {
        return Err(Error::Shape(alloc::format!(
            "{} scores, {} labels, confusion total {}",
            scores.len(),
            labels.len(),
            cm.total()
        )));
    }
    let positives = labels.iter().filter(|&&l| l).count() as u64;
    if positives != cm.positives() {
        return Err(Error::Shape(alloc::format!(
            "labels hold {positives} positives, confusion matrix {}",
            cm.positives()
        )));
    }

    let mut undefined = Undefined::default();
    let accuracy = (cm.tp + cm.tn) as f64 / cm.total() as f64;
    let precision = ratio(cm.tp, cm.tp + cm.fp).unwrap_or_else(|| {
        undefined.precision = true;
        0.0
    });
    let recall = ratio(cm.tp, cm.tp + cm.fn_).unwrap_or_else(|| {
        undefined.recall = true;
        0.0
    });
    // Harmonic mean of the two ratios as computed above, not the count
    // form, so results agree bit for bit with 2PR/(P+R).
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        undefined.f1 = true;
        0.0
    };
    let auc = auc_rank(scores, labels).unwrap_or_else(|| {
        undefined.auc = true;
        0.0
    });

    Ok(MetricsReport {
        trojan_id: String::new(),
        model: String::new(),
        metrics: Metrics { accuracy, precision, recall, f1, auc, undefined },
        confusion: *cm,
        roc: roc_curve(scores, labels),
    })
}

/// Scores `test` with `model`, thresholding at 0.5.
pub fn evaluate(model: &TrainedModel, test: &[FeatureVector]) -> Result<MetricsReport> {
    let scores: Vec<f64> = test.iter().map(|v| model.predict_proba(v)).collect::<Result<_>>()?;
    let labels: Vec<bool> = test.iter().map(|v| v.is_positive()).collect();
    let preds: Vec<bool> = scores.iter().map(|&s| decide(s)).collect();
    let cm = confusion(&labels, &preds)?;
    let mut report = metrics(&cm, &scores, &labels)?;
    report.trojan_id = test.first().map(|v| v.trojan_id.clone()).unwrap_or_default();
    report.model = String::from(model.kind().tag());
    Ok(report)
}
