//! Confusion matrices, ROC/AUC, benchmark tables and feature KDEs.

pub mod kde;
pub mod metrics;
pub mod report;

pub use kde::{kde_export, overlap_coefficient, KdeCurve};
pub use metrics::{auc_rank, confusion, evaluate, metrics, roc_curve, ConfusionMatrix, Metrics, MetricsReport};
pub use report::{benchmark_report, BenchmarkReport, ResultsByTrojan, HTM_ACCURACY};
