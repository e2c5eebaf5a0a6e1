//! Per-trojan benchmark tables and the baseline accuracy comparison.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use crate::classifiers::ModelKind;

/// Published accuracies (%) of the hierarchical-temporal-memory detector
/// on the same benchmarks.
pub const HTM_ACCURACY: [(&str, f64); 5] =
    [("T500", 100.0), ("T600", 63.5), ("T700", 98.1), ("T800", 100.0), ("T1600", 59.6)];

pub const REPORT_FORMAT_VERSION: u32 = 1;

const UNDEFINED_CELL: &str = "—";
const UNDEFINED_NOTE: &str = "— undefined: zero denominator (reported as 0 in JSON)";

pub fn htm_accuracy(trojan_id: &str) -> Option<f64> {
    HTM_ACCURACY.iter().find(|(id, _)| *id == trojan_id).map(|&(_, a)| a)
}

/// Orders ids like `T400 < T1000` by their numeric suffix.
pub fn trojan_sort_key(id: &str) -> (String, u64, String) {
    let split = id.find(|c: char| c.is_ascii_digit()).unwrap_or(id.len());
    let (prefix, rest) = id.split_at(split);
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    let number = digits.parse().unwrap_or(0);
    (String::from(prefix), number, String::from(id))
}

/// `trojan_id → model → report`.
pub type ResultsByTrojan = BTreeMap<String, BTreeMap<ModelKind, MetricsReport>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub trojan_id: String,
    pub best_model: String,
    /// Best accuracy in percent, rounded to one decimal.
    pub best_accuracy: f64,
    pub htm_accuracy: Option<f64>,
    /// `best_accuracy − htm_accuracy`, percentage points.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub format_version: u32,
    pub results: Vec<MetricsReport>,
    pub comparison: Vec<ComparisonRow>,
}

fn round1(x: f64) -> f64 {
    libm::round(x * 10.0) / 10.0
}

fn pct(x: f64) -> f64 {
    round1(x * 100.0)
}

/// Collects results in trojan order, then model order, and computes each
/// trojan's best-model row against [`HTM_ACCURACY`].
pub fn benchmark_report(results: &ResultsByTrojan) -> BenchmarkReport {
    let mut trojans: Vec<&String> = results.keys().collect();
    trojans.sort_by_key(|id| trojan_sort_key(id));

    let mut flat = Vec::new();
    let mut comparison = Vec::new();
    for id in trojans {
        let per_model = &results[id];
        flat.extend(per_model.values().cloned());
        // first model in column order wins ties
        let best = per_model
            .iter()
            .fold(None::<(&ModelKind, &MetricsReport)>, |acc, (k, r)| match acc {
                Some((_, b)) if b.metrics.accuracy >= r.metrics.accuracy => acc,
                _ => Some((k, r)),
            });
        if let Some((kind, r)) = best {
            let best_accuracy = pct(r.metrics.accuracy);
            let htm = htm_accuracy(id);
            comparison.push(ComparisonRow {
                trojan_id: id.clone(),
                best_model: String::from(kind.tag()),
                best_accuracy,
                htm_accuracy: htm,
                delta: htm.map(|h| round1(best_accuracy - h)),
            });
        }
    }
    BenchmarkReport { format_version: REPORT_FORMAT_VERSION, results: flat, comparison }
}

const METRIC_ROWS: [&str; 5] = ["Accuracy", "F1", "Precision", "Recall", "AUC"];

fn metric_cell(r: &MetricsReport, row: &str) -> String {
    let m = &r.metrics;
    let (value, undefined) = match row {
        "Accuracy" => (m.accuracy, false),
        "F1" => (m.f1, m.undefined.f1),
        "Precision" => (m.precision, m.undefined.precision),
        "Recall" => (m.recall, m.undefined.recall),
        _ => (m.auc, m.undefined.auc),
    };
    if undefined {
        String::from(UNDEFINED_CELL)
    } else {
        alloc::format!("{:.1}", value * 100.0)
    }
}

impl BenchmarkReport {
    fn models(&self) -> Vec<ModelKind> {
        let mut kinds: Vec<ModelKind> = self.results.iter().filter_map(|r| ModelKind::from_tag(&r.model)).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    fn trojans(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for r in &self.results {
            if !ids.contains(&r.trojan_id.as_str()) {
                ids.push(&r.trojan_id);
            }
        }
        ids
    }

    fn find(&self, trojan: &str, kind: ModelKind) -> Option<&MetricsReport> {
        self.results.iter().find(|r| r.trojan_id == trojan && r.model == kind.tag())
    }

    /// Rows of `[trojan, metric, cell per model]`.
    fn grid(&self) -> (Vec<ModelKind>, Vec<Vec<String>>) {
        let models = self.models();
        let mut rows = Vec::new();
        for id in self.trojans() {
            for (i, metric) in METRIC_ROWS.iter().enumerate() {
                let mut row = alloc::vec![
                    if i == 0 { String::from(id) } else { String::new() },
                    String::from(*metric)
                ];
                for &k in &models {
                    row.push(self.find(id, k).map_or_else(|| String::from(""), |r| metric_cell(r, metric)));
                }
                rows.push(row);
            }
        }
        (models, rows)
    }

    fn has_undefined(&self) -> bool {
        self.results.iter().any(|r| r.metrics.undefined.any())
    }

    /// Trojan × metric × model grid, percentages to one decimal.
    pub fn render_table(&self) -> String {
        let (models, rows) = self.grid();
        let mut header: Vec<String> = alloc::vec![String::from("Trojan"), String::from("Metric")];
        header.extend(models.iter().map(|k| String::from(k.title())));
        render_aligned(&header, &rows, self.has_undefined().then_some(UNDEFINED_NOTE))
    }

    /// Same grid as CSV.
    pub fn table_csv(&self) -> String {
        let (models, rows) = self.grid();
        let mut out = String::from("trojan,metric");
        for k in &models {
            out.push(',');
            out.push_str(k.tag());
        }
        out.push('\n');
        let mut current = String::new();
        for row in rows {
            if !row[0].is_empty() {
                current = row[0].clone();
            }
            out.push_str(&current);
            for cell in &row[1..] {
                out.push(',');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }

    /// Best-model accuracy against the baseline, one row per trojan.
    pub fn render_comparison(&self) -> String {
        let header: Vec<String> = ["Trojan", "Best Model", "Best Accuracy", "HTM Accuracy", "Difference"]
            .iter()
            .map(|s| String::from(*s))
            .collect();
        let rows: Vec<Vec<String>> = self
            .comparison
            .iter()
            .map(|c| {
                let title = ModelKind::from_tag(&c.best_model).map_or(c.best_model.as_str(), |k| k.title());
                alloc::vec![
                    c.trojan_id.clone(),
                    String::from(title),
                    alloc::format!("{:.1}", c.best_accuracy),
                    c.htm_accuracy.map_or_else(|| String::from(UNDEFINED_CELL), |h| alloc::format!("{h:.1}")),
                    c.delta.map_or_else(|| String::from(UNDEFINED_CELL), |d| alloc::format!("{d:+.1}")),
                ]
            })
            .collect();
        render_aligned(&header, &rows, None)
    }
}

fn render_aligned(header: &[String], rows: &[Vec<String>], note: Option<&str>) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        for (i, cell) in cells.iter().enumerate().take(cols) {
            let pad = widths[i] - cell.chars().count();
            if i < 2 {
                out.push_str(cell);
                out.extend(core::iter::repeat_n(' ', pad));
            } else {
                out.extend(core::iter::repeat_n(' ', pad));
                out.push_str(cell);
            }
            if i + 1 < cols {
                out.push_str("  ");
            }
        }
        let trimmed = out.trim_end_matches(' ').len();
        out.truncate(trimmed);
        out.push('\n');
    };
    line(&mut out, header);
    let rule: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
    out.extend(core::iter::repeat_n('-', rule));
    out.push('\n');
    for row in rows {
        line(&mut out, row);
    }
    if let Some(note) = note {
        let _ = writeln!(out, "\n{note}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::{ConfusionMatrix, Metrics};

    fn report(trojan: &str, kind: ModelKind, accuracy: f64) -> MetricsReport {
        MetricsReport {
            trojan_id: String::from(trojan),
            model: String::from(kind.tag()),
            metrics: Metrics { accuracy, precision: accuracy, recall: accuracy, f1: accuracy, auc: accuracy, ..Default::default() },
            confusion: ConfusionMatrix::default(),
            roc: alloc::vec![[0.0, 0.0], [1.0, 1.0]],
        }
    }

    fn results(entries: &[(&str, ModelKind, f64)]) -> ResultsByTrojan {
        let mut map = ResultsByTrojan::new();
        for &(t, k, a) in entries {
            map.entry(String::from(t)).or_default().insert(k, report(t, k, a));
        }
        map
    }

    #[test]
    fn single_cell_renders_one_decimal() {
        let r = benchmark_report(&results(&[("T400", ModelKind::NeuralNetwork, 0.704)]));
        let table = r.render_table();
        assert!(table.contains("70.4"), "{table}");
        assert!(table.contains("Neural Network"));
        assert!(r.table_csv().contains("T400,Accuracy,70.4"));
    }

    #[test]
    fn comparison_against_baseline() {
        let r = benchmark_report(&results(&[
            ("T600", ModelKind::NeuralNetwork, 0.704),
            ("T600", ModelKind::GradientBoosting, 0.630),
            ("T600", ModelKind::RandomForest, 0.595),
        ]));
        let row = &r.comparison[0];
        assert_eq!(row.best_model, "neural_network");
        assert_eq!(row.best_accuracy, 70.4);
        assert_eq!(row.htm_accuracy, Some(63.5));
        assert_eq!(row.delta, Some(6.9));
        assert!(r.render_comparison().contains("+6.9"));
    }

    #[test]
    fn unknown_trojan_has_no_baseline() {
        let r = benchmark_report(&results(&[("T2000", ModelKind::NaiveBayes, 0.536)]));
        assert_eq!(r.comparison[0].htm_accuracy, None);
        assert!(r.render_comparison().contains(UNDEFINED_CELL));
    }

    #[test]
    fn undefined_metric_gets_dash_and_note() {
        let mut rep = report("T500", ModelKind::NaiveBayes, 0.5);
        rep.metrics.precision = 0.0;
        rep.metrics.undefined.precision = true;
        let mut map = ResultsByTrojan::new();
        map.entry(String::from("T500")).or_default().insert(ModelKind::NaiveBayes, rep);
        let table = benchmark_report(&map).render_table();
        assert!(table.contains(UNDEFINED_CELL));
        assert!(table.contains(UNDEFINED_NOTE));
    }

    #[test]
    fn trojans_sorted_numerically() {
        let r = benchmark_report(&results(&[
            ("T1000", ModelKind::NaiveBayes, 0.5),
            ("T400", ModelKind::NaiveBayes, 0.5),
            ("T800", ModelKind::NaiveBayes, 0.5),
        ]));
        let ids: Vec<&str> = r.comparison.iter().map(|c| c.trojan_id.as_str()).collect();
        assert_eq!(ids, ["T400", "T800", "T1000"]);
    }
}
