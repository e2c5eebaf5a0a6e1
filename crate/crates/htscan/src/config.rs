//! JSON pipeline configuration.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "output_dir": "out",
//!   "datasets": [
//!     {"synthetic": {"n_per_class": 250, "separability": 1.0, "effect": "variance_inflation"}},
//!     {"csv": {"files": ["T500_disabled.csv", "T500_triggered.csv"], "layout": "row_per_trace"}}
//!   ],
//!   "split": {"train_fraction": 0.8},
//!   "models": ["neural_network", {"model_kind": "random_forest", "rf": {"n_trees": 10}}],
//!   "kde": [{"trojan_id": "SYN", "feature": "variance"}]
//! }
//! ```
//!
//! Any `seed` left out of a stage is derived from the global seed and the
//! stage name. Relative paths are resolved against the config file.

use std::path::{Path, PathBuf};

use htscan_core::classifiers::{ModelKind, TrainConfig};
use htscan_core::features::feature_index;
use htscan_core::seed;
use htscan_core::split::SplitSpec;
use htscan_core::synth::SyntheticConfig;
use htscan_core::InputMode;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::csv_io::{CsvOptions, Labeling, Layout};
use crate::error::{Error, Result};

pub const OUTPUT_DIR_ENV: &str = "HTSCAN_OUTPUT_DIR";
pub const DEFAULT_GRID_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub layout: Layout,
    #[serde(default)]
    pub labeling: Labeling,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub trojan_id: Option<String>,
    #[serde(default)]
    pub input_mode: InputMode,
}

impl CsvSource {
    pub fn options(&self) -> CsvOptions {
        CsvOptions {
            layout: self.layout,
            labeling: self.labeling,
            header: self.header,
            trojan_id: self.trojan_id.clone(),
            input_mode: self.input_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticConfig),
    Csv(CsvSource),
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdeRequest {
    pub trojan_id: String,
    pub feature: String,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("htscan-out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub datasets: Vec<DatasetSource>,
    #[serde(default)]
    pub split: SplitSpec,
    pub models: Vec<TrainConfig>,
    #[serde(default)]
    pub kde: Vec<KdeRequest>,
    #[serde(default = "yes")]
    pub save_models: bool,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub models: Option<Vec<ModelKind>>,
}

fn set_missing(obj: &mut Value, key: &str, value: u64) {
    if let Some(map) = obj.as_object_mut() {
        map.entry(key).or_insert(json!(value));
    }
}

/// Fills absent stage seeds and expands shorthand entries in place.
fn patch(doc: &mut Value, overrides: &Overrides) -> Result<()> {
    let root = doc.as_object_mut().ok_or_else(|| Error::config("<root>", "expected a JSON object"))?;
    if let Some(s) = overrides.seed {
        root.insert("seed".into(), json!(s));
    }
    let global = match root.get("seed") {
        None => 0,
        Some(v) => v.as_u64().ok_or_else(|| Error::config("seed", "must be a non-negative integer"))?,
    };

    if let Some(Value::Array(sets)) = root.get_mut("datasets") {
        for (i, entry) in sets.iter_mut().enumerate() {
            if let Some(syn) = entry.get_mut("synthetic") {
                set_missing(syn, "seed", seed::derive_indexed(global, "synthetic", i as u64));
            }
        }
    }

    let split = root.entry("split").or_insert_with(|| json!({}));
    set_missing(split, "seed", seed::derive(global, "split"));

    if let Some(kinds) = &overrides.models {
        let entries = kinds.iter().map(|k| json!(k.tag())).collect();
        root.insert("models".into(), Value::Array(entries));
    }
    let models = root
        .entry("models")
        .or_insert_with(|| Value::Array(ModelKind::ALL.iter().map(|k| json!(k.tag())).collect()));
    if let Value::Array(list) = models {
        for entry in list.iter_mut() {
            if let Value::String(tag) = entry {
                *entry = json!({ "model_kind": tag });
            }
            let tag = entry.get("model_kind").and_then(Value::as_str).unwrap_or_default().to_owned();
            set_missing(entry, "seed", seed::derive(global, &format!("model/{tag}")));
        }
    }
    Ok(())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    /// Parses a config document. Relative paths in it are taken against
    /// `base_dir`; an output directory given by flag or environment is
    /// used as is.
    pub fn from_json(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        patch(&mut doc, overrides)?;
        let mut cfg: PipelineConfig =
            serde_json::from_value(doc).map_err(|e| Error::config("<document>", e.to_string()))?;
        for d in &mut cfg.datasets {
            if let DatasetSource::Csv(c) = d {
                for f in &mut c.files {
                    *f = resolve(base_dir, f);
                }
            }
        }
        cfg.output_dir = match (&overrides.output_dir, std::env::var_os(OUTPUT_DIR_ENV)) {
            (Some(flag), _) => flag.clone(),
            (None, Some(env)) if !env.is_empty() => PathBuf::from(env),
            _ => resolve(base_dir, &cfg.output_dir),
        };
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base, overrides).map_err(|e| match e {
            Error::Config { field, reason } => Error::config(field, format!("{reason} (in {})", path.display())),
            other => other,
        })
    }

    /// Checks ranges, names and that every input file exists.
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::config("datasets", "at least one dataset is required"));
        }
        for (i, d) in self.datasets.iter().enumerate() {
            match d {
                DatasetSource::Synthetic(s) => s.validate().map_err(|e| prefixed(&format!("datasets[{i}].synthetic"), e))?,
                DatasetSource::Csv(c) => {
                    if c.files.is_empty() {
                        return Err(Error::config(format!("datasets[{i}].csv.files"), "no files listed"));
                    }
                    for f in &c.files {
                        if !f.is_file() {
                            return Err(Error::io(f, std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found")));
                        }
                    }
                }
            }
        }
        self.split.validate().map_err(|e| prefixed("split", e))?;
        if self.models.is_empty() {
            return Err(Error::config("models", "at least one model is required"));
        }
        for (j, m) in self.models.iter().enumerate() {
            m.validate().map_err(|e| prefixed(&format!("models[{j}]"), e))?;
        }
        for (k, req) in self.kde.iter().enumerate() {
            validate_feature(&req.feature).map_err(|e| prefixed(&format!("kde[{k}]"), e))?;
            if req.grid_points < 2 {
                return Err(Error::config(format!("kde[{k}].grid_points"), "must be at least 2"));
            }
        }
        Ok(())
    }
}

pub fn validate_feature(name: &str) -> Result<()> {
    feature_index(name).map(|_| ()).map_err(|e| Error::config("feature", e.to_string()))
}

/// Re-roots a core config error under `path`.
fn prefixed(path: &str, e: impl Into<Error>) -> Error {
    match e.into() {
        Error::Core(htscan_core::Error::Config { field, reason }) => Error::config(format!("{path}.{field}"), reason),
        Error::Config { field, reason } => Error::config(format!("{path}.{field}"), reason),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"seed": 5, "datasets": [{"synthetic": {}}, {"synthetic": {"seed": 9}}]}"#;

    #[test]
    fn seeds_are_derived_when_absent() {
        let cfg = PipelineConfig::from_json(MINIMAL, Path::new("."), &Overrides::default()).unwrap();
        let DatasetSource::Synthetic(a) = &cfg.datasets[0] else { panic!() };
        let DatasetSource::Synthetic(b) = &cfg.datasets[1] else { panic!() };
        assert_eq!(a.seed, seed::derive_indexed(5, "synthetic", 0));
        assert_eq!(b.seed, 9);
        assert_eq!(cfg.split.seed, seed::derive(5, "split"));
        assert_eq!(cfg.models.len(), 4);
        assert_eq!(cfg.models[0].seed, seed::derive(5, "model/neural_network"));
    }

    #[test]
    fn flags_beat_file() {
        let o = Overrides { seed: Some(6), output_dir: Some("/tmp/x".into()), models: Some(vec![ModelKind::NaiveBayes]) };
        let cfg = PipelineConfig::from_json(MINIMAL, Path::new("/cfg"), &o).unwrap();
        assert_eq!(cfg.seed, 6);
        assert_eq!(cfg.split.seed, seed::derive(6, "split"));
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.models.len(), 1);
        assert_eq!(cfg.models[0].model_kind, ModelKind::NaiveBayes);
    }

    #[test]
    fn field_paths_in_errors() {
        let text = r#"{"datasets": [{"synthetic": {"separability": 2.0}}]}"#;
        let cfg = PipelineConfig::from_json(text, Path::new("."), &Overrides::default()).unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
        assert!(err.to_string().contains("datasets[0].synthetic.separability"), "{err}");

        let unknown = r#"{"datasets": [{"synthetic": {"separabilty": 0.5}}]}"#;
        assert!(PipelineConfig::from_json(unknown, Path::new("."), &Overrides::default()).is_err());
    }
}
