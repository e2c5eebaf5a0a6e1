//! Versioned JSON model files.
//!
//! ```text
//! {"format_version": 1, "kind": "random_forest", "schema_fingerprint": "…",
//!  "params": {…}, "checksum": "<sha256 of compact params JSON>"}
//! ```

use std::path::Path;

use htscan_core::classifiers::{Model, ModelKind, TrainedModel};
use htscan_core::features::SchemaId;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub kind: String,
    pub schema_fingerprint: String,
    pub params: Value,
    pub checksum: String,
}

fn checksum(params: &Value) -> String {
    let compact = serde_json::to_string(params).expect("Value serializes");
    hex::encode(Sha256::digest(compact.as_bytes()))
}

impl ModelFile {
    pub fn from_model(model: &TrainedModel) -> Self {
        let tagged = serde_json::to_value(&model.model).expect("models serialize");
        let params = tagged.get("params").cloned().unwrap_or(Value::Null);
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: model.kind().tag().to_owned(),
            schema_fingerprint: model.schema.to_string(),
            checksum: checksum(&params),
            params,
        }
    }

    pub fn into_model(self, path: &Path) -> Result<TrainedModel> {
        let format = |reason: String| Error::Format { path: path.to_path_buf(), reason };
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(format(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if ModelKind::from_tag(&self.kind).is_none() {
            let known: Vec<&str> = ModelKind::ALL.iter().map(|k| k.tag()).collect();
            return Err(format(format!(
                "unknown model kind `{}` for format version {MODEL_FORMAT_VERSION} (known: {})",
                self.kind,
                known.join(", ")
            )));
        }
        if checksum(&self.params) != self.checksum {
            return Err(Error::Integrity { path: path.to_path_buf(), reason: "params checksum mismatch".into() });
        }
        let schema = u64::from_str_radix(&self.schema_fingerprint, 16)
            .map(SchemaId)
            .map_err(|_| format(format!("bad schema fingerprint `{}`", self.schema_fingerprint)))?;
        let tagged = serde_json::json!({ "kind": self.kind, "params": self.params });
        let model: Model = serde_json::from_value(tagged)
            .map_err(|e| Error::Integrity { path: path.to_path_buf(), reason: e.to_string() })?;
        Ok(TrainedModel { schema, model })
    }
}

pub fn to_json(model: &TrainedModel) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model file serializes");
    s.push('\n');
    s
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path)
}

/// Parses model JSON; `path` is only used in error messages.
pub fn parse_model(text: &str, path: &Path) -> Result<TrainedModel> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Integrity {
        path: path.to_path_buf(),
        reason: if e.is_eof() { format!("truncated file ({e})") } else { format!("malformed JSON ({e})") },
    })?;
    let version = value.get("format_version").and_then(Value::as_u64);
    if version != Some(u64::from(MODEL_FORMAT_VERSION)) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: match version {
                Some(v) => format!("model format version {v} is not supported (expected {MODEL_FORMAT_VERSION})"),
                None => "missing `format_version`".into(),
            },
        });
    }
    let file: ModelFile = serde_json::from_value(value)
        .map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })?;
    file.into_model(path)
}
