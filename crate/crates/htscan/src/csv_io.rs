//! Power-trace CSV files.
//!
//! A file holds traces of one trojan either one per row or one per column.
//! Labels come from a `triggered`/`disabled` token in the file name, the
//! parent directory name, or a dedicated label field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use htscan_core::{Dataset, InputMode, PowerTrace, TrojanState};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    RowPerTrace,
    ColumnPerTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    /// `..._triggered.csv` / `..._disabled.csv`.
    #[default]
    FilenameToken,
    ParentDirectory,
    /// Zero-based column (row-per-trace) or row (column-per-trace) holding
    /// `triggered`/`disabled` or `1`/`0`.
    LabelField(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvOptions {
    pub layout: Layout,
    pub labeling: Labeling,
    /// Skip the first record.
    pub header: bool,
    /// Overrides the id found in the path.
    pub trojan_id: Option<String>,
    pub input_mode: InputMode,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            layout: Layout::RowPerTrace,
            labeling: Labeling::FilenameToken,
            header: false,
            trojan_id: None,
            input_mode: InputMode::FixedInput,
        }
    }
}

fn tokens(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(|c: char| !c.is_ascii_alphanumeric()).filter(|t| !t.is_empty()).map(|t| t.to_ascii_lowercase())
}

fn state_token(s: &str) -> Option<Result<TrojanState, String>> {
    let mut found = None;
    for t in tokens(s) {
        let state = match t.as_str() {
            "triggered" => TrojanState::Triggered,
            "disabled" => TrojanState::Disabled,
            _ => continue,
        };
        match found {
            Some(prev) if prev != state => return Some(Err(format!("`{s}` names both states"))),
            _ => found = Some(state),
        }
    }
    found.map(Ok)
}

fn parse_label(cell: &str) -> Option<TrojanState> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "triggered" | "1" => Some(TrojanState::Triggered),
        "disabled" | "0" => Some(TrojanState::Disabled),
        _ => None,
    }
}

fn is_trojan_token(t: &str) -> bool {
    t.len() > 1 && t.starts_with('t') && t[1..].bytes().all(|b| b.is_ascii_digit())
}

/// `T<digits>` token of the file name or a parent directory, else the
/// first token of the file stem.
pub fn trojan_id_from_path(path: &Path) -> Option<String> {
    let stem = path.file_stem()?.to_string_lossy().into_owned();
    let from_stem = tokens(&stem).find(|t| is_trojan_token(t));
    let from_dirs = || {
        path.parent()?
            .components()
            .rev()
            .find_map(|c| tokens(&c.as_os_str().to_string_lossy()).find(|t| is_trojan_token(t)))
    };
    if let Some(t) = from_stem.or_else(from_dirs) {
        return Some(t.to_ascii_uppercase());
    }
    stem.split(['_', '-']).find(|t| !t.is_empty()).map(str::to_owned)
}

fn state_from_path(path: &Path, labeling: Labeling) -> Result<Option<TrojanState>> {
    let source = match labeling {
        Labeling::LabelField(_) => return Ok(None),
        Labeling::FilenameToken => path.file_stem().map(|s| s.to_string_lossy().into_owned()),
        Labeling::ParentDirectory => {
            path.parent().and_then(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned())
        }
    };
    let label_err = |reason: String| Error::Label { path: path.to_path_buf(), reason };
    match source.as_deref().and_then(state_token) {
        Some(Ok(s)) => Ok(Some(s)),
        Some(Err(reason)) => Err(label_err(reason)),
        None => Err(label_err(format!(
            "no `triggered` or `disabled` token in the {}",
            if labeling == Labeling::FilenameToken { "file name" } else { "parent directory name" }
        ))),
    }
}

fn read_records(path: &Path, header: bool) -> Result<Vec<(usize, Vec<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|source| Error::Csv { path: path.to_path_buf(), source })?;
        if header && i == 0 {
            continue;
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec.position().map_or(i + 1, |p| p.line() as usize);
        out.push((row, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_cell(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse { path: path.to_path_buf(), row, column, cell: cell.to_owned() }),
    }
}

fn shape_error(path: &Path, msg: String) -> Error {
    Error::Data { path: path.to_path_buf(), source: htscan_core::Error::Shape(msg) }
}

fn label_cell(path: &Path, row: usize, column: usize, cell: &str) -> Result<TrojanState> {
    parse_label(cell).ok_or_else(|| Error::Label {
        path: path.to_path_buf(),
        reason: format!("row {row}, column {column}: label {cell:?} is not triggered/disabled/1/0"),
    })
}

/// Loads one CSV file as a dataset.
pub fn load_csv_dataset(path: &Path, layout: Layout, labeling: Labeling) -> Result<Dataset> {
    load_csv_with(path, &CsvOptions { layout, labeling, ..Default::default() })
}

pub fn load_csv_with(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let records = read_records(path, opts.header)?;
    if records.is_empty() {
        return Err(Error::Data { path: path.to_path_buf(), source: htscan_core::Error::EmptyDataset });
    }
    let trojan_id = match &opts.trojan_id {
        Some(id) => id.clone(),
        None => trojan_id_from_path(path).ok_or_else(|| Error::Label {
            path: path.to_path_buf(),
            reason: "cannot derive a trojan id from the path".into(),
        })?,
    };
    let file_state = state_from_path(path, opts.labeling)?;
    let label_field = match opts.labeling {
        Labeling::LabelField(i) => Some(i),
        _ => None,
    };

    let width = records[0].1.len();
    if let Some((row, r)) = records.iter().find(|(_, r)| r.len() != width) {
        return Err(shape_error(path, format!("row {row} has {} fields, row {} has {width}", r.len(), records[0].0)));
    }
    if let Some(i) = label_field {
        let extent = if opts.layout == Layout::RowPerTrace { width } else { records.len() };
        if i >= extent {
            return Err(Error::config("labeling.label_field", format!("index {i} out of range for {}", path.display())));
        }
    }

    let mut pairs: Vec<(Vec<f64>, TrojanState)> = Vec::new();
    match opts.layout {
        Layout::RowPerTrace => {
            for (row, rec) in &records {
                let mut samples = Vec::with_capacity(width);
                let mut state = file_state;
                for (c, cell) in rec.iter().enumerate() {
                    if Some(c) == label_field {
                        state = Some(label_cell(path, *row, c + 1, cell)?);
                    } else {
                        samples.push(parse_cell(path, *row, c + 1, cell)?);
                    }
                }
                pairs.push((samples, state.expect("state resolved")));
            }
        }
        Layout::ColumnPerTrace => {
            let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(records.len()); width];
            let mut states = vec![file_state; width];
            for (r, (row, rec)) in records.iter().enumerate() {
                for (c, cell) in rec.iter().enumerate() {
                    if Some(r) == label_field {
                        states[c] = Some(label_cell(path, *row, c + 1, cell)?);
                    } else {
                        cols[c].push(parse_cell(path, *row, c + 1, cell)?);
                    }
                }
            }
            pairs.extend(cols.into_iter().zip(states).map(|(s, st)| (s, st.expect("state resolved"))));
        }
    }

    let mut traces = Vec::with_capacity(pairs.len());
    for (samples, state) in pairs {
        let t = PowerTrace::new(samples, trojan_id.clone(), state)
            .map_err(|source| Error::Data { path: path.to_path_buf(), source })?;
        traces.push(t.with_input_mode(opts.input_mode));
    }
    Dataset::new(traces).map_err(|source| Error::Data { path: path.to_path_buf(), source })
}

/// Loads several files of one trojan and concatenates them in order.
pub fn load_csv_files(paths: &[PathBuf], opts: &CsvOptions) -> Result<Dataset> {
    let mut parts = Vec::with_capacity(paths.len());
    for p in paths {
        parts.push(load_csv_with(p, opts)?);
    }
    let first = paths.first().cloned().unwrap_or_default();
    Dataset::concat(parts).map_err(|source| Error::Data { path: first, source })
}

/// Writes traces one per row. With `label_column`, each row starts with
/// the trace state, loadable with [`Labeling::LabelField`]`(0)`.
pub fn write_csv(path: &Path, traces: &[PowerTrace], label_column: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for t in traces {
        let mut first = true;
        if label_column {
            write!(w, "{}", t.state.as_str()).map_err(io)?;
            first = false;
        }
        for x in &t.samples {
            if !first {
                w.write_all(b",").map_err(io)?;
            }
            // shortest representation that parses back to the same f64
            write!(w, "{x}").map_err(io)?;
            first = false;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `<dir>/<id>_disabled.csv` and `<dir>/<id>_triggered.csv`.
pub fn write_state_files(dir: &Path, dataset: &Dataset) -> Result<[PathBuf; 2]> {
    let id = dataset.trojan_id().unwrap_or("dataset");
    let mut out = [PathBuf::new(), PathBuf::new()];
    for (slot, state) in out.iter_mut().zip([TrojanState::Disabled, TrojanState::Triggered]) {
        let traces: Vec<PowerTrace> = dataset.traces().iter().filter(|t| t.state == state).cloned().collect();
        let path = dir.join(format!("{id}_{}.csv", state.as_str()));
        write_csv(&path, &traces, false)?;
        *slot = path;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_and_state_from_names() {
        assert_eq!(trojan_id_from_path(Path::new("data/T500_triggered.csv")).as_deref(), Some("T500"));
        assert_eq!(trojan_id_from_path(Path::new("AES-T700/run1.csv")).as_deref(), Some("T700"));
        assert_eq!(trojan_id_from_path(Path::new("out/SYN_disabled.csv")).as_deref(), Some("SYN"));
        assert_eq!(state_token("T500_triggered"), Some(Ok(TrojanState::Triggered)));
        assert_eq!(state_token("t500-Disabled-2"), Some(Ok(TrojanState::Disabled)));
        assert_eq!(state_token("t500"), None);
        assert!(matches!(state_token("disabled_triggered"), Some(Err(_))));
    }

    #[test]
    fn labels() {
        assert_eq!(parse_label(" Triggered "), Some(TrojanState::Triggered));
        assert_eq!(parse_label("0"), Some(TrojanState::Disabled));
        assert_eq!(parse_label("maybe"), None);
    }
}
