use std::fs;
use std::path::Path;
use std::process::Command;

use htscan::config::{Overrides, PipelineConfig};
use htscan::core::classifiers::Model;
use htscan::core::eval::report::BenchmarkReport;
use htscan::core::split::split;
use htscan::persist::load_model;
use htscan::pipeline::{self, cmd_run, cmd_simulate, extract_all, load_dataset, INCOMPLETE_MARKER, REPORT_FILE};

fn config(dir: &Path, json: &str) -> PipelineConfig {
    PipelineConfig::from_json(json, dir, &Overrides::default()).unwrap()
}

const SEPARABLE: &str = r#"{
    "seed": 41,
    "output_dir": "out",
    "datasets": [{"synthetic": {"n_per_class": 250, "separability": 1.0, "trojan_id": "T100"}}]
}"#;

#[test]
fn separable_run_scores_every_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SEPARABLE);
    let out = cmd_run(&cfg).unwrap();
    assert_eq!(out.report.results.len(), 4);
    for r in &out.report.results {
        assert!(r.metrics.accuracy >= 0.95, "{} {}", r.model, r.metrics.accuracy);
    }
    let base = dir.path().join("out");
    assert!(!base.join(INCOMPLETE_MARKER).exists());
    for f in [REPORT_FILE, "metadata.json", "table.txt", "table.csv"] {
        assert!(base.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read_dir(base.join("models")).unwrap().count(), 4);

    let text = fs::read_to_string(base.join(REPORT_FILE)).unwrap();
    let back: BenchmarkReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out.report);
    assert_eq!(pipeline::render_report_json(&back), text);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = cmd_run(&config(dir.path(), &SEPARABLE.replace("\"out\"", "\"a\""))).unwrap();
    let b = cmd_run(&config(dir.path(), &SEPARABLE.replace("\"out\"", "\"b\""))).unwrap();
    let ra = fs::read(dir.path().join("a").join(REPORT_FILE)).unwrap();
    let rb = fs::read(dir.path().join("b").join(REPORT_FILE)).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(a.report_json, b.report_json);
    for name in ["T100_random_forest.json", "T100_neural_network.json"] {
        let ma = fs::read(dir.path().join("a/models").join(name)).unwrap();
        let mb = fs::read(dir.path().join("b/models").join(name)).unwrap();
        assert_eq!(ma, mb, "{name}");
    }
}

#[test]
fn standardizers_see_only_training_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SEPARABLE);
    cmd_run(&cfg).unwrap();

    let ds = load_dataset(&cfg.datasets[0]).unwrap();
    let (train, test) = split(&ds, &cfg.split).unwrap();
    let train_fv = extract_all(&train).unwrap();
    let all_fv: Vec<_> = train_fv.iter().cloned().chain(extract_all(&test).unwrap()).collect();
    let mean = |rows: &[htscan::core::features::FeatureVector], j: usize| {
        rows.iter().map(|v| v.values[j]).sum::<f64>() / rows.len() as f64
    };

    let models = dir.path().join("out/models");
    for file in ["T100_naive_bayes.json", "T100_neural_network.json"] {
        let m = load_model(&models.join(file)).unwrap();
        let st = match &m.model {
            Model::NaiveBayes(nb) => nb.standardizer.clone(),
            Model::NeuralNetwork(nn) => nn.standardizer.clone(),
            _ => unreachable!(),
        };
        let mut differs_from_all = false;
        for j in 0..st.dim() {
            let want = mean(&train_fv, j);
            assert!((st.mean[j] - want).abs() <= 1e-12 * want.abs().max(1.0), "{file} column {j}");
            differs_from_all |= (st.mean[j] - mean(&all_fv, j)).abs() > 1e-9 * want.abs().max(1.0);
        }
        assert!(differs_from_all, "{file}");
    }
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::from_json(
        r#"{"output_dir": "o", "datasets": [{"csv": {"files": ["nowhere/T9_disabled.csv"]}}]}"#,
        dir.path(),
        &Overrides::default(),
    )
    .unwrap();
    let err = cmd_run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("T9_disabled.csv"), "{err}");
}

#[test]
fn failed_run_leaves_marker_with_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("T2_disabled.csv"), "1,2,3,4,5,6,7,8\n").unwrap();
    fs::write(dir.path().join("T2_triggered.csv"), "1,2,3,4,x,6,7,8\n").unwrap();
    let cfg = config(
        dir.path(),
        r#"{"output_dir": "o", "datasets": [{"csv": {"files": ["T2_disabled.csv", "T2_triggered.csv"]}}]}"#,
    );
    let err = cmd_run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let marker = fs::read_to_string(dir.path().join("o").join(INCOMPLETE_MARKER)).unwrap();
    assert!(marker.contains("row 1, column 5"), "{marker}");
}

#[test]
fn simulate_writes_reproducible_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"seed": 5, "output_dir": "sim", "datasets": [{"synthetic": {"n_per_class": 100, "trojan_id": "T42"}}]}"#;
    let cfg = config(dir.path(), json);
    let paths = cmd_simulate(&cfg).unwrap();
    assert_eq!(paths.len(), 2);
    let first: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
    for bytes in &first {
        assert_eq!(bytes.iter().filter(|&&b| b == b'\n').count(), 100);
    }
    cmd_simulate(&cfg).unwrap();
    let second: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);

    let bad = config(dir.path(), &json.replace("\"n_per_class\": 100", "\"separability\": 2.0"));
    let err = cmd_simulate(&bad).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("datasets[0].synthetic.separability"), "{err}");
}

#[test]
fn unknown_feature_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SEPARABLE);
    let err = pipeline::cmd_kde(&cfg, "T100", "loudness", 64).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    for name in htscan::core::features::FEATURE_NAMES {
        assert!(msg.contains(name), "{name} missing from {msg}");
    }

    let kde = pipeline::cmd_kde(&cfg, "T100", "variance", 64).unwrap();
    assert!(kde.overlap < 0.2, "{}", kde.overlap);
    assert!(kde.csv_path.is_file() && kde.svg_path.is_file());
}

fn htscan(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_htscan"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HTSCAN_OUTPUT_DIR")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let (code, stdout, _) = htscan(&["simulate", "-o", "sim", "--n-per-class", "30", "--trojan-id", "T7"], d);
    assert_eq!(code, 0);
    assert!(stdout.contains("T7_triggered.csv"));

    let (code, _, stderr) = htscan(&["simulate", "--separability", "2"], d);
    assert_eq!(code, 2);
    assert!(stderr.contains("separability"), "{stderr}");

    fs::write(
        d.join("run.json"),
        r#"{"seed": 3, "output_dir": "run", "datasets": [{"csv": {"files": ["sim/T7_disabled.csv", "sim/T7_triggered.csv"]}}]}"#,
    )
    .unwrap();
    let (code, stdout, stderr) = htscan(&["run", "-c", "run.json", "--models", "naive_bayes,random_forest"], d);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("Naive Bayes") || stdout.contains("naive_bayes"), "{stdout}");

    let (code, stdout, _) = htscan(&["inspect-model", "run/models/T7_naive_bayes.json"], d);
    assert_eq!(code, 0);
    assert!(stdout.contains("naive_bayes"), "{stdout}");

    let text = fs::read_to_string(d.join("run/models/T7_naive_bayes.json")).unwrap();
    fs::write(d.join("cut.json"), &text[..text.len() / 3]).unwrap();
    let (code, _, stderr) = htscan(&["inspect-model", "cut.json"], d);
    assert_eq!(code, 3, "{stderr}");

    let (code, _, stderr) = htscan(&["kde", "-c", "run.json", "--trojan", "T7", "--feature", "nope"], d);
    assert_eq!(code, 2);
    assert!(stderr.contains("spectral_flatness"), "{stderr}");

    fs::write(d.join("gone.json"), r#"{"datasets": [{"csv": {"files": ["missing.csv"]}}]}"#).unwrap();
    let (code, _, stderr) = htscan(&["run", "-c", "gone.json"], d);
    assert_eq!(code, 3);
    assert!(stderr.contains("missing.csv"), "{stderr}");

    let (code, _, _) = htscan(&["run", "-c", "no-such-config.json"], d);
    assert_ne!(code, 0);
}
