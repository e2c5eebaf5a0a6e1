use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use htscan::config::{DatasetSource, Overrides, PipelineConfig, DEFAULT_GRID_POINTS};
use htscan::core::classifiers::ModelKind;
use htscan::core::synth::Effect;
use htscan::error::{exit, Error, Stage, StageError};
use htscan::pipeline;

#[derive(Parser)]
#[command(name = "htscan", version, about = "Hardware trojan detection from power side-channel traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Pipeline config (JSON).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory; beats the config file and HTSCAN_OUTPUT_DIR.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Global seed; stage seeds not pinned in the config derive from it.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic datasets as <id>_disabled.csv / <id>_triggered.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_per_class: Option<usize>,
        #[arg(long)]
        trace_len: Option<usize>,
        #[arg(long)]
        separability: Option<f64>,
        /// spike_train | harmonic_injection | variance_inflation | duty_drain
        #[arg(long, value_parser = parse_effect)]
        effect: Option<Effect>,
        #[arg(long)]
        trojan_id: Option<String>,
    },
    /// Split, extract, train, evaluate and write reports.
    Run {
        #[command(flatten)]
        common: Common,
        /// Comma-separated model kinds, e.g. random_forest,naive_bayes.
        #[arg(long, value_delimiter = ',', value_parser = parse_model)]
        models: Option<Vec<ModelKind>>,
        /// Skip writing models/<id>_<kind>.json.
        #[arg(long)]
        no_save_models: bool,
    },
    /// Per-class kernel density curves of one feature (CSV + SVG).
    Kde {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trojan: String,
        #[arg(long)]
        feature: String,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
    /// Print a summary of a saved model file.
    InspectModel { path: PathBuf },
}

fn parse_effect(s: &str) -> Result<Effect, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| {
        "expected spike_train, harmonic_injection, variance_inflation or duty_drain".to_owned()
    })
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    ModelKind::from_tag(s).ok_or_else(|| {
        let tags: Vec<&str> = ModelKind::ALL.iter().map(|k| k.tag()).collect();
        format!("expected one of {}", tags.join(", "))
    })
}

const DEFAULT_SIMULATE: &str = r#"{"datasets": [{"synthetic": {}}], "models": []}"#;

fn load_config(common: &Common, models: Option<Vec<ModelKind>>, fallback: Option<&str>) -> Result<PipelineConfig, StageError> {
    let overrides = Overrides { seed: common.seed, output_dir: common.out.clone(), models };
    match (&common.config, fallback) {
        (Some(path), _) => PipelineConfig::from_file(path, &overrides),
        (None, Some(text)) => PipelineConfig::from_json(text, Path::new("."), &overrides),
        (None, None) => Err(Error::config("--config", "a config file is required")),
    }
    .stage("config")
}

fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Simulate { common, n_per_class, trace_len, separability, effect, trojan_id } => {
            let mut cfg = load_config(&common, None, Some(DEFAULT_SIMULATE))?;
            for src in &mut cfg.datasets {
                if let DatasetSource::Synthetic(s) = src {
                    if let Some(v) = n_per_class {
                        s.n_per_class = v;
                    }
                    if let Some(v) = trace_len {
                        s.trace_len = v;
                    }
                    if let Some(v) = separability {
                        s.separability = v;
                    }
                    if let Some(v) = effect {
                        s.effect = v;
                    }
                    if let Some(v) = &trojan_id {
                        s.trojan_id = v.clone();
                    }
                }
            }
            for path in pipeline::cmd_simulate(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Run { common, models, no_save_models } => {
            let mut cfg = load_config(&common, models, None)?;
            if no_save_models {
                cfg.save_models = false;
            }
            let out = pipeline::cmd_run(&cfg)?;
            println!("{}", out.report.render_table());
            println!("{}", out.report.render_comparison());
            for ((trojan, feature), ov) in &out.kde_overlaps {
                println!("kde {trojan}/{feature}: overlap coefficient {ov:.4}");
            }
            println!("report: {}", out.output_dir.join(pipeline::REPORT_FILE).display());
        }
        Command::Kde { common, trojan, feature, grid_points } => {
            let cfg = load_config(&common, None, None)?;
            let out = pipeline::cmd_kde(&cfg, &trojan, &feature, grid_points)?;
            println!("overlap coefficient: {:.4}", out.overlap);
            println!("bandwidths: disabled {:.6e}, triggered {:.6e}", out.disabled.bandwidth, out.triggered.bandwidth);
            println!("{}", out.csv_path.display());
            println!("{}", out.svg_path.display());
        }
        Command::InspectModel { path } => {
            print!("{}", pipeline::inspect_model(&path).stage("inspect")?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::from(exit::OK as u8),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(exit::INTERNAL as u8)
        }
    }
}
