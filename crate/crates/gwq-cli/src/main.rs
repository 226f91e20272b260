//! `gwq`: groundwater-quality pipeline driver.
//!
//! Subcommands: summarize | clean | gwqi | train | evaluate | predict |
//! synth. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
//! error. Every command is deterministic given its input bytes and
//! configuration; reruns overwrite outputs with identical bytes.

mod config;
mod svg;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gwq::bundle::ModelBundle;
use gwq::evaluation;
use gwq::gwqi;
use gwq::preprocess;
use gwq::synth;
use gwq::table::{summarize, SampleTable, CORE_INDICATORS};

use config::{resolve, FileConfig, FlagOverrides, Format, RunConfig};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> CliError {
        CliError { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::new(1, message)
    }

    pub fn data(message: impl Into<String>) -> CliError {
        CliError::new(2, message)
    }

    pub fn internal(message: impl Into<String>) -> CliError {
        CliError::new(3, message)
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<gwq::Error> for CliError {
    fn from(e: gwq::Error) -> CliError {
        CliError::data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "gwq",
    about = "Groundwater quality pipeline: cleaning, quality indices, boosted models, evaluation",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Input CSV of water samples.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for fold shuffling, generation and weight fitting.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of cross-validation folds.
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Report formats, comma separated: json, csv, svg.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-indicator descriptive statistics.
    Summarize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Impute, deduplicate and remove fence outliers.
    Clean {
        #[command(flatten)]
        common: CommonArgs,
        /// Tukey fence multiplier.
        #[arg(long)]
        iqr_k: Option<f64>,
    },
    /// Score every row against WHO limits and band the results.
    Gwqi {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file overriding the default WHO limits.
        #[arg(long)]
        limits: Option<PathBuf>,
    },
    /// Fit both boosted models plus blend weights and save a bundle.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        limits: Option<PathBuf>,
        #[command(flatten)]
        de: DeArgs,
    },
    /// Cross-validate both models and their blend; write reports.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        limits: Option<PathBuf>,
        #[command(flatten)]
        de: DeArgs,
    },
    /// Score a feature CSV with a saved model bundle.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// Bundle JSON produced by `gwq train`.
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Generate a synthetic sample table.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of rows to generate.
        #[arg(long)]
        rows: Option<usize>,
    },
}

#[derive(Args, Default)]
struct DeArgs {
    /// Differential evolution population size (NP).
    #[arg(long = "de-np")]
    de_np: Option<usize>,
    /// Differential evolution scaling factor (F).
    #[arg(long = "de-f")]
    de_f: Option<f64>,
    /// Differential evolution crossover rate (CR).
    #[arg(long = "de-cr")]
    de_cr: Option<f64>,
    /// Differential evolution generations (T).
    #[arg(long = "de-iters")]
    de_iters: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(
    common: &CommonArgs,
    limits: Option<PathBuf>,
    iqr_k: Option<f64>,
    rows: Option<usize>,
    de: &DeArgs,
) -> CliResult<RunConfig> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = FlagOverrides {
        input: common.input.clone(),
        out_dir: common.out_dir.clone(),
        seed: common.seed,
        folds: common.folds,
        formats: common.format.clone(),
        limits,
        iqr_k,
        rows,
        de_np: de.de_np,
        de_f: de.de_f,
        de_cr: de.de_cr,
        de_iters: de.de_iters,
    };
    resolve(file, flags)
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Summarize { common } => {
            let cfg = load_config(&common, None, None, None, &DeArgs::default())?;
            cmd_summarize(&cfg)
        }
        Command::Clean { common, iqr_k } => {
            let cfg = load_config(&common, None, iqr_k, None, &DeArgs::default())?;
            cmd_clean(&cfg)
        }
        Command::Gwqi { common, limits } => {
            let cfg = load_config(&common, limits, None, None, &DeArgs::default())?;
            cmd_gwqi(&cfg)
        }
        Command::Train { common, limits, de } => {
            let cfg = load_config(&common, limits, None, None, &de)?;
            cmd_train(&cfg)
        }
        Command::Evaluate { common, limits, de } => {
            let cfg = load_config(&common, limits, None, None, &de)?;
            cmd_evaluate(&cfg)
        }
        Command::Predict { common, bundle } => {
            let cfg = load_config(&common, None, None, None, &DeArgs::default())?;
            cmd_predict(&cfg, &bundle)
        }
        Command::Synth { common, rows } => {
            let cfg = load_config(&common, None, None, rows, &DeArgs::default())?;
            cmd_synth(&cfg)
        }
    }
}

fn require_input(cfg: &RunConfig) -> CliResult<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| CliError::usage("no input file (use --input or the config file)"))
}

fn load_table(cfg: &RunConfig) -> CliResult<SampleTable> {
    let path = require_input(cfg)?;
    SampleTable::load_csv(path, &cfg.schema).map_err(CliError::from)
}

/// Writes every output or none: on any failure the files already written
/// by this command are removed before the error propagates.
fn write_outputs(out_dir: &Path, outputs: &[(String, String)]) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    for (name, content) in outputs {
        let path = out_dir.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            let message = format!("{}: {e}", path.display());
            for done in &written {
                let _ = std::fs::remove_file(done);
            }
            return Err(CliError::data(message));
        }
        written.push(path);
    }
    Ok(written)
}

/// Post-write validation: JSON must re-parse, CSV must have a header and
/// parse line by line, SVG must look like SVG.
fn validate_outputs(paths: &[PathBuf]) -> CliResult<()> {
    for path in paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        let ok = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str::<serde_json::Value>(&text).is_ok(),
            Some("csv") => text.lines().next().is_some_and(|h| !h.is_empty()),
            Some("svg") => text.starts_with("<svg") && text.trim_end().ends_with("</svg>"),
            _ => true,
        };
        if !ok {
            for p in paths {
                let _ = std::fs::remove_file(p);
            }
            return Err(CliError::internal(format!(
                "{}: output failed validation",
                path.display()
            )));
        }
    }
    Ok(())
}

fn report_written(paths: &[PathBuf]) {
    for path in paths {
        println!("wrote {}", path.display());
    }
}

fn cmd_summarize(cfg: &RunConfig) -> CliResult<()> {
    let table = load_table(cfg)?;
    let stats = summarize(&table)?;
    let paths =
        write_outputs(&cfg.out_dir, &[("summary.csv".to_string(), stats.to_csv_string())])?;
    validate_outputs(&paths)?;
    report_written(&paths);
    Ok(())
}

fn cmd_clean(cfg: &RunConfig) -> CliResult<()> {
    let table = load_table(cfg)?;
    let imputed = preprocess::impute(&table)?;
    let deduped = preprocess::dedup(&imputed);
    let columns: Vec<&str> = CORE_INDICATORS.to_vec();
    let (kept, report) = preprocess::iqr_filter(&deduped, &columns, cfg.iqr_k)?;

    // The cleaned table goes through the same CSV writer load_csv reads.
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", cfg.out_dir.display())))?;
    let cleaned_path = cfg.out_dir.join("cleaned.csv");
    kept.save_csv(&cleaned_path, &cfg.schema)?;
    let report_json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::internal(format!("outlier report: {e}")))?;
    let mut paths = write_outputs(&cfg.out_dir, &[("outliers.json".to_string(), report_json)])?;
    paths.insert(0, cleaned_path);
    validate_outputs(&paths)?;
    report_written(&paths);
    println!("kept {} of {} rows", kept.n_rows(), table.n_rows());
    Ok(())
}

fn cmd_gwqi(cfg: &RunConfig) -> CliResult<()> {
    let table = load_table(cfg)?;
    let scores = gwqi::compute_targets(&table, &cfg.limits)?;
    let mut out = String::from("row_id,gwqi,band\n");
    for (row, score) in table.rows().iter().zip(&scores) {
        let class = gwqi::classify(*score)?;
        out.push_str(&format!("{},{},{}\n", row.row_id, score, class.band.label()));
    }
    let paths = write_outputs(&cfg.out_dir, &[("gwqi.csv".to_string(), out)])?;
    validate_outputs(&paths)?;
    report_written(&paths);
    Ok(())
}

fn cmd_train(cfg: &RunConfig) -> CliResult<()> {
    let table = load_table(cfg)?;
    let bundle =
        ModelBundle::train(&table, &cfg.limits, &cfg.params_cat, &cfg.params_lgb, &cfg.de)?;
    let json = bundle.to_json_string()?;
    let paths = write_outputs(&cfg.out_dir, &[("model_bundle.json".to_string(), json)])?;
    validate_outputs(&paths)?;
    report_written(&paths);
    Ok(())
}

fn cmd_evaluate(cfg: &RunConfig) -> CliResult<()> {
    let table = load_table(cfg)?;
    let report = evaluation::cross_validate(
        &table,
        &cfg.limits,
        &cfg.params_cat,
        &cfg.params_lgb,
        &cfg.de,
        cfg.folds,
        cfg.seed,
    )?;

    let mut outputs = Vec::new();
    if cfg.formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::internal(format!("report: {e}")))?;
        outputs.push(("cv_report.json".to_string(), json));
    }
    if cfg.formats.contains(&Format::Csv) {
        outputs.push(("cv_metrics.csv".to_string(), report.to_csv_string()));
    }
    if cfg.formats.contains(&Format::Svg) {
        outputs.push(("importance.svg".to_string(), svg::importance_chart(&report.importances)));
    }
    let paths = write_outputs(&cfg.out_dir, &outputs)?;
    validate_outputs(&paths)?;
    report_written(&paths);

    let agg = &report.aggregates;
    for (name, m) in [("cat", &agg.cat), ("lgb", &agg.lgb), ("fusion", &agg.fusion)] {
        let r2 = m.validation.r2.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
        println!(
            "{name}: validation RMSE {:.4}, MSE {:.4}, MAE {:.4}, R2 {r2}",
            m.validation.rmse, m.validation.mse, m.validation.mae
        );
    }
    Ok(())
}

fn cmd_predict(cfg: &RunConfig, bundle_path: &Path) -> CliResult<()> {
    let bundle = ModelBundle::load(bundle_path)?;
    let table = load_table(cfg)?;
    let predictions = bundle.predict(&table)?;
    let mut out = String::from("row_id,prediction\n");
    for (row, p) in table.rows().iter().zip(&predictions) {
        out.push_str(&format!("{},{}\n", row.row_id, p));
    }
    let paths = write_outputs(&cfg.out_dir, &[("predictions.csv".to_string(), out)])?;
    validate_outputs(&paths)?;
    report_written(&paths);
    Ok(())
}

fn cmd_synth(cfg: &RunConfig) -> CliResult<()> {
    let table = synth::synth_generate(&synth::reference_summary(), cfg.synth_rows, cfg.seed)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", cfg.out_dir.display())))?;
    let path = cfg.out_dir.join("synthetic.csv");
    table.save_csv(&path, &cfg.schema)?;
    report_written(std::slice::from_ref(&path));
    Ok(())
}
