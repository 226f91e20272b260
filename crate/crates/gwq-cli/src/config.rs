//! Run configuration: defaults, optional JSON config file, CLI flag
//! overrides. Flags beat the file, the file beats the defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use gwq::de::DeConfig;
use gwq::fusion;
use gwq::gbtree::Hyperparams;
use gwq::gwqi::WhoLimits;
use gwq::CsvSchema;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::usage(format!(
                "unknown format {other:?} (expected json, csv or svg)"
            ))),
        }
    }
}

/// Partial hyperparameter override from the config file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperPatch {
    pub n_estimators: Option<usize>,
    pub learning_rate: Option<f64>,
    pub max_depth: Option<usize>,
    pub num_leaves: Option<usize>,
    pub subsample: Option<f64>,
    pub colsample: Option<f64>,
    pub l2_leaf_reg: Option<f64>,
    pub min_split_gain: Option<f64>,
    pub n_bins: Option<usize>,
    pub seed: Option<u64>,
}

impl HyperPatch {
    fn apply(&self, mut base: Hyperparams) -> Hyperparams {
        macro_rules! patch {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { base.$field = v; })*
            };
        }
        patch!(
            n_estimators,
            learning_rate,
            max_depth,
            num_leaves,
            subsample,
            colsample,
            l2_leaf_reg,
            min_split_gain,
            n_bins,
            seed
        );
        base
    }
}

/// Partial DE override from the config file. Bounds are not configurable
/// here; weight fitting always uses the fusion box.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DePatch {
    pub population_size: Option<usize>,
    pub scaling_factor: Option<f64>,
    pub crossover_rate: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl DePatch {
    fn apply(&self, mut base: DeConfig) -> DeConfig {
        if let Some(v) = self.population_size {
            base.population_size = v;
        }
        if let Some(v) = self.scaling_factor {
            base.scaling_factor = v;
        }
        if let Some(v) = self.crossover_rate {
            base.crossover_rate = v;
        }
        if let Some(v) = self.max_iterations {
            base.max_iterations = v;
        }
        base
    }
}

/// The JSON config file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub formats: Option<Vec<String>>,
    pub schema: Option<CsvSchema>,
    pub who_limits: Option<PathBuf>,
    pub iqr_k: Option<f64>,
    pub synth_rows: Option<usize>,
    pub cat: Option<HyperPatch>,
    pub lgb: Option<HyperPatch>,
    pub de: Option<DePatch>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<FileConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("{}: invalid config: {e}", path.display())))
    }
}

/// Fully resolved configuration a command runs with.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub folds: usize,
    pub formats: Vec<Format>,
    pub schema: CsvSchema,
    pub limits: WhoLimits,
    pub iqr_k: f64,
    pub synth_rows: usize,
    pub params_cat: Hyperparams,
    pub params_lgb: Hyperparams,
    pub de: DeConfig,
}

/// Flag values collected by clap; `None` means "not given".
#[derive(Debug, Default)]
pub struct FlagOverrides {
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub formats: Option<Vec<String>>,
    pub limits: Option<PathBuf>,
    pub iqr_k: Option<f64>,
    pub rows: Option<usize>,
    pub de_np: Option<usize>,
    pub de_f: Option<f64>,
    pub de_cr: Option<f64>,
    pub de_iters: Option<usize>,
}

pub fn resolve(file: FileConfig, flags: FlagOverrides) -> CliResult<RunConfig> {
    let seed = flags.seed.or(file.seed).unwrap_or(42);

    let limits_path = flags.limits.or(file.who_limits);
    let limits = match &limits_path {
        Some(path) => WhoLimits::from_json_file(path).map_err(CliError::from)?,
        None => WhoLimits::default(),
    };

    let format_names = flags.formats.or(file.formats);
    let formats = match format_names {
        Some(names) => {
            let mut formats = Vec::new();
            for name in names {
                let f = Format::parse(name.trim())?;
                if !formats.contains(&f) {
                    formats.push(f);
                }
            }
            formats
        }
        None => vec![Format::Json, Format::Csv, Format::Svg],
    };

    let params_cat = file.cat.unwrap_or_default().apply(Hyperparams::symmetric_defaults());
    let params_lgb = file.lgb.unwrap_or_default().apply(Hyperparams::leafwise_defaults());

    let mut de = file.de.unwrap_or_default().apply(fusion::fusion_de_config(seed));
    if let Some(v) = flags.de_np {
        de.population_size = v;
    }
    if let Some(v) = flags.de_f {
        de.scaling_factor = v;
    }
    if let Some(v) = flags.de_cr {
        de.crossover_rate = v;
    }
    if let Some(v) = flags.de_iters {
        de.max_iterations = v;
    }
    de.seed = seed;

    Ok(RunConfig {
        input: flags.input.or(file.input),
        out_dir: flags.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("gwq-out")),
        seed,
        folds: flags.folds.or(file.folds).unwrap_or(10),
        formats,
        schema: file.schema.unwrap_or_default(),
        limits,
        iqr_k: flags.iqr_k.or(file.iqr_k).unwrap_or(1.5),
        synth_rows: flags.rows.or(file.synth_rows).unwrap_or(2000),
        params_cat,
        params_lgb,
        de,
    })
}
