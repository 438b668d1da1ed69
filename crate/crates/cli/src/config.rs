//! Effective settings: command-line flags override the config file, which
//! overrides built-in defaults.

use std::path::{Path, PathBuf};

use boostelm::{
    ActivationKind, AlphaVariant, BoostConfig, ExperimentConfig, Scaling, WeightingMode,
};
use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Keys accepted in a `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<usize>,
    pub t: Option<usize>,
    pub nh: Option<usize>,
    pub activation: Option<String>,
    pub ridge: Option<f64>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub workers: Option<usize>,
    pub scale: Option<String>,
    pub weighting: Option<String>,
    pub alpha: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flags shared by the training subcommands.
#[derive(Debug, Clone, Args, Default)]
pub struct Params {
    /// Training set (svmlight).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test set (svmlight).
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Split count M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Boosting rounds T.
    #[arg(long)]
    pub t: Option<usize>,
    /// Hidden nodes per weak ELM.
    #[arg(long)]
    pub nh: Option<usize>,
    /// sigmoid | rbf | hardlimit
    #[arg(long)]
    pub activation: Option<ActivationKind>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Concurrent reduce tasks (default: hardware threads).
    #[arg(long)]
    pub workers: Option<usize>,
    /// none | minmax
    #[arg(long)]
    pub scale: Option<Scaling>,
    /// weighted | resample
    #[arg(long)]
    pub weighting: Option<WeightingMode>,
    /// samme | binary
    #[arg(long)]
    pub alpha: Option<AlphaVariant>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Name used in CSV rows (default: training file stem).
    #[arg(long)]
    pub name: Option<String>,
}

fn parse_opt<T: std::str::FromStr<Err = String>>(
    v: &Option<String>,
) -> Result<Option<T>, CliError> {
    v.as_deref()
        .map(|s| s.parse::<T>().map_err(CliError::Usage))
        .transpose()
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub scaling: Scaling,
}

impl Params {
    pub fn resolve(&self, file: &FileConfig) -> Result<Resolved, CliError> {
        let defaults = ExperimentConfig::default();
        let d = defaults.boost;
        let boost = BoostConfig {
            t_max: self.t.or(file.t).unwrap_or(d.t_max),
            weak_l: self.nh.or(file.nh).unwrap_or(d.weak_l),
            activation: self
                .activation
                .or(parse_opt(&file.activation)?)
                .unwrap_or(d.activation),
            ridge: self.ridge.or(file.ridge).unwrap_or(d.ridge),
            weighting_mode: self
                .weighting
                .or(parse_opt(&file.weighting)?)
                .unwrap_or(d.weighting_mode),
            alpha_variant: self
                .alpha
                .or(parse_opt(&file.alpha)?)
                .unwrap_or(d.alpha_variant),
            seed: 0,
        };
        let seed = self.seed.or(file.seed).unwrap_or(defaults.seed);
        let experiment = ExperimentConfig {
            m: self.m.or(file.m).unwrap_or(defaults.m),
            boost: BoostConfig { seed, ..boost },
            seed,
            repeats: self.repeats.or(file.repeats).unwrap_or(defaults.repeats),
            workers: self.workers.or(file.workers).unwrap_or(defaults.workers),
        };
        experiment
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Resolved {
            experiment,
            scaling: self
                .scale
                .or(parse_opt(&file.scale)?)
                .unwrap_or(Scaling::None),
        })
    }

    pub fn train_path(&self) -> Result<&Path, CliError> {
        self.train
            .as_deref()
            .ok_or_else(|| CliError::Usage("--train is required".into()))
    }

    pub fn test_path(&self) -> Result<&Path, CliError> {
        self.test
            .as_deref()
            .ok_or_else(|| CliError::Usage("--test is required".into()))
    }

    pub fn dataset_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.train
                .as_deref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        })
    }
}

/// A list of counts given as `a,b,c` or `start:end:step`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueList(pub Vec<usize>);

impl std::str::FromStr for ValueList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_list(s).map(ValueList)
    }
}

/// Parse `a,b,c` or an inclusive range `start:end:step`.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid number {t:?} in {s:?}"))
    };
    let values = match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step == 0 || start > end {
                return Err(format!("invalid range {s:?}"));
            }
            (start..=end).step_by(step).collect()
        }
        [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected a,b,c or start:end:step, got {s:?}")),
    };
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}
