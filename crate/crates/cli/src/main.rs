mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boostelm::dataio::{self, Dataset, Scaling};
use boostelm::engine::{self, GlobalEnsemble};
use boostelm::harness::{self, DatasetFingerprint, RunManifest, SweepGrid, Vary};
use boostelm::metrics::{self, RunKey};
use boostelm::{Error, ExperimentConfig};
use clap::{Parser, Subcommand};

use crate::config::{parse_list, FileConfig, Params, ValueList};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Training(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Training(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Training(m) => write!(f, "training failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => CliError::Usage(m),
            e if e.is_data_error() => CliError::Data(e.to_string()),
            e => CliError::Training(e.to_string()),
        }
    }
}

fn with_context(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "boostelm",
    version,
    about = "AdaBoosted ELM ensembles over randomly partitioned data"
)]
struct Cli {
    /// TOML file with default settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conventional (single, unboosted) ELM over a range of hidden-node counts.
    Baseline {
        #[command(flatten)]
        params: Params,
        /// Hidden-node counts: a,b,c or start:end:step.
        #[arg(long, default_value = "150:500:50")]
        nh_range: ValueList,
    },
    /// Train the partitioned pipeline, evaluate on the test set, save model and manifest.
    Train {
        #[command(flatten)]
        params: Params,
        /// Re-run the configuration recorded in a manifest.
        #[arg(long)]
        from_manifest: Option<PathBuf>,
    },
    /// Grid over M, T and nh; writes long-format results and three accuracy matrices.
    Sweep {
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        m_values: ValueList,
        #[arg(long)]
        t_values: ValueList,
        #[arg(long)]
        nh_values: ValueList,
    },
    /// Reduce-phase wall time and speedup across mapper counts.
    Speedup {
        #[command(flatten)]
        params: Params,
        /// Synthetic Gaussian mixture instead of --train: N,P,K
        #[arg(long)]
        synthetic: Option<String>,
        #[arg(long, default_value = "4,8,16,32")]
        mapper_counts: ValueList,
    },
    /// Mean and standard deviation of test accuracy while varying M or T.
    Stability {
        #[command(flatten)]
        params: Params,
        /// Parameter to vary: M or T.
        #[arg(long)]
        vary: Vary,
        #[arg(long)]
        values: ValueList,
        /// Explicit seed per repeat (overrides --repeats).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Label an svmlight file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

struct Loaded {
    train: Dataset,
    test: Dataset,
    train_fp: DatasetFingerprint,
    test_fp: DatasetFingerprint,
}

fn load_pair(train_path: &Path, test_path: &Path, scaling: Scaling) -> Result<Loaded, CliError> {
    let train_bytes = read_bytes(train_path)?;
    let test_bytes = read_bytes(test_path)?;
    let (train, test) = dataio::load_train_test(&train_bytes, &test_bytes).map_err(|e| {
        let ctx = format!("{} / {}", train_path.display(), test_path.display());
        match CliError::from(e) {
            CliError::Data(m) => CliError::Data(format!("{ctx}: {m}")),
            other => other,
        }
    })?;
    let (train, test) = dataio::apply_scaling(scaling, &train, &test)?;
    Ok(Loaded {
        train_fp: DatasetFingerprint {
            path: train_path.display().to_string(),
            sha256: dataio::fingerprint(&train_bytes),
            rows: train.len(),
        },
        test_fp: DatasetFingerprint {
            path: test_path.display().to_string(),
            sha256: dataio::fingerprint(&test_bytes),
            rows: test.len(),
        },
        train,
        test,
    })
}

fn cmd_baseline(params: &Params, file: &FileConfig, nh: &[usize]) -> Result<(), CliError> {
    let r = params.resolve(file)?;
    let data = load_pair(params.train_path()?, params.test_path()?, r.scaling)?;
    let rows = harness::baseline(
        &data.train,
        &data.test,
        nh,
        r.experiment.boost.activation,
        r.experiment.boost.ridge,
        r.experiment.repeats,
        r.experiment.seed,
    )?;
    let csv = harness::baseline_csv(&rows);
    print!("{csv}");
    write_file(&params.out.join("baseline.csv"), &csv)
}

fn run_train(
    cfg: &ExperimentConfig,
    scaling: Scaling,
    train_path: &Path,
    test_path: &Path,
    name: &str,
    out: &Path,
) -> Result<RunManifest, CliError> {
    let data = load_pair(train_path, test_path, scaling)?;
    let ev = harness::evaluate_pipeline(&data.train, &data.test, cfg)?;
    let manifest = RunManifest::new(cfg, scaling, data.train_fp, data.test_fp, &ev);
    let key = RunKey {
        dataset: name.to_string(),
        m: cfg.m,
        t: cfg.boost.t_max,
        nh: cfg.boost.weak_l,
        seed: cfg.seed,
    };
    let csv = format!(
        "{}\n{}\n",
        metrics::METRICS_CSV_HEADER,
        metrics::metrics_csv_row(&key, &ev.metrics)
    );
    print!("{}", ev.metrics);
    println!(
        "chunks {} of {} (reduce {:.3}s)",
        ev.run.realized_chunks(),
        cfg.m,
        ev.run.reduce_seconds
    );
    write_file(&out.join("metrics.csv"), &csv)?;
    write_file(&out.join("model.json"), &ev.run.ensemble.to_json()?)?;
    write_file(
        &out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).map_err(Error::from)?,
    )?;
    Ok(manifest)
}

fn cmd_train(
    params: &Params,
    file: &FileConfig,
    from_manifest: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = from_manifest {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let old: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for fp in [&old.train, &old.test] {
            let actual = dataio::fingerprint(&read_bytes(Path::new(&fp.path))?);
            if actual != fp.sha256 {
                return Err(CliError::Data(format!(
                    "{}: content hash {actual} does not match manifest {}",
                    fp.path, fp.sha256
                )));
            }
        }
        let new = run_train(
            &old.config,
            old.scaling,
            Path::new(&old.train.path),
            Path::new(&old.test.path),
            &params.dataset_name(),
            &params.out,
        )?;
        if new.results != old.results {
            return Err(CliError::Training(
                "re-run metrics differ from manifest".into(),
            ));
        }
        println!("reproduced manifest results exactly");
        return Ok(());
    }
    let r = params.resolve(file)?;
    run_train(
        &r.experiment,
        r.scaling,
        params.train_path()?,
        params.test_path()?,
        &params.dataset_name(),
        &params.out,
    )
    .map(|_| ())
}

fn cmd_sweep(params: &Params, file: &FileConfig, grid: SweepGrid) -> Result<(), CliError> {
    let r = params.resolve(file)?;
    let data = load_pair(params.train_path()?, params.test_path()?, r.scaling)?;
    let result = harness::sweep(&data.train, &data.test, &r.experiment, &grid)?;
    let out = &params.out;
    write_file(
        &out.join("sweep_long.csv"),
        &result.long_csv(&params.dataset_name()),
    )?;
    write_file(&out.join("sweep_m_t.csv"), &result.m_t.to_csv())?;
    write_file(&out.join("sweep_m_nh.csv"), &result.m_nh.to_csv())?;
    write_file(&out.join("sweep_t_nh.csv"), &result.t_nh.to_csv())?;
    print!("{}", result.m_t.to_csv());
    Ok(())
}

fn parse_synthetic(arg: &str) -> Result<(usize, usize, usize), CliError> {
    let parts = parse_list(arg).map_err(CliError::Usage)?;
    match parts.as_slice() {
        [n, p, k] if *k >= 2 => Ok((*n, *p, *k)),
        _ => Err(CliError::Usage(format!(
            "--synthetic expects N,P,K with K>=2, got {arg:?}"
        ))),
    }
}

fn cmd_speedup(
    params: &Params,
    file: &FileConfig,
    synthetic: Option<&str>,
    mapper_counts: &[usize],
) -> Result<(), CliError> {
    let r = params.resolve(file)?;
    let train = match (synthetic, params.train.as_deref()) {
        (Some(arg), _) => {
            let (n, p, k) = parse_synthetic(arg)?;
            dataio::gaussian_mixture(n, p, k, 1.0, r.experiment.seed)?
        }
        (None, Some(path)) => {
            let ds =
                dataio::parse_svmlight(&read_bytes(path)?, None).map_err(with_context(path))?;
            match r.scaling {
                Scaling::None => ds,
                Scaling::Minmax => dataio::MinMaxScaler::fit(&ds).transform(&ds)?,
            }
        }
        (None, None) => {
            return Err(CliError::Usage(
                "speedup needs --train or --synthetic".into(),
            ))
        }
    };
    let rows = engine::speedup_report(&train, &r.experiment, mapper_counts)?;
    let csv = engine::speedup_csv(&rows);
    print!("{csv}");
    write_file(&params.out.join("speedup.csv"), &csv)
}

fn cmd_stability(
    params: &Params,
    file: &FileConfig,
    vary: Vary,
    values: &[usize],
    seeds: Option<&[u64]>,
) -> Result<(), CliError> {
    let r = params.resolve(file)?;
    let seeds: Vec<u64> = match seeds {
        Some(s) => s.to_vec(),
        None => (0..r.experiment.repeats)
            .map(|i| harness::repeat_seed(r.experiment.seed, i))
            .collect(),
    };
    if seeds.len() < 2 {
        return Err(CliError::Usage(
            "stability needs --repeats >= 2 or at least two --seeds".into(),
        ));
    }
    let data = load_pair(params.train_path()?, params.test_path()?, r.scaling)?;
    let rows = harness::stability(&data.train, &data.test, &r.experiment, vary, values, &seeds)?;
    let csv = harness::stability_csv(&rows);
    print!("{csv}");
    write_file(&params.out.join("stability.csv"), &csv)
}

fn cmd_predict(model: &Path, test: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let g = GlobalEnsemble::load(model).map_err(with_context(model))?;
    let ds = dataio::parse_with_schema(&read_bytes(test)?, g.p, &g.label_map)
        .map_err(with_context(test))?;
    let labels = g.predict(ds.features())?;
    let mut csv = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", g.label_map[*l]));
    }
    match out {
        Some(path) => write_file(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Baseline { params, nh_range } => cmd_baseline(&params, &file, &nh_range.0),
        Command::Train {
            params,
            from_manifest,
        } => cmd_train(&params, &file, from_manifest.as_deref()),
        Command::Sweep {
            params,
            m_values,
            t_values,
            nh_values,
        } => {
            let grid = SweepGrid {
                m_values: m_values.0,
                t_values: t_values.0,
                nh_values: nh_values.0,
            };
            cmd_sweep(&params, &file, grid)
        }
        Command::Speedup {
            params,
            synthetic,
            mapper_counts,
        } => cmd_speedup(&params, &file, synthetic.as_deref(), &mapper_counts.0),
        Command::Stability {
            params,
            vary,
            values,
            seeds,
        } => cmd_stability(&params, &file, vary, &values.0, seeds.as_deref()),
        Command::Predict { model, test, out } => cmd_predict(&model, &test, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boostelm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
