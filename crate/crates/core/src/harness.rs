//! Experiment drivers shared by the CLI and the acceptance suite: the
//! conventional-ELM baseline, single pipeline evaluations, parameter sweeps,
//! stability repeats, and the run manifest.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Scaling};
use crate::elm::{ActivationKind, ElmModel, ElmParams};
use crate::engine::{train_pipeline, ExperimentConfig, PipelineRun, SkippedChunk};
use crate::error::{Error, Result};
use crate::metrics::{self, mean_std, MetricsReport};
use crate::seed;

/// Seed of repeat `r` of an experiment with master seed `master`.
pub fn repeat_seed(master: u64, r: usize) -> u64 {
    seed::derive(master, &[seed::TAG_REPEAT, r as u64])
}

/// Conventional ELM results for one hidden-node count, averaged over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub nh: usize,
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1: f64,
    pub runs: usize,
}

pub const BASELINE_CSV_HEADER: &str = "nh,accuracy,precision_macro,recall_macro,f1";

/// Train one ELM on the whole training set per `nh` and repeat.
pub fn baseline(
    train: &Dataset,
    test: &Dataset,
    nh_values: &[usize],
    activation: ActivationKind,
    ridge: f64,
    repeats: usize,
    master_seed: u64,
) -> Result<Vec<BaselineRow>> {
    if nh_values.is_empty() || repeats == 0 {
        return Err(Error::InvalidArgument(
            "baseline needs at least one nh value and one repeat".into(),
        ));
    }
    let mut rows = Vec::with_capacity(nh_values.len());
    for &nh in nh_values {
        let params = ElmParams {
            hidden: nh,
            activation,
            ridge,
        };
        let mut sums = [0.0; 4];
        for r in 0..repeats {
            let model = ElmModel::train(train, &params, repeat_seed(master_seed, r), None)?;
            let pred = model.predict(test.features())?;
            let m = metrics::evaluate(test.labels(), &pred, test.k())?;
            for (s, v) in sums
                .iter_mut()
                .zip([m.accuracy, m.precision_macro, m.recall_macro, m.f1])
            {
                *s += v;
            }
        }
        let n = repeats as f64;
        rows.push(BaselineRow {
            nh,
            accuracy: sums[0] / n,
            precision_macro: sums[1] / n,
            recall_macro: sums[2] / n,
            f1: sums[3] / n,
            runs: repeats,
        });
    }
    Ok(rows)
}

pub fn baseline_csv(rows: &[BaselineRow]) -> String {
    let mut out = format!("{BASELINE_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6}",
            r.nh, r.accuracy, r.precision_macro, r.recall_macro, r.f1
        );
    }
    out
}

/// A trained pipeline and its test-set metrics.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    pub run: PipelineRun,
    pub predictions: Vec<usize>,
    pub predict_seconds: f64,
}

pub fn evaluate_pipeline(
    train: &Dataset,
    test: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<Evaluation> {
    let run = train_pipeline(train, cfg)?;
    let t0 = Instant::now();
    let predictions = run.ensemble.predict(test.features())?;
    let predict_seconds = t0.elapsed().as_secs_f64();
    let metrics = metrics::evaluate(test.labels(), &predictions, test.k())?;
    Ok(Evaluation {
        metrics,
        run,
        predictions,
        predict_seconds,
    })
}

fn is_training_failure(e: &Error) -> bool {
    matches!(e, Error::NoChunks(_) | Error::BoostingFailure { .. })
}

/// One cell of a sweep and one repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub t: usize,
    pub nh: usize,
    pub repeat: usize,
    pub seed: u64,
    pub realized_chunks: usize,
    /// `None` when training failed for this run.
    pub metrics: Option<MetricsReport>,
}

/// Mean accuracy over a two-parameter grid, marginalizing the third.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMatrix {
    pub row_param: &'static str,
    pub col_param: &'static str,
    pub row_values: Vec<usize>,
    pub col_values: Vec<usize>,
    /// `NaN` where every contributing run failed.
    pub values: Vec<Vec<f64>>,
}

impl HeatMatrix {
    fn build(
        rows: &[SweepRow],
        (row_param, row_values, row_of): (&'static str, &[usize], fn(&SweepRow) -> usize),
        (col_param, col_values, col_of): (&'static str, &[usize], fn(&SweepRow) -> usize),
    ) -> HeatMatrix {
        let values = row_values
            .iter()
            .map(|&rv| {
                col_values
                    .iter()
                    .map(|&cv| {
                        let accs: Vec<f64> = rows
                            .iter()
                            .filter(|r| row_of(r) == rv && col_of(r) == cv)
                            .filter_map(|r| r.metrics.as_ref().map(|m| m.accuracy))
                            .collect();
                        if accs.is_empty() {
                            f64::NAN
                        } else {
                            accs.iter().sum::<f64>() / accs.len() as f64
                        }
                    })
                    .collect()
            })
            .collect();
        HeatMatrix {
            row_param,
            col_param,
            row_values: row_values.to_vec(),
            col_values: col_values.to_vec(),
            values,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}/{}", self.row_param, self.col_param);
        for c in &self.col_values {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (rv, vals) in self.row_values.iter().zip(&self.values) {
            let _ = write!(out, "{rv}");
            for v in vals {
                let _ = write!(out, ",{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub m_values: Vec<usize>,
    pub t_values: Vec<usize>,
    pub nh_values: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub m_t: HeatMatrix,
    pub m_nh: HeatMatrix,
    pub t_nh: HeatMatrix,
}

pub const SWEEP_CSV_HEADER: &str =
    "dataset,M,T,nh,repeat,seed,realized_chunks,accuracy,precision_macro,recall_macro,f1";

impl SweepResult {
    /// Every individual run, in grid order.
    pub fn long_csv(&self, dataset: &str) -> String {
        let mut out = format!("{SWEEP_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = write!(
                out,
                "{dataset},{},{},{},{},{},{}",
                r.m, r.t, r.nh, r.repeat, r.seed, r.realized_chunks
            );
            match &r.metrics {
                Some(m) => {
                    let _ = writeln!(
                        out,
                        ",{:.6},{:.6},{:.6},{:.6}",
                        m.accuracy, m.precision_macro, m.recall_macro, m.f1
                    );
                }
                None => out.push_str(",NaN,NaN,NaN,NaN\n"),
            }
        }
        out
    }
}

/// Run the full `M × T × nh × repeats` grid.
pub fn sweep(
    train: &Dataset,
    test: &Dataset,
    base: &ExperimentConfig,
    grid: &SweepGrid,
) -> Result<SweepResult> {
    if grid.m_values.is_empty() || grid.t_values.is_empty() || grid.nh_values.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep value lists must be non-empty".into(),
        ));
    }
    let mut rows = Vec::new();
    for &m in &grid.m_values {
        for &t in &grid.t_values {
            for &nh in &grid.nh_values {
                for repeat in 0..base.repeats {
                    let seed = repeat_seed(base.seed, repeat);
                    let mut cfg = base.with_seed(seed);
                    cfg.m = m;
                    cfg.boost.t_max = t;
                    cfg.boost.weak_l = nh;
                    let (realized_chunks, metrics) = match evaluate_pipeline(train, test, &cfg) {
                        Ok(ev) => (ev.run.realized_chunks(), Some(ev.metrics)),
                        Err(e) if is_training_failure(&e) => {
                            log::warn!("sweep run M={m} T={t} nh={nh} repeat={repeat} failed: {e}");
                            (0, None)
                        }
                        Err(e) => return Err(e),
                    };
                    rows.push(SweepRow {
                        m,
                        t,
                        nh,
                        repeat,
                        seed,
                        realized_chunks,
                        metrics,
                    });
                }
            }
        }
    }
    let m_axis = (
        "M",
        grid.m_values.as_slice(),
        (|r: &SweepRow| r.m) as fn(&SweepRow) -> usize,
    );
    let t_axis = (
        "T",
        grid.t_values.as_slice(),
        (|r: &SweepRow| r.t) as fn(&SweepRow) -> usize,
    );
    let nh_axis = (
        "nh",
        grid.nh_values.as_slice(),
        (|r: &SweepRow| r.nh) as fn(&SweepRow) -> usize,
    );
    let m_t = HeatMatrix::build(&rows, m_axis, t_axis);
    let m_nh = HeatMatrix::build(&rows, m_axis, nh_axis);
    let t_nh = HeatMatrix::build(&rows, t_axis, nh_axis);
    for hm in [&m_t, &m_nh, &t_nh] {
        if hm.values.iter().flatten().any(|v| v.is_nan()) {
            log::warn!(
                "{}×{} matrix has cells where every run failed",
                hm.row_param,
                hm.col_param
            );
        }
    }
    Ok(SweepResult {
        rows,
        m_t,
        m_nh,
        t_nh,
    })
}

/// Parameter varied in a stability study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vary {
    M,
    T,
}

impl std::str::FromStr for Vary {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(Vary::M),
            "t" => Ok(Vary::T),
            other => Err(format!("unknown parameter {other:?} (M|T)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub value: usize,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub accuracies: Vec<f64>,
}

pub const STABILITY_CSV_HEADER: &str = "value,mean_acc,std_acc";

/// Test accuracy mean and sample standard deviation per value of the varied
/// parameter, one run per seed.
pub fn stability(
    train: &Dataset,
    test: &Dataset,
    base: &ExperimentConfig,
    vary: Vary,
    values: &[usize],
    seeds: &[u64],
) -> Result<Vec<StabilityRow>> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument(
            "stability needs at least 2 repeats".into(),
        ));
    }
    if seeds.windows(2).all(|w| w[0] == w[1]) {
        log::warn!(
            "all stability repeats share seed {}; spread will be zero",
            seeds[0]
        );
    }
    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let mut accs = Vec::with_capacity(seeds.len());
        for &s in seeds {
            let mut cfg = base.with_seed(s);
            match vary {
                Vary::M => cfg.m = value,
                Vary::T => cfg.boost.t_max = value,
            }
            accs.push(evaluate_pipeline(train, test, &cfg)?.metrics.accuracy);
        }
        let st = mean_std(&accs).ok_or_else(|| Error::InsufficientGroup(value.to_string()))?;
        out.push(StabilityRow {
            value,
            mean_acc: st.mean,
            std_acc: st.std,
            accuracies: accs,
        });
    }
    Ok(out)
}

pub fn stability_csv(rows: &[StabilityRow]) -> String {
    let mut out = format!("{STABILITY_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.6},{:.6}", r.value, r.mean_acc, r.std_acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub map_seconds: f64,
    pub reduce_seconds: f64,
    pub predict_seconds: f64,
}

/// Self-describing record of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software_version: String,
    pub config: ExperimentConfig,
    pub scaling: Scaling,
    pub train: DatasetFingerprint,
    pub test: DatasetFingerprint,
    pub results: MetricsReport,
    pub realized_chunks: usize,
    pub skipped_chunks: Vec<SkippedChunk>,
    pub timing: Timing,
}

impl RunManifest {
    pub fn new(
        config: &ExperimentConfig,
        scaling: Scaling,
        train: DatasetFingerprint,
        test: DatasetFingerprint,
        ev: &Evaluation,
    ) -> RunManifest {
        RunManifest {
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            scaling,
            train,
            test,
            results: ev.metrics.clone(),
            realized_chunks: ev.run.realized_chunks(),
            skipped_chunks: ev.run.skipped.clone(),
            timing: Timing {
                map_seconds: ev.run.map_seconds,
                reduce_seconds: ev.run.reduce_seconds,
                predict_seconds: ev.predict_seconds,
            },
        }
    }
}
