//! In-process map/shuffle/reduce pipeline.
//!
//! * **Map** sends every training row to a uniformly random split in `0..M`.
//! * **Shuffle** groups row indices by split.
//! * **Reduce** boosts one [`ChunkEnsemble`] per split, in parallel.
//! * The **combiner** is a plurality vote over chunk predictions.
//!
//! All randomness is derived from the master seed and the chunk id, so the
//! trained ensemble does not depend on the number of workers.

use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::boost::{adaboost_train, BoostConfig, ChunkEnsemble};
use crate::dataio::Dataset;
use crate::elm::argmax;
use crate::error::{Error, Result};
use crate::exec;
use crate::seed;

pub const FORMAT_VERSION: u32 = 1;

/// Everything that determines a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Number of splits `M`.
    pub m: usize,
    /// Per-chunk boosting settings. `boost.seed` is replaced by `seed` when
    /// the pipeline runs.
    pub boost: BoostConfig,
    /// Master seed.
    pub seed: u64,
    pub repeats: usize,
    /// Maximum concurrent reduce tasks. Does not affect results.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 20,
            boost: BoostConfig::default(),
            seed: 1,
            repeats: 1,
            workers: exec::available_workers(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.repeats == 0 || self.workers == 0 {
            return Err(Error::InvalidArgument(format!(
                "need M >= 1, repeats >= 1, workers >= 1 (got M={}, repeats={}, workers={})",
                self.m, self.repeats, self.workers
            )));
        }
        self.boost.validate()
    }

    /// Boost settings with the master seed in place.
    pub fn effective_boost(&self) -> BoostConfig {
        BoostConfig {
            seed: self.seed,
            ..self.boost
        }
    }

    /// The same experiment with another master seed.
    pub fn with_seed(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            seed,
            ..self.clone()
        }
    }
}

/// The part of an [`ExperimentConfig`] that shapes the trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub m: usize,
    pub boost: BoostConfig,
    pub seed: u64,
}

impl From<&ExperimentConfig> for Provenance {
    fn from(cfg: &ExperimentConfig) -> Self {
        Provenance {
            m: cfg.m,
            boost: cfg.effective_boost(),
            seed: cfg.seed,
        }
    }
}

/// Plurality vote over chunk ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEnsemble {
    pub format_version: u32,
    pub k: usize,
    pub p: usize,
    /// Original labels of classes `0..k`.
    pub label_map: Vec<i64>,
    pub provenance: Provenance,
    pub chunks: Vec<ChunkEnsemble>,
}

impl GlobalEnsemble {
    /// `votes[i][c]` = number of chunks predicting class `c` for sample `i`.
    pub fn vote_counts(&self, x: ArrayView2<'_, f64>) -> Result<Array2<u32>> {
        if x.ncols() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: x.ncols(),
            });
        }
        let mut votes = Array2::zeros((x.nrows(), self.k));
        for chunk in &self.chunks {
            for (i, label) in chunk.predict(x)?.into_iter().enumerate() {
                votes[[i, label]] += 1;
            }
        }
        Ok(votes)
    }

    /// One vote per chunk; ties go to the lowest class index.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let votes = self.vote_counts(x)?.mapv(f64::from);
        Ok(votes.outer_iter().map(argmax).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<GlobalEnsemble> {
        let g: GlobalEnsemble = serde_json::from_str(text)?;
        if g.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(g.format_version));
        }
        Ok(g)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GlobalEnsemble> {
        GlobalEnsemble::from_json(&fs::read_to_string(path)?)
    }
}

/// Assign each of `n` rows to a uniform random split in `0..m`; returns the
/// row indices of every split in ascending order.
pub fn map_assign(n: usize, m: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if m == 0 {
        return Err(Error::InvalidArgument("split count must be >= 1".into()));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seed::rng(seed::derive(seed, &[seed::TAG_MAP]));
    let mut splits = vec![Vec::with_capacity(n / m + 1); m];
    for i in 0..n {
        splits[rng.random_range(0..m)].push(i);
    }
    Ok(splits)
}

/// A split that produced no chunk ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedChunk {
    pub chunk_id: usize,
    pub rows: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ReduceOutcome {
    pub ensemble: GlobalEnsemble,
    pub skipped: Vec<SkippedChunk>,
}

/// Boost one chunk ensemble per split. Empty, single-class and
/// boosting-failure splits are skipped with a warning.
pub fn reduce_all(
    ds: &Dataset,
    assignment: &[Vec<usize>],
    cfg: &ExperimentConfig,
) -> Result<ReduceOutcome> {
    cfg.validate()?;
    if let Some(bad) = assignment.iter().flatten().find(|&&i| i >= ds.len()) {
        return Err(Error::InvalidArgument(format!(
            "assignment refers to row {bad} of {}",
            ds.len()
        )));
    }
    let boost = cfg.effective_boost();
    let tasks: Vec<(usize, &Vec<usize>)> = assignment.iter().enumerate().collect();
    let results = exec::map_ordered(&tasks, cfg.workers, |&(chunk_id, rows)| {
        if rows.is_empty() {
            return Ok(Err("empty split".to_string()));
        }
        let chunk = ds.subset(rows);
        if chunk.distinct_classes() < 2 {
            return Ok(Err(format!(
                "only {} distinct class(es)",
                chunk.distinct_classes()
            )));
        }
        match adaboost_train(&chunk, &boost, chunk_id) {
            Ok(e) => Ok(Ok(e)),
            Err(e @ Error::BoostingFailure { .. }) => Ok(Err(e.to_string())),
            Err(e) => Err(e),
        }
    });

    let mut chunks = Vec::new();
    let mut skipped = Vec::new();
    for ((chunk_id, rows), result) in tasks.into_iter().zip(results) {
        match result? {
            Ok(ensemble) => chunks.push(ensemble),
            Err(reason) => {
                log::warn!("skipping chunk {chunk_id} ({} rows): {reason}", rows.len());
                skipped.push(SkippedChunk {
                    chunk_id,
                    rows: rows.len(),
                    reason,
                });
            }
        }
    }
    if chunks.is_empty() {
        return Err(Error::NoChunks(format!(
            "{} splits, all skipped",
            assignment.len()
        )));
    }
    Ok(ReduceOutcome {
        ensemble: GlobalEnsemble {
            format_version: FORMAT_VERSION,
            k: ds.k(),
            p: ds.dims(),
            label_map: ds.label_map().to_vec(),
            provenance: Provenance::from(cfg),
            chunks,
        },
        skipped,
    })
}

/// A trained ensemble plus phase timings.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub ensemble: GlobalEnsemble,
    pub skipped: Vec<SkippedChunk>,
    pub map_seconds: f64,
    pub reduce_seconds: f64,
}

impl PipelineRun {
    /// Number of splits that yielded a chunk ensemble.
    pub fn realized_chunks(&self) -> usize {
        self.ensemble.chunks.len()
    }
}

/// Map then reduce.
pub fn train_pipeline(train: &Dataset, cfg: &ExperimentConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let t0 = Instant::now();
    let assignment = map_assign(train.len(), cfg.m, cfg.seed)?;
    let map_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let outcome = reduce_all(train, &assignment, cfg)?;
    let reduce_seconds = t1.elapsed().as_secs_f64();
    Ok(PipelineRun {
        ensemble: outcome.ensemble,
        skipped: outcome.skipped,
        map_seconds,
        reduce_seconds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub m: usize,
    pub workers: usize,
    pub wall_seconds: f64,
    pub speedup: f64,
}

/// Reduce-phase wall time for each mapper count, with speedup measured
/// against the smallest mapper count.
pub fn speedup_report(
    train: &Dataset,
    base: &ExperimentConfig,
    mapper_counts: &[usize],
) -> Result<Vec<SpeedupRow>> {
    if mapper_counts.len() < 2 {
        return Err(Error::InvalidArgument(
            "speedup needs at least two mapper counts".into(),
        ));
    }
    if mapper_counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "mapper counts must be sorted ascending".into(),
        ));
    }
    let mut rows = Vec::with_capacity(mapper_counts.len());
    for &m in mapper_counts {
        let cfg = ExperimentConfig {
            m,
            workers: m.min(base.workers).max(1),
            ..base.clone()
        };
        let run = train_pipeline(train, &cfg)?;
        rows.push(SpeedupRow {
            m,
            workers: cfg.workers,
            wall_seconds: run.reduce_seconds,
            speedup: 0.0,
        });
    }
    let baseline = rows[0].wall_seconds;
    for r in &mut rows {
        r.speedup = baseline / r.wall_seconds;
    }
    Ok(rows)
}

pub const SPEEDUP_CSV_HEADER: &str = "M,wall_seconds,speedup";

pub fn speedup_csv(rows: &[SpeedupRow]) -> String {
    let mut out = String::from(SPEEDUP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{:.6},{:.6}\n", r.m, r.wall_seconds, r.speedup));
    }
    out
}
