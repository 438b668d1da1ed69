//! Multiclass AdaBoost over ELM weak learners.
//!
//! Each round trains one ELM under the current sample distribution, measures
//! its distribution-weighted error `ε`, turns that into a vote weight `α` and
//! re-weights the samples: mistakes are multiplied by `e^α`, correct samples
//! by `e^-α`, then everything is renormalized. A chunk ensemble predicts by
//! `argmax_k Σ_t α_t [h_t(x) = k]`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataio::{self, Dataset};
use crate::elm::{argmax, ActivationKind, ElmModel, ElmParams};
use crate::error::{Error, Result};
use crate::seed;

/// Error values are clamped into `[EPS_CLAMP, 1 - EPS_CLAMP]` before logs.
pub const EPS_CLAMP: f64 = 1e-10;
/// Extra attempts for a round whose learner fails the random-guess test.
pub const MAX_RETRIES: usize = 3;

/// Vote-weight formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaVariant {
    /// `½ ln((1-ε)/ε)`, useful for two classes.
    Binary,
    /// `ln((1-ε)/ε) + ln(K-1)`.
    #[default]
    Samme,
}

impl AlphaVariant {
    /// Error at or above which a weak learner is no better than guessing.
    pub fn threshold(self, k: usize) -> f64 {
        match self {
            AlphaVariant::Binary => 0.5,
            AlphaVariant::Samme => 1.0 - 1.0 / k as f64,
        }
    }
}

impl FromStr for AlphaVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "binary" => Ok(AlphaVariant::Binary),
            "samme" => Ok(AlphaVariant::Samme),
            other => Err(format!("unknown alpha variant {other:?} (binary|samme)")),
        }
    }
}

impl fmt::Display for AlphaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaVariant::Binary => "binary",
            AlphaVariant::Samme => "samme",
        })
    }
}

/// How the sample distribution reaches the weak learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    /// Weighted least squares in the output-weight solve.
    #[default]
    WeightedSolve,
    /// Train on `n` rows drawn from the distribution.
    Resample,
}

impl FromStr for WeightingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "weighted" | "weighted_solve" => Ok(WeightingMode::WeightedSolve),
            "resample" => Ok(WeightingMode::Resample),
            other => Err(format!(
                "unknown weighting mode {other:?} (weighted|resample)"
            )),
        }
    }
}

impl fmt::Display for WeightingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightingMode::WeightedSolve => "weighted",
            WeightingMode::Resample => "resample",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    /// Boosting rounds `T`.
    pub t_max: usize,
    /// Hidden nodes per weak learner.
    pub weak_l: usize,
    pub activation: ActivationKind,
    pub ridge: f64,
    pub weighting_mode: WeightingMode,
    pub alpha_variant: AlphaVariant,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            t_max: 10,
            weak_l: 21,
            activation: ActivationKind::Sigmoid,
            ridge: crate::elm::FALLBACK_RIDGE,
            weighting_mode: WeightingMode::WeightedSolve,
            alpha_variant: AlphaVariant::Samme,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 || self.weak_l == 0 {
            return Err(Error::InvalidArgument(format!(
                "boosting needs T >= 1 and nh >= 1 (got T={}, nh={})",
                self.t_max, self.weak_l
            )));
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "invalid ridge {}",
                self.ridge
            )));
        }
        Ok(())
    }

    fn elm_params(&self) -> ElmParams {
        ElmParams {
            hidden: self.weak_l,
            activation: self.activation,
            ridge: self.ridge,
        }
    }
}

/// Seed for the weak learner of `round`, `attempt` on `chunk_id`.
pub fn round_seed(master: u64, chunk_id: usize, round: usize, attempt: usize) -> u64 {
    seed::derive(
        master,
        &[
            seed::TAG_BOOST,
            chunk_id as u64,
            round as u64,
            attempt as u64,
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakHypothesis {
    pub model: ElmModel,
    pub alpha: f64,
}

/// The boosted classifier of one data chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkEnsemble {
    pub chunk_id: usize,
    pub k: usize,
    pub hypotheses: Vec<WeakHypothesis>,
}

/// `Σ_i w_i [pred_i ≠ truth_i]`.
pub fn weighted_error(predictions: &[usize], truth: &[usize], weights: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() || weights.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: if predictions.len() != truth.len() {
                predictions.len()
            } else {
                weights.len()
            },
        });
    }
    let eps: f64 = predictions
        .iter()
        .zip(truth)
        .zip(weights)
        .filter(|((p, t), _)| p != t)
        .map(|(_, w)| w)
        .sum();
    Ok(eps.clamp(0.0, 1.0))
}

pub fn alpha_from_error(eps: f64, k: usize, variant: AlphaVariant) -> f64 {
    let e = eps.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP);
    let log_odds = ((1.0 - e) / e).ln();
    match variant {
        AlphaVariant::Binary => 0.5 * log_odds,
        AlphaVariant::Samme => log_odds + ((k as f64) - 1.0).ln(),
    }
}

/// Re-weight: `w_i e^{α}` on mistakes, `w_i e^{-α}` on hits, then normalize.
pub fn update_distribution(
    weights: &[f64],
    alpha: f64,
    predictions: &[usize],
    truth: &[usize],
) -> Result<Vec<f64>> {
    if weights.len() != truth.len() || predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: weights.len().min(predictions.len()),
        });
    }
    let up = alpha.exp();
    let down = (-alpha).exp();
    let mut out: Vec<f64> = weights
        .iter()
        .zip(predictions.iter().zip(truth))
        .map(|(w, (p, t))| w * if p != t { up } else { down })
        .collect();
    let z: f64 = out.iter().sum();
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::DegenerateDistribution(format!(
            "normalization constant {z}"
        )));
    }
    out.iter_mut().for_each(|w| *w /= z);
    Ok(out)
}

fn train_weak(ds: &Dataset, cfg: &BoostConfig, weights: &[f64], seed: u64) -> Result<ElmModel> {
    let params = cfg.elm_params();
    match cfg.weighting_mode {
        WeightingMode::WeightedSolve => {
            // Rescale to mean 1 so the ridge keeps the meaning it has in
            // unweighted training.
            let n = ds.len() as f64;
            let scaled: Vec<f64> = weights.iter().map(|w| w * n).collect();
            ElmModel::train(ds, &params, seed, Some(&scaled))
        }
        WeightingMode::Resample => {
            let resample_seed = seed::derive(seed, &[seed::TAG_RESAMPLE]);
            let sample = dataio::weighted_resample(ds, weights, ds.len(), resample_seed)?;
            ElmModel::train(&sample, &params, seed, None)
        }
    }
}

/// Run boosting on one chunk.
///
/// A weak learner whose error reaches the random-guess threshold is dropped,
/// the distribution is reset to uniform and the round is retried with a new
/// seed, up to [`MAX_RETRIES`] times before the round is skipped. A
/// zero-error learner is kept and ends boosting early.
pub fn adaboost_train(ds: &Dataset, cfg: &BoostConfig, chunk_id: usize) -> Result<ChunkEnsemble> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.len();
    let k = ds.k();
    let uniform = vec![1.0 / n as f64; n];
    let threshold = cfg.alpha_variant.threshold(k);
    let mut weights = uniform.clone();
    let mut hypotheses = Vec::with_capacity(cfg.t_max);

    'rounds: for round in 0..cfg.t_max {
        for attempt in 0..=MAX_RETRIES {
            let seed = round_seed(cfg.seed, chunk_id, round, attempt);
            let model = train_weak(ds, cfg, &weights, seed)?;
            let preds = model.predict(ds.features())?;
            let eps = weighted_error(&preds, ds.labels(), &weights)?;
            if eps >= threshold {
                log::debug!(
                    "chunk {chunk_id} round {round} attempt {attempt}: error {eps:.4} >= {threshold:.4}, retrying"
                );
                weights.clone_from(&uniform);
                continue;
            }
            let alpha = alpha_from_error(eps, k, cfg.alpha_variant);
            hypotheses.push(WeakHypothesis { model, alpha });
            if eps <= 0.0 {
                break 'rounds;
            }
            weights = update_distribution(&weights, alpha, &preds, ds.labels())?;
            continue 'rounds;
        }
        log::debug!("chunk {chunk_id} round {round}: skipped after {MAX_RETRIES} retries");
    }

    if hypotheses.is_empty() {
        return Err(Error::BoostingFailure { chunk_id });
    }
    Ok(ChunkEnsemble {
        chunk_id,
        k,
        hypotheses,
    })
}

impl ChunkEnsemble {
    pub fn dims(&self) -> usize {
        self.hypotheses.first().map_or(0, |h| h.model.p)
    }

    /// Per-sample, per-class sum of `α` over hypotheses voting for the class.
    pub fn vote_weights(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut votes = Array2::zeros((x.nrows(), self.k));
        for h in &self.hypotheses {
            for (i, label) in h.model.predict(x)?.into_iter().enumerate() {
                votes[[i, label]] += h.alpha;
            }
        }
        Ok(votes)
    }

    /// `argmax_k Σ_t α_t [h_t(x) = k]`, ties to the lowest class.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        Ok(self.vote_weights(x)?.outer_iter().map(argmax).collect())
    }
}
