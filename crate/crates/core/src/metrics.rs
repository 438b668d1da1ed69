//! Confusion matrices, macro-averaged precision/recall/F1, and stability
//! statistics over repeated runs.

use std::collections::BTreeMap;
use std::fmt::{self, Display};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl ConfusionMatrix {
    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|c| self.counts[c][c]).sum()
    }
}

pub fn confusion(truth: &[usize], predictions: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predictions.len(),
        });
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in truth.iter().zip(predictions) {
        if t >= k || p >= k {
            return Err(Error::InvalidArgument(format!(
                "label {} out of range for k={k}",
                t.max(p)
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        k,
        counts,
        n: truth.len() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1: f64,
    /// `(precision, recall)` per class.
    pub per_class: Vec<(f64, f64)>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision `cm[c][c] / column_c` and recall `cm[c][c] / row_c`
/// (0 for an empty row or column), averaged over all `k` classes.
pub fn macro_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.n == 0 {
        return Err(Error::EmptyDataset);
    }
    let per_class: Vec<(f64, f64)> = (0..cm.k)
        .map(|c| {
            let hit = cm.counts[c][c];
            (ratio(hit, cm.col_sum(c)), ratio(hit, cm.row_sum(c)))
        })
        .collect();
    let k = cm.k as f64;
    let precision_macro = per_class.iter().map(|p| p.0).sum::<f64>() / k;
    let recall_macro = per_class.iter().map(|p| p.1).sum::<f64>() / k;
    let f1 = if precision_macro + recall_macro > 0.0 {
        2.0 * precision_macro * recall_macro / (precision_macro + recall_macro)
    } else {
        0.0
    };
    Ok(MetricsReport {
        accuracy: ratio(cm.trace(), cm.n),
        precision_macro,
        recall_macro,
        f1,
        per_class,
    })
}

/// Shorthand for `macro_metrics(confusion(..))`.
pub fn evaluate(truth: &[usize], predictions: &[usize], k: usize) -> Result<MetricsReport> {
    macro_metrics(&confusion(truth, predictions, k)?)
}

/// Identifies a run in CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunKey {
    pub dataset: String,
    pub m: usize,
    pub t: usize,
    pub nh: usize,
    pub seed: u64,
}

pub const METRICS_CSV_HEADER: &str = "dataset,M,T,nh,seed,accuracy,precision_macro,recall_macro,f1";

pub fn metrics_csv_row(key: &RunKey, r: &MetricsReport) -> String {
    format!(
        "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
        key.dataset,
        key.m,
        key.t,
        key.nh,
        key.seed,
        r.accuracy,
        r.precision_macro,
        r.recall_macro,
        r.f1
    )
}

impl Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "accuracy         {:.4}", self.accuracy)?;
        writeln!(f, "precision_macro  {:.4}", self.precision_macro)?;
        writeln!(f, "recall_macro     {:.4}", self.recall_macro)?;
        writeln!(f, "f1               {:.4}", self.f1)?;
        for (c, (p, r)) in self.per_class.iter().enumerate() {
            writeln!(f, "  class {c:<3} precision {p:.4} recall {r:.4}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Mean and sample standard deviation of one group of values.
pub fn mean_std(values: &[f64]) -> Option<Stability> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(Stability {
        mean,
        std: var.sqrt(),
        count: values.len(),
    })
}

/// Group `(key, value)` pairs and compute [`mean_std`] per group.
pub fn stability_stats<K: Ord + Clone + fmt::Debug>(
    samples: &[(K, f64)],
) -> Result<BTreeMap<K, Stability>> {
    let mut groups: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in samples {
        groups.entry(k.clone()).or_default().push(*v);
    }
    groups
        .into_iter()
        .map(|(k, vals)| match mean_std(&vals) {
            Some(s) => Ok((k, s)),
            None => Err(Error::InsufficientGroup(format!("{k:?}"))),
        })
        .collect()
}
