//! Dense datasets, the svmlight reader/writer, resampling and scaling.
//!
//! Files are line oriented:
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ... # optional comment
//! ```
//!
//! Indices are 1-based and strictly increasing within a line; missing indices
//! are zero. Labels are arbitrary integers, remapped to `0..K` in ascending
//! order of their original value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seed;

/// Dense labelled samples. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    k: usize,
    label_map: Vec<i64>,
}

impl Dataset {
    /// Validate and assemble a dataset.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        k: usize,
        label_map: Vec<i64>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if k < 2 {
            return Err(Error::TooFewClasses(k));
        }
        if label_map.len() != k || label_map.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "label_map must be strictly increasing with exactly k entries".into(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
            return Err(Error::InvalidArgument(format!(
                "label index {bad} out of range for k={k}"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        Ok(Dataset {
            features,
            labels,
            k,
            label_map,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn label_map(&self) -> &[i64] {
        &self.label_map
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Rows at `indices` (repeats allowed), keeping the class space.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            k: self.k,
            label_map: self.label_map.clone(),
        }
    }

    /// Number of classes that actually occur.
    pub fn distinct_classes(&self) -> usize {
        let mut seen = vec![false; self.k];
        for &y in &self.labels {
            seen[y] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Replace the feature matrix, keeping labels.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        Dataset::new(
            features,
            self.labels.clone(),
            self.k,
            self.label_map.clone(),
        )
    }

    /// Original file label for an internal class index.
    pub fn original_label(&self, class: usize) -> i64 {
        self.label_map[class]
    }
}

/// One parsed line: original label and sparse `(0-based column, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub label: i64,
    pub entries: Vec<(usize, f64)>,
}

/// Lines of an svmlight file before densification.
#[derive(Debug, Clone, Default)]
pub struct Records {
    pub rows: Vec<Record>,
    /// Largest 1-based index seen.
    pub max_index: usize,
}

impl Records {
    /// Sorted unique original labels.
    pub fn labels(&self) -> Vec<i64> {
        let mut labels: Vec<i64> = self.rows.iter().map(|r| r.label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Densify into `dims` columns using the given label map.
    pub fn into_dataset(self, dims: usize, label_map: Vec<i64>) -> Result<Dataset> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dims < self.max_index {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.max_index,
            });
        }
        let mut features = Array2::zeros((self.rows.len(), dims));
        let mut labels = Vec::with_capacity(self.rows.len());
        for (i, rec) in self.rows.into_iter().enumerate() {
            let class = label_map.binary_search(&rec.label).map_err(|_| {
                Error::InvalidArgument(format!("label {} not in label map", rec.label))
            })?;
            labels.push(class);
            for (j, v) in rec.entries {
                features[[i, j]] = v;
            }
        }
        let k = label_map.len();
        Dataset::new(features, labels, k, label_map)
    }
}

fn parse_label(tok: &str, line: usize) -> Result<i64> {
    let t = tok.strip_prefix('+').unwrap_or(tok);
    if let Ok(v) = t.parse::<i64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(v as i64),
        _ => Err(Error::Parse {
            line,
            msg: format!("invalid label {tok:?}"),
        }),
    }
}

/// Tokenize svmlight text without densifying.
pub fn parse_records(text: &[u8], expected_dims: Option<usize>) -> Result<Records> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("input is not UTF-8: {e}"),
    })?;
    let mut out = Records::default();
    for (ln, raw) in text.split('\n').enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = parse_label(tokens.next().unwrap_or_default(), line)?;
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected index:value, got {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line,
                    msg: "feature indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(Error::Parse {
                    line,
                    msg: format!("feature index {idx} not strictly increasing after {last}"),
                });
            }
            if let Some(expected) = expected_dims {
                if idx > expected {
                    return Err(Error::FeatureDimension {
                        line,
                        index: idx,
                        expected,
                    });
                }
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid feature value {val:?}"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-finite feature value {val}"),
                });
            }
            last = idx;
            entries.push((idx - 1, val));
        }
        out.max_index = out.max_index.max(last);
        out.rows.push(Record { label, entries });
    }
    Ok(out)
}

/// Parse svmlight text into a dense dataset.
///
/// Column count is the largest index seen, or `expected_dims` when that is
/// larger.
pub fn parse_svmlight(text: &[u8], expected_dims: Option<usize>) -> Result<Dataset> {
    let records = parse_records(text, expected_dims)?;
    if records.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dims = expected_dims.unwrap_or(0).max(records.max_index);
    let label_map = records.labels();
    if label_map.len() < 2 {
        return Err(Error::TooFewClasses(label_map.len()));
    }
    records.into_dataset(dims, label_map)
}

pub fn read_svmlight_file(path: impl AsRef<Path>, expected_dims: Option<usize>) -> Result<Dataset> {
    let bytes = fs::read(path)?;
    parse_svmlight(&bytes, expected_dims)
}

/// Load a train/test pair that shares one column space and one label map.
///
/// Labels present only in the test file still get a class index, so the
/// models never predict them but the metrics count them.
pub fn load_train_test(train: &[u8], test: &[u8]) -> Result<(Dataset, Dataset)> {
    let train = parse_records(train, None)?;
    let test = parse_records(test, None)?;
    if train.rows.is_empty() || test.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dims = train.max_index.max(test.max_index);
    let mut label_map = train.labels();
    if label_map.len() < 2 {
        return Err(Error::TooFewClasses(label_map.len()));
    }
    label_map.extend(test.labels());
    label_map.sort_unstable();
    label_map.dedup();
    Ok((
        train.into_dataset(dims, label_map.clone())?,
        test.into_dataset(dims, label_map)?,
    ))
}

/// Parse `text` into the column space and label map of an existing model.
pub fn parse_with_schema(text: &[u8], dims: usize, label_map: &[i64]) -> Result<Dataset> {
    let records = parse_records(text, Some(dims))?;
    records.into_dataset(dims, label_map.to_vec())
}

/// Write svmlight text, omitting zero entries. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn to_svmlight(ds: &Dataset) -> String {
    let mut out = String::new();
    for (i, row) in ds.features.outer_iter().enumerate() {
        let _ = write!(out, "{}", ds.label_map[ds.labels[i]]);
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                let _ = write!(out, " {}:{}", j + 1, v);
            }
        }
        out.push('\n');
    }
    out
}

/// Lowercase hex SHA-256 of raw bytes.
pub fn fingerprint(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Draw `m` row indices i.i.d. with probability proportional to `weights`.
pub fn weighted_resample_indices(weights: &[f64], m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::InvalidArgument("resample size must be >= 1".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(
            "weights must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::DegenerateDistribution("all weights are zero".into()));
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    let dist =
        WeightedIndex::new(weights).map_err(|e| Error::DegenerateDistribution(e.to_string()))?;
    let mut rng = seed::rng(seed);
    Ok((0..m).map(|_| dist.sample(&mut rng)).collect())
}

/// Draw `m` samples from `ds` with replacement according to `weights`.
pub fn weighted_resample(ds: &Dataset, weights: &[f64], m: usize, seed: u64) -> Result<Dataset> {
    if weights.len() != ds.len() {
        return Err(Error::DimensionMismatch {
            expected: ds.len(),
            found: weights.len(),
        });
    }
    let idx = weighted_resample_indices(weights, m, seed)?;
    Ok(ds.subset(&idx))
}

/// Per-column min-max scaling to `[0, 1]`, fitted on one dataset and
/// applicable to others. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Self {
        let x = ds.features();
        let mut min = vec![f64::INFINITY; x.ncols()];
        let mut max = vec![f64::NEG_INFINITY; x.ncols()];
        for row in x.outer_iter() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.dims() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: ds.dims(),
            });
        }
        let mut x = ds.features.clone();
        for mut row in x.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *v = if span > 0.0 {
                    (*v - self.min[j]) / span
                } else {
                    0.0
                };
            }
        }
        ds.with_features(x)
    }
}

/// Feature preprocessing applied before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    None,
    Minmax,
}

impl std::str::FromStr for Scaling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Scaling::None),
            "minmax" => Ok(Scaling::Minmax),
            other => Err(format!("unknown scaling {other:?} (none|minmax)")),
        }
    }
}

impl std::fmt::Display for Scaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scaling::None => "none",
            Scaling::Minmax => "minmax",
        })
    }
}

/// Apply `scaling` to a train/test pair, fitting on the training set.
pub fn apply_scaling(
    scaling: Scaling,
    train: &Dataset,
    test: &Dataset,
) -> Result<(Dataset, Dataset)> {
    match scaling {
        Scaling::None => Ok((train.clone(), test.clone())),
        Scaling::Minmax => {
            let scaler = MinMaxScaler::fit(train);
            Ok((scaler.transform(train)?, scaler.transform(test)?))
        }
    }
}

/// Isotropic Gaussian mixture: `k` equiprobable classes whose centres are
/// drawn from `N(0, separation^2 I)`, each sample adding unit noise.
pub fn gaussian_mixture(
    n: usize,
    p: usize,
    k: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || p == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seed::rng(seed);
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..p)
                .map(|_| separation * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut features = Array2::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    for (i, mut row) in features.outer_iter_mut().enumerate() {
        let class = if i < k { i } else { rng.random_range(0..k) };
        labels.push(class);
        for (j, v) in row.iter_mut().enumerate() {
            *v = centres[class][j] + rng.sample::<f64, _>(StandardNormal);
        }
    }
    Dataset::new(features, labels, k, (0..k as i64).collect())
}
