//! Extreme learning machine: a single hidden layer with random, fixed
//! parameters and output weights solved in closed form.
//!
//! Training builds the hidden-layer matrix `H[i][j] = G(a_j, b_j, x_i)`,
//! one-hot targets `T`, and solves the (optionally weighted, optionally
//! ridge-regularized) least-squares problem `H β ≈ T` through the normal
//! equations. Prediction takes the argmax of `H β` per row.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::seed;

/// Ridge applied when the unregularized normal matrix is singular.
pub const FALLBACK_RIDGE: f64 = 1e-8;

/// Hidden-node activation `G(a, b, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ActivationKind {
    /// `1 / (1 + exp(-(a·x + b)))`
    #[default]
    #[serde(rename = "sigmoid")]
    Sigmoid,
    /// `exp(-b ‖x - a‖²)`, `b > 0`
    #[serde(rename = "rbf")]
    RadialBasis,
    /// `1` if `a·x + b >= 0`, else `0`
    #[serde(rename = "hardlimit")]
    Hardlimit,
}

impl FromStr for ActivationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "rbf" => Ok(ActivationKind::RadialBasis),
            "hardlimit" => Ok(ActivationKind::Hardlimit),
            other => Err(format!(
                "unknown activation {other:?} (sigmoid|rbf|hardlimit)"
            )),
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::RadialBasis => "rbf",
            ActivationKind::Hardlimit => "hardlimit",
        })
    }
}

/// Random hidden-layer parameters: one row of `weights` and one bias per node.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Draw `hidden` nodes for `p` inputs. Weights and biases are uniform on
/// `[-1, 1]`; radial-basis widths are uniform on `(0, 1]`.
pub fn random_hidden_layer(
    p: usize,
    hidden: usize,
    activation: ActivationKind,
    seed: u64,
) -> Result<HiddenLayer> {
    if p == 0 || hidden == 0 {
        return Err(Error::InvalidArgument(format!(
            "hidden layer needs p >= 1 and L >= 1 (got p={p}, L={hidden})"
        )));
    }
    let mut rng = seed::rng(seed);
    let weights = Array2::from_shape_simple_fn((hidden, p), || rng.random_range(-1.0..=1.0));
    let biases = match activation {
        ActivationKind::RadialBasis => {
            Array1::from_shape_simple_fn(hidden, || 1.0 - rng.random::<f64>())
        }
        _ => Array1::from_shape_simple_fn(hidden, || rng.random_range(-1.0..=1.0)),
    };
    Ok(HiddenLayer { weights, biases })
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Hidden-layer matrix `H` (n × L) for inputs `x` (n × p).
pub fn hidden_matrix(
    x: ArrayView2<'_, f64>,
    weights: ArrayView2<'_, f64>,
    biases: ArrayView1<'_, f64>,
    activation: ActivationKind,
) -> Result<Array2<f64>> {
    if x.ncols() != weights.ncols() {
        return Err(Error::DimensionMismatch {
            expected: weights.ncols(),
            found: x.ncols(),
        });
    }
    if biases.len() != weights.nrows() {
        return Err(Error::DimensionMismatch {
            expected: weights.nrows(),
            found: biases.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input features"));
    }
    let h = match activation {
        ActivationKind::Sigmoid | ActivationKind::Hardlimit => {
            let mut z = x.dot(&weights.t());
            z += &biases;
            if activation == ActivationKind::Sigmoid {
                z.mapv_inplace(sigmoid);
            } else {
                z.mapv_inplace(|v| if v >= 0.0 { 1.0 } else { 0.0 });
            }
            z
        }
        ActivationKind::RadialBasis => {
            let mut h = Array2::zeros((x.nrows(), weights.nrows()));
            for (xi, mut hrow) in x.outer_iter().zip(h.outer_iter_mut()) {
                for ((a, &b), out) in weights.outer_iter().zip(biases).zip(hrow.iter_mut()) {
                    let d2: f64 = xi.iter().zip(a).map(|(u, v)| (u - v) * (u - v)).sum();
                    *out = (-b * d2).exp();
                }
            }
            h
        }
    };
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hidden-layer matrix"));
    }
    Ok(h)
}

/// How the output weights were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    /// Ridge actually used.
    pub ridge: f64,
    /// True when the requested ridge produced a singular system and a
    /// larger one was substituted.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub beta: Array2<f64>,
    pub info: SolveInfo,
}

/// Solve `min ‖W^{1/2}(Hβ − T)‖² + ridge ‖β‖²` through the normal equations
/// `(HᵀWH + ridge I) β = HᵀWT`.
///
/// A singular system is retried with ridge `1e-8`, then with ridge growing
/// tenfold, and the substitution is recorded in [`SolveInfo`].
pub fn solve_output_weights(
    h: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    ridge: f64,
    sample_weights: Option<&[f64]>,
) -> Result<Solution> {
    let n = h.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: targets.nrows(),
        });
    }
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ridge must be finite and non-negative, got {ridge}"
        )));
    }
    let (a, b) = match sample_weights {
        None => (h.t().dot(&h), h.t().dot(&targets)),
        Some(w) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument(
                    "sample weights must be finite and non-negative".into(),
                ));
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::DegenerateDistribution(
                    "sample weights sum to zero".into(),
                ));
            }
            let root = ArrayView1::from(w).mapv(f64::sqrt).insert_axis(Axis(1));
            let hw = &h * &root;
            let tw = &targets * &root;
            (hw.t().dot(&hw), hw.t().dot(&tw))
        }
    };

    let mut r = ridge;
    let mut fallback = false;
    for _ in 0..40 {
        let mut system = a.clone();
        system.diag_mut().mapv_inplace(|d| d + r);
        if let Some(l) = linalg::cholesky(system.view()) {
            let mut beta = b.clone();
            linalg::cholesky_solve(l.view(), &mut beta);
            if beta.iter().all(|v| v.is_finite()) {
                return Ok(Solution {
                    beta,
                    info: SolveInfo { ridge: r, fallback },
                });
            }
        }
        fallback = true;
        r = if r < FALLBACK_RIDGE {
            FALLBACK_RIDGE
        } else {
            r * 10.0
        };
    }
    Err(Error::NonFinite("output-weight solve"))
}

/// `n × k` one-hot encoding of class indices.
pub fn one_hot(labels: &[usize], k: usize) -> Array2<f64> {
    let mut t = Array2::zeros((labels.len(), k));
    for (i, &y) in labels.iter().enumerate() {
        t[[i, y]] = 1.0;
    }
    t
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Hyper-parameters of a single ELM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElmParams {
    pub hidden: usize,
    pub activation: ActivationKind,
    pub ridge: f64,
}

/// A trained single-hidden-layer network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    pub activation: ActivationKind,
    pub k: usize,
    pub p: usize,
    /// `L × p`, one row per hidden node.
    #[serde(with = "crate::matrix_serde")]
    pub input_weights: Array2<f64>,
    #[serde(with = "crate::matrix_serde::vector")]
    pub biases: Array1<f64>,
    /// `L × k`.
    #[serde(with = "crate::matrix_serde")]
    pub beta: Array2<f64>,
    pub solve: SolveInfo,
}

impl ElmModel {
    /// Train on `ds`. With `sample_weights` the fit is weighted least squares.
    pub fn train(
        ds: &Dataset,
        params: &ElmParams,
        seed: u64,
        sample_weights: Option<&[f64]>,
    ) -> Result<ElmModel> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let hidden = random_hidden_layer(ds.dims(), params.hidden, params.activation, seed)?;
        let h = hidden_matrix(
            ds.features(),
            hidden.weights.view(),
            hidden.biases.view(),
            params.activation,
        )?;
        let t = one_hot(ds.labels(), ds.k());
        let sol = solve_output_weights(h.view(), t.view(), params.ridge, sample_weights)?;
        Ok(ElmModel {
            activation: params.activation,
            k: ds.k(),
            p: ds.dims(),
            input_weights: hidden.weights,
            biases: hidden.biases,
            beta: sol.beta,
            solve: sol.info,
        })
    }

    pub fn hidden_nodes(&self) -> usize {
        self.biases.len()
    }

    /// Raw class scores `H β` (n × k).
    pub fn predict_scores(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: x.ncols(),
            });
        }
        let h = hidden_matrix(
            x,
            self.input_weights.view(),
            self.biases.view(),
            self.activation,
        )?;
        Ok(h.dot(&self.beta))
    }

    /// Argmax class per row, ties to the lowest class index.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let scores = self.predict_scores(x)?;
        Ok(scores.outer_iter().map(argmax).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn hidden_layer_is_deterministic_and_bounded() {
        let a = random_hidden_layer(16, 200, ActivationKind::Sigmoid, 7).unwrap();
        let b = random_hidden_layer(16, 200, ActivationKind::Sigmoid, 7).unwrap();
        assert_eq!(a, b);
        let one = random_hidden_layer(3, 1, ActivationKind::Sigmoid, 123).unwrap();
        assert_eq!(one.weights.dim(), (1, 3));
        assert!(one.weights.iter().all(|v| (-1.0..=1.0).contains(v)));
        let rbf = random_hidden_layer(4, 500, ActivationKind::RadialBasis, 1).unwrap();
        assert!(rbf.biases.iter().all(|&b| b > 0.0 && b <= 1.0));
    }

    #[test]
    fn hidden_layer_mean_near_zero() {
        // 160000 draws from U[-1,1]: sigma of the mean is 1/sqrt(3*160000).
        let hl = random_hidden_layer(16, 10_000, ActivationKind::Sigmoid, 11).unwrap();
        let mean = hl.weights.mean().unwrap();
        let sigma = 1.0 / (3.0f64 * 160_000.0).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn invalid_hidden_layer_sizes() {
        assert!(random_hidden_layer(0, 3, ActivationKind::Sigmoid, 0).is_err());
        assert!(random_hidden_layer(3, 0, ActivationKind::Sigmoid, 0).is_err());
    }

    #[test]
    fn sigmoid_closed_forms() {
        let x = array![[1.0, 2.0], [-3.0, 4.0]];
        let h = hidden_matrix(
            x.view(),
            array![[0.0, 0.0]].view(),
            array![0.0].view(),
            ActivationKind::Sigmoid,
        )
        .unwrap();
        assert_eq!(h, array![[0.5], [0.5]]);

        let h = hidden_matrix(
            array![[1.0]].view(),
            array![[1.0]].view(),
            array![3.0f64.ln() - 1.0].view(),
            ActivationKind::Sigmoid,
        )
        .unwrap();
        assert!((h[[0, 0]] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn hardlimit_and_rbf_values() {
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        let w = array![[1.0, -1.0]];
        let h = hidden_matrix(
            x.view(),
            w.view(),
            array![0.0].view(),
            ActivationKind::Hardlimit,
        )
        .unwrap();
        assert_eq!(h, array![[1.0], [0.0]]);
        let h = hidden_matrix(
            x.view(),
            w.view(),
            array![0.5].view(),
            ActivationKind::RadialBasis,
        )
        .unwrap();
        // ‖(1,0)-(1,-1)‖² = 1, ‖(0,1)-(1,-1)‖² = 5
        assert!((h[[0, 0]] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((h[[1, 0]] - (-2.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hidden_matrix_errors() {
        let w = array![[1.0, 1.0]];
        let b = array![0.0];
        assert!(matches!(
            hidden_matrix(
                array![[1.0]].view(),
                w.view(),
                b.view(),
                ActivationKind::Sigmoid
            ),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            hidden_matrix(
                array![[f64::NAN, 1.0]].view(),
                w.view(),
                b.view(),
                ActivationKind::Sigmoid
            ),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn identity_and_mean_solves() {
        let i2 = Array2::<f64>::eye(2);
        let s = solve_output_weights(i2.view(), i2.view(), 0.0, None).unwrap();
        assert_eq!(s.beta, i2);
        assert!(!s.info.fallback);

        let s = solve_output_weights(
            array![[1.0], [1.0]].view(),
            array![[0.0], [1.0]].view(),
            0.0,
            None,
        )
        .unwrap();
        assert!((s.beta[[0, 0]] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_system_falls_back() {
        let h = array![[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]];
        let t = array![[1.0], [0.0], [1.0]];
        let s = solve_output_weights(h.view(), t.view(), 0.0, None).unwrap();
        assert!(s.info.fallback);
        assert!(s.info.ridge >= FALLBACK_RIDGE);
        assert!(s.beta.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn solve_argument_errors() {
        let h = array![[1.0], [2.0]];
        let t = array![[1.0], [0.0]];
        assert!(solve_output_weights(h.view(), t.view(), -1.0, None).is_err());
        assert!(solve_output_weights(h.view(), t.view(), 0.0, Some(&[0.0, 0.0])).is_err());
        assert!(solve_output_weights(h.view(), t.view(), 0.0, Some(&[1.0])).is_err());
        assert!(solve_output_weights(h.view(), array![[1.0]].view(), 0.0, None).is_err());
    }

    #[test]
    fn zero_beta_and_empty_input() {
        let ds = crate::dataio::parse_svmlight(b"0 1:1\n1 2:1\n", None).unwrap();
        let params = ElmParams {
            hidden: 4,
            activation: ActivationKind::Sigmoid,
            ridge: 1e-3,
        };
        let mut m = ElmModel::train(&ds, &params, 1, None).unwrap();
        let empty = Array2::<f64>::zeros((0, 2));
        assert_eq!(m.predict_scores(empty.view()).unwrap().dim(), (0, 2));
        m.beta.fill(0.0);
        assert!(m
            .predict_scores(ds.features())
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(m.predict(array![[1.0, 2.0, 3.0]].view()).is_err());
    }

    #[test]
    fn dominant_column_and_ties() {
        let ds = crate::dataio::parse_svmlight(b"0 1:1\n1 2:1\n", None).unwrap();
        let params = ElmParams {
            hidden: 3,
            activation: ActivationKind::Sigmoid,
            ridge: 0.0,
        };
        let mut m = ElmModel::train(&ds, &params, 9, None).unwrap();
        m.beta = array![[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]];
        assert_eq!(m.predict(ds.features()).unwrap(), vec![1, 1]);
        m.beta = array![[1.0, 1.0], [2.0, 2.0], [0.5, 0.5]];
        assert_eq!(m.predict(ds.features()).unwrap(), vec![0, 0]);
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(array![1.0, 3.0, 3.0].view()), 1);
        assert_eq!(argmax(array![2.0, 2.0].view()), 0);
        assert_eq!(argmax(array![-1.0].view()), 0);
    }

    #[test]
    fn activation_names_round_trip() {
        for a in [
            ActivationKind::Sigmoid,
            ActivationKind::RadialBasis,
            ActivationKind::Hardlimit,
        ] {
            assert_eq!(a.to_string().parse::<ActivationKind>().unwrap(), a);
        }
        assert!("tanh".parse::<ActivationKind>().is_err());
    }
}
