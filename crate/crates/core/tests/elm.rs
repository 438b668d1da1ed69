mod common;

use boostelm::elm::{self, hidden_matrix, one_hot, random_hidden_layer, solve_output_weights};
use boostelm::{ActivationKind, ElmModel, ElmParams};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(lo..hi, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn instance() -> impl Strategy<Value = (Array2<f64>, Vec<usize>, usize, Vec<f64>, f64)> {
    (1usize..=8, 1usize..=5, 2usize..=3).prop_flat_map(|(n, l, k)| {
        (
            matrix(n, l, 0.0, 1.0),
            prop::collection::vec(0..k, n),
            Just(k),
            prop::collection::vec(0.05f64..2.0, n),
            1e-2f64..1.0,
        )
    })
}

fn objective(h: &Array2<f64>, t: &Array2<f64>, w: &[f64], ridge: f64, beta: &Array2<f64>) -> f64 {
    let r = h.dot(beta) - t;
    let fit: f64 = r
        .outer_iter()
        .zip(w)
        .map(|(row, wi)| wi * row.iter().map(|v| v * v).sum::<f64>())
        .sum();
    fit + ridge * beta.iter().map(|v| v * v).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_matches_gaussian_elimination((h, y, k, w, ridge) in instance()) {
        let t = one_hot(&y, k);
        let sol = solve_output_weights(h.view(), t.view(), ridge, Some(&w)).unwrap();
        let wcol = Array1::from(w.clone()).insert_axis(ndarray::Axis(1));
        let mut a = h.t().dot(&(&h * &wcol));
        for i in 0..a.nrows() {
            a[[i, i]] += ridge;
        }
        let b = h.t().dot(&(&t * &wcol));
        let oracle = common::gauss_solve(&a, &b);
        for (x, o) in sol.beta.iter().zip(&oracle) {
            prop_assert!((x - o).abs() < 1e-9, "{x} vs {o}");
        }
    }

    #[test]
    fn perturbing_beta_never_lowers_the_objective(
        (h, y, k, w, ridge) in instance(),
        pick in any::<prop::sample::Index>(),
        sign in prop::bool::ANY,
    ) {
        let t = one_hot(&y, k);
        let beta = solve_output_weights(h.view(), t.view(), ridge, Some(&w)).unwrap().beta;
        let base = objective(&h, &t, &w, ridge, &beta);
        let mut moved = beta.clone();
        let idx = pick.index(moved.len());
        let cols = moved.ncols();
        moved[[idx / cols, idx % cols]] += if sign { 1e-3 } else { -1e-3 };
        prop_assert!(objective(&h, &t, &w, ridge, &moved) >= base - 1e-12);
    }

    #[test]
    fn scaling_weights_and_ridge_together_keeps_beta(
        (h, y, k, w, ridge) in instance(),
        c in 0.1f64..10.0,
    ) {
        let t = one_hot(&y, k);
        let a = solve_output_weights(h.view(), t.view(), ridge, Some(&w)).unwrap().beta;
        let ws: Vec<f64> = w.iter().map(|v| v * c).collect();
        let b = solve_output_weights(h.view(), t.view(), ridge * c, Some(&ws)).unwrap().beta;
        for (x, z) in a.iter().zip(&b) {
            prop_assert!((x - z).abs() < 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn hidden_matrix_matches_scalar_activation(
        x in matrix(6, 3, -2.0, 2.0),
        act in prop::sample::select(vec![
            ActivationKind::Sigmoid,
            ActivationKind::RadialBasis,
            ActivationKind::Hardlimit,
        ]),
        seed in any::<u64>(),
    ) {
        let layer = random_hidden_layer(3, 4, act, seed).unwrap();
        let h = hidden_matrix(x.view(), layer.weights.view(), layer.biases.view(), act).unwrap();
        for i in 0..6 {
            for j in 0..4 {
                let a = layer.weights.row(j);
                let b = layer.biases[j];
                let dot: f64 = (0..3).map(|d| a[d] * x[[i, d]]).sum::<f64>() + b;
                let g = match act {
                    ActivationKind::Sigmoid => 1.0 / (1.0 + (-dot).exp()),
                    ActivationKind::Hardlimit => if dot >= 0.0 { 1.0 } else { 0.0 },
                    ActivationKind::RadialBasis => {
                        let d2: f64 = (0..3).map(|d| (x[[i, d]] - a[d]).powi(2)).sum();
                        (-b * d2).exp()
                    }
                };
                prop_assert!((h[[i, j]] - g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn predict_ignores_positive_beta_scaling(seed in any::<u64>(), c in 0.01f64..100.0) {
        let ds = boostelm::dataio::gaussian_mixture(60, 4, 3, 1.0, seed).unwrap();
        let params = ElmParams { hidden: 8, activation: ActivationKind::Sigmoid, ridge: 1e-6 };
        let model = ElmModel::train(&ds, &params, seed, None).unwrap();
        let mut scaled = model.clone();
        scaled.beta.mapv_inplace(|v| v * c);
        prop_assert_eq!(model.predict(ds.features()).unwrap(), scaled.predict(ds.features()).unwrap());
    }
}

#[test]
fn separable_clusters_are_learned_exactly() {
    let ds = common::separable(20, 3, 3);
    let params = ElmParams {
        hidden: 30,
        activation: ActivationKind::Sigmoid,
        ridge: 1e-8,
    };
    let model = ElmModel::train(&ds, &params, 7, None).unwrap();
    assert_eq!(model.predict(ds.features()).unwrap(), ds.labels());
}

#[test]
fn scores_argmax_is_prediction() {
    let ds = boostelm::dataio::gaussian_mixture(80, 5, 4, 1.0, 3).unwrap();
    let params = ElmParams {
        hidden: 12,
        activation: ActivationKind::RadialBasis,
        ridge: 1e-4,
    };
    let model = ElmModel::train(&ds, &params, 11, None).unwrap();
    let scores = model.predict_scores(ds.features()).unwrap();
    let by_hand: Vec<usize> = scores.outer_iter().map(elm::argmax).collect();
    assert_eq!(model.predict(ds.features()).unwrap(), by_hand);
}

#[test]
fn constructed_ties_pick_lowest_class() {
    let ds = common::separable(5, 3, 3);
    let params = ElmParams {
        hidden: 4,
        activation: ActivationKind::Sigmoid,
        ridge: 1e-8,
    };
    let mut model = ElmModel::train(&ds, &params, 1, None).unwrap();
    model.beta.fill(0.0);
    model.beta.column_mut(1).fill(1.0);
    model.beta.column_mut(2).fill(1.0);
    assert!(model
        .predict(ds.features())
        .unwrap()
        .iter()
        .all(|&c| c == 1));
}

#[test]
fn training_is_bit_reproducible() {
    let ds = boostelm::dataio::gaussian_mixture(50, 3, 2, 1.0, 5).unwrap();
    let params = ElmParams {
        hidden: 10,
        activation: ActivationKind::Sigmoid,
        ridge: 1e-8,
    };
    let a = ElmModel::train(&ds, &params, 42, None).unwrap();
    let b = ElmModel::train(&ds, &params, 42, None).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
