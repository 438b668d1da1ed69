//! Dense Cholesky factorization for the symmetric positive definite systems
//! arising in the output-weight solve.

use ndarray::{Array2, ArrayView2};

/// Lower-triangular factor `L` with `A = L Lᵀ`, or `None` when a pivot is
/// not strictly positive.
pub fn cholesky(a: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !d.is_finite() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Some(l)
}

/// Solve `L Lᵀ X = B` in place of `b` given the Cholesky factor.
pub fn cholesky_solve(l: ArrayView2<'_, f64>, b: &mut Array2<f64>) {
    let n = l.nrows();
    for c in 0..b.ncols() {
        // forward: L y = b
        for i in 0..n {
            let mut s = b[[i, c]];
            for k in 0..i {
                s -= l[[i, k]] * b[[k, c]];
            }
            b[[i, c]] = s / l[[i, i]];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = b[[i, c]];
            for k in (i + 1)..n {
                s -= l[[k, i]] * b[[k, c]];
            }
            b[[i, c]] = s / l[[i, i]];
        }
    }
}
