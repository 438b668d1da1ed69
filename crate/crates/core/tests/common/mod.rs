#![allow(dead_code)]

use boostelm::Dataset;
use ndarray::Array2;

/// Solve `a x = b` column by column with partial pivoting.
pub fn gauss_solve(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut x = Array2::zeros(b.raw_dim());
    for col in 0..b.ncols() {
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row: Vec<f64> = a.row(i).to_vec();
                row.push(b[[i, col]]);
                row
            })
            .collect();
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
                .unwrap();
            m.swap(c, piv);
            let pivot_row = m[c].clone();
            for row in m.iter_mut().skip(c + 1) {
                let f = row[c] / pivot_row[c];
                for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                    *v -= f * p;
                }
            }
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|j| m[r][j] * x[[j, col]]).sum();
            x[[r, col]] = (m[r][n] - s) / m[r][r];
        }
    }
    x
}

/// Two well separated blobs per class along the first axes.
pub fn separable(n_per_class: usize, k: usize, p: usize) -> Dataset {
    let n = n_per_class * k;
    let mut x = Array2::zeros((n, p));
    let mut y = Vec::with_capacity(n);
    for c in 0..k {
        for i in 0..n_per_class {
            let r = c * n_per_class + i;
            for j in 0..p {
                let jitter = ((r * 7 + j * 13) % 11) as f64 / 11.0 - 0.5;
                x[[r, j]] = if j == c % p { 4.0 } else { 0.0 } + 0.2 * jitter;
            }
            y.push(c);
        }
    }
    Dataset::new(x, y, k, (0..k as i64).collect()).unwrap()
}
