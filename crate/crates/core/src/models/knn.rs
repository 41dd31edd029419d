//! k-nearest-neighbour regression.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Indices of the `k` training rows closest to `query` in Euclidean distance,
/// nearest first; equal distances go to the lower row index.
pub fn nearest_rows(train: &DMatrix<f64>, query: &[f64], k: usize) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = (0..train.nrows())
        .map(|l| {
            let d2: f64 = query
                .iter()
                .enumerate()
                .map(|(j, q)| {
                    let d = q - train[(l, j)];
                    d * d
                })
                .sum();
            (d2, l)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored.into_iter().map(|(_, l)| l).collect()
}

/// Mean target of the `k` nearest training rows for every query row. A
/// training row used as a query is its own nearest neighbour.
pub fn knn_regress(
    x_train: &DMatrix<f64>,
    y_train: &DVector<f64>,
    x_query: &DMatrix<f64>,
    k: usize,
) -> Result<DVector<f64>> {
    if x_train.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if x_train.nrows() != y_train.len() {
        return Err(Error::LengthMismatch {
            left: x_train.nrows(),
            right: y_train.len(),
        });
    }
    if x_query.ncols() != x_train.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x_train.ncols(),
            found: x_query.ncols(),
        });
    }
    if k == 0 || k > x_train.nrows() {
        return Err(Error::InvalidParameter(alloc::format!(
            "k = {k} with {} training rows",
            x_train.nrows()
        )));
    }
    let mut out = DVector::zeros(x_query.nrows());
    let mut query = alloc::vec![0.0; x_query.ncols()];
    for i in 0..x_query.nrows() {
        for (j, q) in query.iter_mut().enumerate() {
            *q = x_query[(i, j)];
        }
        let nbrs = nearest_rows(x_train, &query, k);
        out[i] = nbrs.iter().map(|&l| y_train[l]).sum::<f64>() / k as f64;
    }
    Ok(out)
}
