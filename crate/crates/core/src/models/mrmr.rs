//! Minimum-redundancy maximum-relevance selection with correlation scores.
//!
//! Relevance of column `j` is `|corr(x_j, y)|`; redundancy against the chosen
//! set `S` is the mean of `|corr(x_j, x_s)|` over `s ∈ S`. Each step picks the
//! column maximizing relevance minus redundancy, lower index on ties.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MrmrSelection {
    /// Selected columns in pick order.
    pub order: Vec<usize>,
    /// Zero-variance columns; their correlations count as 0.
    pub constant_columns: Vec<usize>,
}

/// Centres each column and scales it to unit norm; zero columns stay zero.
fn unit_columns(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<bool>) {
    let m = x.nrows() as f64;
    let mut z = x.clone();
    let mut constant = vec![false; x.ncols()];
    for (j, mut col) in z.column_iter_mut().enumerate() {
        let mean = col.sum() / m;
        col.add_scalar_mut(-mean);
        let norm = col.norm();
        if norm > 1e-12 * (1.0 + mean.abs()) * m.sqrt() {
            col /= norm;
        } else {
            col.fill(0.0);
            constant[j] = true;
        }
    }
    (z, constant)
}

pub fn mrmr_select(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<MrmrSelection> {
    let n = x.ncols();
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if k > n {
        return Err(Error::InvalidParameter(alloc::format!("k = {k} exceeds {n} columns")));
    }
    let (z, constant) = unit_columns(x);
    let yc = y.add_scalar(-y.mean());
    let y_norm = yc.norm();
    let relevance: Vec<f64> = (0..n)
        .map(|j| {
            if y_norm > 0.0 {
                (z.column(j).dot(&yc) / y_norm).abs().min(1.0)
            } else {
                0.0
            }
        })
        .collect();

    let mut chosen = vec![false; n];
    let mut redundancy_sum = vec![0.0; n];
    let mut order = Vec::with_capacity(k);
    for step in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !chosen[j]) {
            let score = if step == 0 {
                relevance[j]
            } else {
                relevance[j] - redundancy_sum[j] / step as f64
            };
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let (pick, _) = best.expect("k <= n leaves a candidate");
        chosen[pick] = true;
        order.push(pick);
        let zp = z.column(pick);
        for j in (0..n).filter(|&j| !chosen[j]) {
            redundancy_sum[j] += z.column(j).dot(&zp).abs().min(1.0);
        }
    }

    Ok(MrmrSelection {
        order,
        constant_columns: (0..n).filter(|&j| constant[j]).collect(),
    })
}
