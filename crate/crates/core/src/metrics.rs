//! Evaluation metrics: prediction error, selection stability, redundancy,
//! share of prior-elevated features and coefficient sign summaries.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pearson;

pub fn rmse(y: &DVector<f64>, yhat: &DVector<f64>) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::InvalidParameter("rmse of an empty vector".into()));
    }
    Ok(((y - yhat).norm_squared() / y.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    /// Estimator clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped estimator; may be negative.
    pub raw: f64,
    /// Mean set size was 0 or `n`; the value is reported as 0.
    pub degenerate: bool,
}

/// Stability of a collection of selected sets over `n` features:
///
/// `1 - mean_f(s_f²) / ((k̄/n)(1 - k̄/n))`
///
/// where `s_f² = M/(M-1) p_f (1 - p_f)` is the unbiased variance of the
/// selection indicator of feature `f` over the `M` sets and `k̄` the mean set size.
pub fn stability(sets: &[BTreeSet<usize>], n: usize) -> Result<Stability> {
    let m = sets.len();
    if m < 2 {
        return Err(Error::InvalidParameter("stability needs at least two sets".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("stability over zero features".into()));
    }
    let mut freq = alloc::vec![0usize; n];
    for s in sets {
        for &f in s {
            if f >= n {
                return Err(Error::InvalidParameter(alloc::format!("feature {f} outside 0..{n}")));
            }
            freq[f] += 1;
        }
    }
    let mf = m as f64;
    let nf = n as f64;
    let k_bar = sets.iter().map(BTreeSet::len).sum::<usize>() as f64 / mf;
    let denom = (k_bar / nf) * (1.0 - k_bar / nf);
    if denom <= 0.0 {
        return Ok(Stability {
            value: 0.0,
            raw: 0.0,
            degenerate: true,
        });
    }
    let var_sum: f64 = freq
        .iter()
        .map(|&c| {
            let p = c as f64 / mf;
            mf / (mf - 1.0) * p * (1.0 - p)
        })
        .sum();
    let raw = 1.0 - (var_sum / nf) / denom;
    Ok(Stability {
        value: raw.clamp(0.0, 1.0),
        raw,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Redundancy {
    pub value: f64,
    /// Pairs left out because a column had zero variance.
    pub skipped_pairs: usize,
}

/// Mean absolute Pearson correlation over unordered pairs of selected columns.
/// A single column has redundancy 0.
pub fn redundancy_rate(x: &DMatrix<f64>, selected: &BTreeSet<usize>) -> Result<Redundancy> {
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    if let Some(&j) = selected.iter().find(|&&j| j >= x.ncols()) {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: j + 1,
        });
    }
    let cols: Vec<usize> = selected.iter().copied().collect();
    let (mut sum, mut pairs, mut skipped) = (0.0, 0usize, 0usize);
    for (a, &ja) in cols.iter().enumerate() {
        for &jb in &cols[a + 1..] {
            match pearson(x.column(ja).iter(), x.column(jb).iter()) {
                Some(r) => {
                    sum += r.abs();
                    pairs += 1;
                }
                None => skipped += 1,
            }
        }
    }
    Ok(Redundancy {
        value: if pairs > 0 { sum / pairs as f64 } else { 0.0 },
        skipped_pairs: skipped,
    })
}

/// Fraction of the selected set that is prior-elevated.
pub fn perc(selected: &BTreeSet<usize>, elevated: &BTreeSet<usize>) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(selected.intersection(elevated).count() as f64 / selected.len() as f64)
}

/// Sign agreement of a feature's coefficients over the folds that selected it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClass {
    AlwaysPositive,
    MostlyPositive,
    Even,
    MostlyNegative,
    AlwaysNegative,
    NeverSelected,
}

impl SignClass {
    /// Table notation: `++`, `+`, empty, `-`, `--`.
    pub fn symbol(self) -> &'static str {
        match self {
            SignClass::AlwaysPositive => "++",
            SignClass::MostlyPositive => "+",
            SignClass::Even | SignClass::NeverSelected => "",
            SignClass::MostlyNegative => "-",
            SignClass::AlwaysNegative => "--",
        }
    }
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Classifies one feature from its per-fold coefficients (`None` where the
/// feature was not selected).
pub fn sign_class(coeffs: &[Option<f64>]) -> SignClass {
    let present: Vec<f64> = coeffs.iter().flatten().copied().collect();
    if present.is_empty() {
        return SignClass::NeverSelected;
    }
    let pos = present.iter().filter(|&&c| c > 0.0).count();
    let neg = present.iter().filter(|&&c| c < 0.0).count();
    let total = present.len();
    if pos == total {
        SignClass::AlwaysPositive
    } else if neg == total {
        SignClass::AlwaysNegative
    } else if pos > neg {
        SignClass::MostlyPositive
    } else if neg > pos {
        SignClass::MostlyNegative
    } else {
        SignClass::Even
    }
}

/// Sign classes for every feature; `coeff_by_fold[f][j]` is feature `j`'s
/// coefficient in fold `f`.
pub fn sign_summary(coeff_by_fold: &[Vec<Option<f64>>]) -> Vec<SignClass> {
    let n = coeff_by_fold.iter().map(Vec::len).max().unwrap_or(0);
    (0..n)
        .map(|j| {
            let per_fold: Vec<Option<f64>> = coeff_by_fold.iter().map(|f| f.get(j).copied().flatten()).collect();
            sign_class(&per_fold)
        })
        .collect()
}
