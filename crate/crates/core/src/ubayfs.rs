//! Prior-weighted ensemble selection under a maximum-size constraint.
//!
//! Each of `M` elementary selectors picks exactly `max_s` columns on a seeded
//! row subsample. The posterior score of a column is its prior weight plus
//! the number of elementary models that picked it. With the size limit as the
//! only constraint the score is additive over columns, so the best feature set
//! is simply the `max_s` highest scores.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::EncodedColumn;
use crate::error::{Error, Result};
use crate::models::mrmr::mrmr_select;
use crate::sampling::subsample;

pub const DEFAULT_PRIOR_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UBayConfig {
    pub models: usize,
    pub split_ratio: f64,
    pub max_s: usize,
    /// One weight per encoded column.
    pub prior_weights: Vec<f64>,
    pub seed: u64,
}

impl UBayConfig {
    /// Default configuration for `n` columns: 100 models, 0.75 subsamples,
    /// `max_s = 20` and a uniform prior weight of 0.1.
    pub fn uniform(n: usize) -> Self {
        UBayConfig {
            models: 100,
            split_ratio: 0.75,
            max_s: 20,
            prior_weights: vec![DEFAULT_PRIOR_WEIGHT; n],
            seed: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.models == 0 {
            return Err(Error::InvalidParameter("need at least one elementary model".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!("split ratio {} outside (0, 1]", self.split_ratio)));
        }
        if self.max_s == 0 || self.max_s > n {
            return Err(Error::InvalidParameter(format!("max_s = {} with {n} columns", self.max_s)));
        }
        if self.prior_weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.prior_weights.len(),
            });
        }
        if let Some(w) = self.prior_weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("prior weight {w} is not positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UBayPosterior {
    /// Number of elementary models that selected each column.
    pub counts: Vec<u32>,
    /// `prior weight + count`.
    pub scores: Vec<f64>,
    pub models: usize,
}

impl UBayPosterior {
    pub fn from_counts(counts: Vec<u32>, weights: &[f64], models: usize) -> Self {
        let scores = counts.iter().zip(weights).map(|(&c, &w)| w + c as f64).collect();
        UBayPosterior { counts, scores, models }
    }

    /// Same counts under a different prior.
    pub fn rescore(&self, weights: &[f64]) -> Self {
        UBayPosterior::from_counts(self.counts.clone(), weights, self.models)
    }
}

/// A feature selector run on each subsample.
pub trait ElementarySelector {
    /// Returns exactly `k` distinct column indices.
    fn select(&self, x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<Vec<usize>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Mrmr;

impl ElementarySelector for Mrmr {
    fn select(&self, x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<Vec<usize>> {
        Ok(mrmr_select(x, y, k)?.order)
    }
}

pub fn ubay_train(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &UBayConfig) -> Result<UBayPosterior> {
    ubay_train_with(x, y, cfg, &Mrmr)
}

pub fn ubay_train_with<S: ElementarySelector>(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &UBayConfig,
    selector: &S,
) -> Result<UBayPosterior> {
    let (m, n) = x.shape();
    cfg.validate(n)?;
    if m != y.len() {
        return Err(Error::LengthMismatch { left: m, right: y.len() });
    }
    if m < 8 {
        return Err(Error::TooFewRows { needed: 8, found: m });
    }
    let mut counts = vec![0u32; n];
    for t in 0..cfg.models {
        let rows = subsample(m, cfg.split_ratio, cfg.seed, t);
        let xs = x.select_rows(&rows);
        let ys = DVector::from_iterator(rows.len(), rows.iter().map(|&r| y[r]));
        for j in selector.select(&xs, &ys, cfg.max_s)? {
            counts[j] += 1;
        }
    }
    Ok(UBayPosterior::from_counts(counts, &cfg.prior_weights, cfg.models))
}

/// Ranking used for selection: higher score, then higher count, then lower index.
fn rank(post: &UBayPosterior, a: usize, b: usize) -> Ordering {
    post.scores[b]
        .total_cmp(&post.scores[a])
        .then(post.counts[b].cmp(&post.counts[a]))
        .then(a.cmp(&b))
}

/// Columns ordered from best to worst posterior score.
pub fn ranking(post: &UBayPosterior) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..post.scores.len()).collect();
    idx.sort_by(|&a, &b| rank(post, a, b));
    idx
}

/// The `max_s` columns with the highest posterior scores.
pub fn ubay_select(post: &UBayPosterior, cfg: &UBayConfig) -> BTreeSet<usize> {
    ranking(post).into_iter().take(cfg.max_s).collect()
}

/// Sets weight `w` on every encoded column descending from an elevated
/// feature (or named directly) and the default weight everywhere else.
pub fn set_prior_weights<S: AsRef<str>>(
    cfg: &UBayConfig,
    columns: &[EncodedColumn],
    elevated: &[S],
    w: f64,
) -> Result<UBayConfig> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::InvalidParameter(format!("prior weight {w} is not positive")));
    }
    if columns.len() != cfg.prior_weights.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.prior_weights.len(),
            found: columns.len(),
        });
    }
    if elevated.is_empty() {
        return Ok(cfg.clone());
    }
    let mask = elevated_mask(columns, elevated)?;
    let mut out = cfg.clone();
    for (weight, hit) in out.prior_weights.iter_mut().zip(mask) {
        *weight = if hit { w } else { DEFAULT_PRIOR_WEIGHT };
    }
    Ok(out)
}

/// Columns descending from (or named by) any of the elevated names.
pub fn elevated_mask<S: AsRef<str>>(columns: &[EncodedColumn], elevated: &[S]) -> Result<Vec<bool>> {
    let mut mask = vec![false; columns.len()];
    for name in elevated {
        let name = name.as_ref();
        let mut found = false;
        for (hit, col) in mask.iter_mut().zip(columns) {
            if col.source == name || col.name == name {
                *hit = true;
                found = true;
            }
        }
        if !found {
            return Err(Error::UnknownFeatureName(String::from(name)));
        }
    }
    Ok(mask)
}
