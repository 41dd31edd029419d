//! Repeated elastic net selection.
//!
//! `M` elastic-net models are fitted on seeded row subsamples. For every
//! feature the ensemble of weights is summarized by
//!
//! * `c1`: fraction of models with a non-zero weight,
//! * `c2`: `|mean(sign(β))|`, the sign stability,
//! * a one-sample t statistic of the weights against zero.
//!
//! A feature is selected when `c1 >= τ1`, `c2 >= τ2` and `|t|` reaches the
//! `τ3` quantile of Student's t with `M - 1` degrees of freedom.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::elastic_net::{fit_elastic_net, fit_elastic_net_from, ElasticNetConfig, SolverOptions};
use crate::sampling::subsample;
use crate::special::student_t_quantile;

/// Weights with a smaller magnitude count as zero.
pub const NONZERO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RentConfig {
    pub models: usize,
    pub split_ratio: f64,
    pub net: ElasticNetConfig,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub seed: u64,
}

impl Default for RentConfig {
    fn default() -> Self {
        RentConfig {
            models: 100,
            split_ratio: 0.75,
            net: ElasticNetConfig { c: 1.0, l1_ratio: 0.3 },
            tau1: 0.3,
            tau2: 0.3,
            tau3: 0.975,
            seed: 0,
        }
    }
}

impl RentConfig {
    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        if self.models < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 models, got {}", self.models)));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!("split ratio {} outside (0, 1]", self.split_ratio)));
        }
        for (name, tau) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::InvalidParameter(format!("{name} = {tau} outside [0, 1]")));
            }
        }
        if !(self.tau3 > 0.5 && self.tau3 < 1.0) {
            return Err(Error::InvalidParameter(format!("tau3 = {} outside (0.5, 1)", self.tau3)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RentDiagnostics {
    /// `weights[(t, j)]`: weight of feature `j` in elementary model `t`.
    pub weights: DMatrix<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub t_stat: Vec<f64>,
    pub c3_pass: Vec<bool>,
    /// Critical value the t statistics were compared against.
    pub t_critical: f64,
    /// Models whose fit failed and were left out.
    pub skipped_models: usize,
    /// Models that hit the sweep limit; their last iterate is used.
    pub nonconverged_models: usize,
}

impl RentDiagnostics {
    /// Summarizes a models × features weight table.
    pub fn from_weights(weights: DMatrix<f64>, tau3: f64) -> Self {
        let (m_models, n) = weights.shape();
        let mf = m_models as f64;
        let t_critical = if m_models > 1 {
            student_t_quantile(tau3, mf - 1.0)
        } else {
            f64::INFINITY
        };
        let mut c1 = Vec::with_capacity(n);
        let mut c2 = Vec::with_capacity(n);
        let mut t_stat = Vec::with_capacity(n);
        let mut c3_pass = Vec::with_capacity(n);
        for col in weights.column_iter() {
            let nonzero = col.iter().filter(|b| b.abs() > NONZERO_TOLERANCE).count();
            let sign_sum: f64 = col
                .iter()
                .map(|&b| if b.abs() > NONZERO_TOLERANCE { b.signum() } else { 0.0 })
                .sum();
            c1.push(nonzero as f64 / mf);
            c2.push((sign_sum / mf).abs());

            let mean = col.sum() / mf;
            let var = if m_models > 1 {
                col.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / (mf - 1.0)
            } else {
                0.0
            };
            let t = if var > 0.0 {
                mean / (var / mf).sqrt()
            } else if mean.abs() > NONZERO_TOLERANCE {
                mean.signum() * f64::INFINITY
            } else {
                0.0
            };
            t_stat.push(t);
            c3_pass.push(t.abs() >= t_critical);
        }
        RentDiagnostics {
            weights,
            c1,
            c2,
            t_stat,
            c3_pass,
            t_critical,
            skipped_models: 0,
            nonconverged_models: 0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.c1.len()
    }
}

/// Fits the elementary models and summarizes their weights.
pub fn rent_train(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &RentConfig) -> Result<RentDiagnostics> {
    cfg.validate()?;
    let m = x.nrows();
    if m != y.len() {
        return Err(Error::LengthMismatch { left: m, right: y.len() });
    }
    if m < 8 {
        return Err(Error::TooFewRows { needed: 8, found: m });
    }
    let mut rows_out: Vec<DVector<f64>> = Vec::with_capacity(cfg.models);
    let mut skipped = 0;
    let mut nonconverged = 0;
    for t in 0..cfg.models {
        let rows = subsample(m, cfg.split_ratio, cfg.seed, t);
        let xs = x.select_rows(&rows);
        let ys = DVector::from_iterator(rows.len(), rows.iter().map(|&r| y[r]));
        match fit_elastic_net(&xs, &ys, &cfg.net) {
            Ok(fit) => {
                nonconverged += usize::from(!fit.converged);
                rows_out.push(fit.model.coefficients);
            }
            Err(_) => skipped += 1,
        }
    }
    if rows_out.len() < 2 {
        return Err(Error::InvalidParameter(format!("{skipped} of {} elementary fits failed", cfg.models)));
    }
    let n = x.ncols();
    let weights = DMatrix::from_fn(rows_out.len(), n, |t, j| rows_out[t][j]);
    let mut diag = RentDiagnostics::from_weights(weights, cfg.tau3);
    diag.skipped_models = skipped;
    diag.nonconverged_models = nonconverged;
    Ok(diag)
}

/// Trains RENT once for each value in `cs`, all other settings taken from
/// `cfg`. Every elementary model sees the same subsample for each C, and its
/// fit for one C starts from its solution for the previous C, so passing
/// `cs` in increasing order saves most of the work for weakly penalized fits.
pub fn rent_train_path(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &RentConfig, cs: &[f64]) -> Result<Vec<RentDiagnostics>> {
    cfg.validate()?;
    let nets: Vec<ElasticNetConfig> = cs
        .iter()
        .map(|&c| ElasticNetConfig::new(c, cfg.net.l1_ratio))
        .collect::<Result<_>>()?;
    let m = x.nrows();
    if m != y.len() {
        return Err(Error::LengthMismatch { left: m, right: y.len() });
    }
    if m < 8 {
        return Err(Error::TooFewRows { needed: 8, found: m });
    }
    let opts = SolverOptions::default();
    let mut rows_out: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(cfg.models); nets.len()];
    let mut skipped = vec![0; nets.len()];
    let mut nonconverged = vec![0; nets.len()];
    for t in 0..cfg.models {
        let rows = subsample(m, cfg.split_ratio, cfg.seed, t);
        let xs = x.select_rows(&rows);
        let ys = DVector::from_iterator(rows.len(), rows.iter().map(|&r| y[r]));
        let mut start: Option<DVector<f64>> = None;
        for (k, net) in nets.iter().enumerate() {
            match fit_elastic_net_from(&xs, &ys, net, &opts, start.as_ref()) {
                Ok(fit) => {
                    nonconverged[k] += usize::from(!fit.converged);
                    start = Some(fit.model.coefficients.clone());
                    rows_out[k].push(fit.model.coefficients);
                }
                Err(_) => {
                    skipped[k] += 1;
                    start = None;
                }
            }
        }
    }
    let n = x.ncols();
    rows_out
        .into_iter()
        .enumerate()
        .map(|(k, w)| {
            if w.len() < 2 {
                return Err(Error::InvalidParameter(format!("{} of {} elementary fits failed", skipped[k], cfg.models)));
            }
            let weights = DMatrix::from_fn(w.len(), n, |t, j| w[t][j]);
            let mut diag = RentDiagnostics::from_weights(weights, cfg.tau3);
            diag.skipped_models = skipped[k];
            diag.nonconverged_models = nonconverged[k];
            Ok(diag)
        })
        .collect()
}

/// Features passing all three criteria.
pub fn rent_select(diag: &RentDiagnostics, cfg: &RentConfig) -> BTreeSet<usize> {
    select_with_thresholds(diag, cfg.tau1, cfg.tau2, true)
}

/// Selection with explicit thresholds; `significance = false` skips the t test.
/// A feature that is never non-zero is never selected.
pub fn select_with_thresholds(diag: &RentDiagnostics, tau1: f64, tau2: f64, significance: bool) -> BTreeSet<usize> {
    (0..diag.n_features())
        .filter(|&j| {
            diag.c1[j] > 0.0
                && diag.c1[j] >= tau1
                && diag.c2[j] >= tau2
                && (!significance || diag.c3_pass[j])
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CappedSelection {
    pub selected: BTreeSet<usize>,
    /// `|selected| <= max_s`. Oversized sets are reported, never truncated.
    pub feasible: bool,
    pub diagnostics: RentDiagnostics,
}

pub fn rent_select_capped(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &RentConfig, max_s: usize) -> Result<CappedSelection> {
    if max_s == 0 {
        return Err(Error::InvalidParameter("max_s must be at least 1".into()));
    }
    let diagnostics = rent_train(x, y, cfg)?;
    let selected = rent_select(&diagnostics, cfg);
    Ok(CappedSelection {
        feasible: selected.len() <= max_s,
        selected,
        diagnostics,
    })
}
