//! Elastic-net linear regression by cyclic coordinate descent.
//!
//! Minimizes over `(b0, β)`
//!
//! ```text
//! 1/(2m) ||y - b0 - Xβ||² + λ (ℓ1 ||β||₁ + (1 - ℓ1)/2 ||β||₂²),    λ = 1/C
//! ```
//!
//! The intercept is unpenalized, so the problem is solved on centred data and
//! `b0` recovered from the means. Coordinates are visited in column order;
//! after each full sweep that changed something, the non-zero coordinates are
//! swept alone until they settle, then a full sweep checks the rest.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use super::linear::{center, LinearModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetConfig {
    /// Inverse regularization strength, `λ = 1/C`.
    pub c: f64,
    /// Share of the penalty on the ℓ1 term.
    pub l1_ratio: f64,
}

impl ElasticNetConfig {
    pub fn new(c: f64, l1_ratio: f64) -> Result<Self> {
        let cfg = ElasticNetConfig { c, l1_ratio };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {}", self.c)));
        }
        if !(0.0..=1.0).contains(&self.l1_ratio) {
            return Err(Error::InvalidParameter(format!(
                "l1 ratio must lie in [0, 1], got {}",
                self.l1_ratio
            )));
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        1.0 / self.c
    }

    fn penalties(&self) -> (f64, f64) {
        let lambda = self.lambda();
        (lambda * self.l1_ratio, lambda * (1.0 - self.l1_ratio))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Converged when a full sweep moves no coordinate by this much.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-7,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ElasticNetFit {
    pub model: LinearModel,
    pub sweeps: usize,
    /// False when `max_sweeps` ran out; the model is then the last iterate,
    /// which is also the best one since every sweep is a descent step.
    pub converged: bool,
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub fn fit_elastic_net(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &ElasticNetConfig) -> Result<ElasticNetFit> {
    fit_elastic_net_with(x, y, cfg, &SolverOptions::default())
}

struct Problem {
    xc: DMatrix<f64>,
    /// `||x_j||² / m` of the centred columns.
    scale: Vec<f64>,
    m: f64,
    l1: f64,
    l2: f64,
}

impl Problem {
    fn update(&self, j: usize, beta: &mut DVector<f64>, resid: &mut DVector<f64>) -> f64 {
        let s = self.scale[j];
        if s == 0.0 {
            return 0.0;
        }
        let col = self.xc.column(j);
        let old = beta[j];
        let rho = col.dot(resid) / self.m + s * old;
        let new = soft_threshold(rho, self.l1) / (s + self.l2);
        if new != old {
            resid.axpy(old - new, &col, 1.0);
            beta[j] = new;
        }
        (new - old).abs()
    }
}

pub fn fit_elastic_net_with(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &ElasticNetConfig,
    opts: &SolverOptions,
) -> Result<ElasticNetFit> {
    fit_elastic_net_from(x, y, cfg, opts, None)
}

/// Like [`fit_elastic_net_with`] but starts descent at `start` instead of
/// zero. The optimum is the same; only the number of sweeps changes.
pub fn fit_elastic_net_from(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &ElasticNetConfig,
    opts: &SolverOptions,
    start: Option<&DVector<f64>>,
) -> Result<ElasticNetFit> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let n = x.ncols();
    let y_mean = y.mean();
    let (xc, x_means) = center(x);
    let m = x.nrows() as f64;
    let scale: Vec<f64> = xc.column_iter().map(|c| c.norm_squared() / m).collect();
    let (l1, l2) = cfg.penalties();
    let problem = Problem { xc, scale, m, l1, l2 };

    let mut beta = match start {
        Some(b) if b.len() == n => b.clone(),
        Some(b) => {
            return Err(Error::LengthMismatch {
                left: n,
                right: b.len(),
            })
        }
        None => DVector::zeros(n),
    };
    let mut resid = y.add_scalar(-y_mean) - &problem.xc * &beta;
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < opts.max_sweeps {
        let mut max_delta = 0.0f64;
        for j in 0..n {
            max_delta = max_delta.max(problem.update(j, &mut beta, &mut resid));
        }
        sweeps += 1;
        if max_delta < opts.tolerance {
            converged = true;
            break;
        }
        let active: Vec<usize> = (0..n).filter(|&j| beta[j] != 0.0).collect();
        while sweeps < opts.max_sweeps {
            let mut max_delta = 0.0f64;
            for &j in &active {
                max_delta = max_delta.max(problem.update(j, &mut beta, &mut resid));
            }
            sweeps += 1;
            if max_delta < opts.tolerance {
                break;
            }
        }
    }

    let intercept = y_mean - x_means.dot(&beta);
    Ok(ElasticNetFit {
        model: LinearModel {
            intercept,
            coefficients: beta,
        },
        sweeps,
        converged,
    })
}

/// Value of the elastic-net objective at `model`.
pub fn objective(x: &DMatrix<f64>, y: &DVector<f64>, model: &LinearModel, cfg: &ElasticNetConfig) -> f64 {
    let (l1, l2) = cfg.penalties();
    let mut r = y - x * &model.coefficients;
    r.add_scalar_mut(-model.intercept);
    let m = y.len() as f64;
    r.norm_squared() / (2.0 * m) + l1 * model.coefficients.lp_norm(1) + 0.5 * l2 * model.coefficients.norm_squared()
}

/// Largest violation of the optimality conditions at `model`.
///
/// With `g_j = x_jᵀ r / m` the negative gradient of the loss, an active
/// coordinate needs `g_j - λ(1-ℓ1)β_j = λℓ1 sign(β_j)` and an inactive one
/// `|g_j| <= λℓ1`. The intercept condition is `sum(r) = 0`.
pub fn kkt_residual(x: &DMatrix<f64>, y: &DVector<f64>, model: &LinearModel, cfg: &ElasticNetConfig) -> f64 {
    let (l1, l2) = cfg.penalties();
    let mut r = y - x * &model.coefficients;
    r.add_scalar_mut(-model.intercept);
    let m = y.len() as f64;
    let mut worst = (r.sum() / m).abs();
    for (j, col) in x.column_iter().enumerate() {
        let g = col.dot(&r) / m;
        let b = model.coefficients[j];
        let v = if b != 0.0 {
            (g - l2 * b - l1 * b.signum()).abs()
        } else {
            (g.abs() - l1).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}
