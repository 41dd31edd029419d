//! Linear model with intercept and ordinary least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: DVector<f64>,
}

impl LinearModel {
    pub fn constant(intercept: f64, n: usize) -> Self {
        LinearModel {
            intercept,
            coefficients: DVector::zeros(n),
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        predict(self, x)
    }
}

/// `intercept + X β`, row-wise.
pub fn predict(model: &LinearModel, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.ncols() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: model.coefficients.len(),
            found: x.ncols(),
        });
    }
    let mut out = x * &model.coefficients;
    out.add_scalar_mut(model.intercept);
    Ok(out)
}

/// Column means and the column-centred copy of `x`.
pub(crate) fn center(x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let m = x.nrows().max(1) as f64;
    let means = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / m));
    let mut xc = x.clone();
    for (j, mut col) in xc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    (xc, means)
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub model: LinearModel,
    /// The centred design had rank below its column count; the minimum-norm
    /// solution was returned.
    pub rank_deficient: bool,
}

/// Least squares with an unpenalized intercept, solved through the SVD of the
/// centred design so rank-deficient systems get the minimum-norm solution.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let y_mean = y.mean();
    let n = x.ncols();
    if n == 0 {
        return Ok(OlsFit {
            model: LinearModel::constant(y_mean, 0),
            rank_deficient: false,
        });
    }
    let (xc, x_means) = center(x);
    let yc = y.add_scalar(-y_mean);

    let svd = xc.svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = (x.nrows().max(n) as f64) * f64::EPSILON * s_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let beta = if s_max > 0.0 {
        svd.solve(&yc, tol).map_err(|e| Error::InvalidParameter(e.into()))?
    } else {
        DVector::zeros(n)
    };
    let intercept = y_mean - x_means.dot(&beta);
    Ok(OlsFit {
        model: LinearModel {
            intercept,
            coefficients: beta,
        },
        rank_deficient: rank < n,
    })
}
