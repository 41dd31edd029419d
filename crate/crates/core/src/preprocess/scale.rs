//! Train-fitted column transforms: Yeo-Johnson followed by standardization.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::power::{apply_yeo_johnson, fit_yeo_johnson};
use crate::error::{Error, Result};
use crate::stats::{mean, sample_sd};

/// Fitted parameters of one numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransform {
    pub column: String,
    pub lambda: f64,
    pub mean: f64,
    pub stdev: f64,
}

impl ColumnTransform {
    /// Fits λ on the training values, then the mean and sample standard
    /// deviation of the transformed training values.
    pub fn fit(column: impl Into<String>, train: &[f64]) -> Result<Self> {
        let column = column.into();
        let lambda = fit_yeo_johnson(train).map_err(|_| Error::DegenerateColumn(column.clone()))?;
        let transformed: Vec<f64> = train.iter().map(|&x| apply_yeo_johnson(x, lambda)).collect();
        let (mean, stdev) = fit_standardizer(&transformed).map_err(|_| Error::ZeroVariance(column.clone()))?;
        Ok(ColumnTransform {
            column,
            lambda,
            mean,
            stdev,
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (apply_yeo_johnson(x, self.lambda) - self.mean) / self.stdev
    }
}

/// Per-column transforms fitted on the training rows of one split.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub columns: Vec<ColumnTransform>,
}

impl TransformParams {
    pub fn get(&self, column: &str) -> Option<&ColumnTransform> {
        self.columns.iter().find(|c| c.column == column)
    }
}

/// Mean and sample standard deviation of a training column.
pub fn fit_standardizer(train: &[f64]) -> Result<(f64, f64)> {
    let sd = sample_sd(train);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::ZeroVariance(String::new()));
    }
    Ok((mean(train), sd))
}

/// `(x - mean) / stdev` element-wise, with parameters fitted elsewhere.
pub fn standardize(column: &[f64], params: &ColumnTransform) -> Result<Vec<f64>> {
    if !(params.stdev > 0.0) {
        return Err(Error::ZeroVariance(params.column.clone()));
    }
    Ok(column.iter().map(|x| (x - params.mean) / params.stdev).collect())
}
