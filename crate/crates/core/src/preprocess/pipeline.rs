//! The full preprocessing chain for one train/test split:
//! drop columns -> drop rows -> impute -> encode -> power transform and scale.
//!
//! Every fitted quantity (surviving columns, imputation neighbourhoods,
//! λ, mean, standard deviation) is computed from training rows only. Test rows
//! are never dropped; they are imputed against training neighbours and
//! transformed with the training parameters.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::clean::{columns_to_keep, rows_to_keep};
use super::encode::encode_dataset;
use super::impute::{ImputeWarning, KnnImputer};
use super::scale::{ColumnTransform, TransformParams};
use crate::data::{Dataset, EncodedMatrix, Encoding};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Columns with a larger missing fraction are dropped.
    pub column_missing_threshold: f64,
    /// Rows with a larger missing fraction inside any block are dropped.
    pub block_missing_threshold: f64,
    /// Neighbours used for imputation; must be odd.
    pub knn_k: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            column_missing_threshold: 0.25,
            block_missing_threshold: 0.5,
            knn_k: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub train: EncodedMatrix,
    pub test: EncodedMatrix,
    pub params: TransformParams,
    /// Training rows (indices into the input dataset) that survived row cleaning.
    pub train_rows: Vec<usize>,
    /// Test rows, i.e. every input row not listed as a training row.
    pub test_rows: Vec<usize>,
    /// Source features that survived column cleaning.
    pub kept_features: Vec<String>,
    /// Training rows dropped by the block missingness rule.
    pub dropped_rows: Vec<usize>,
    /// Imputation fallbacks; rows index into `train_rows` / `test_rows` respectively.
    pub train_warnings: Vec<ImputeWarning>,
    pub test_warnings: Vec<ImputeWarning>,
}

fn check_rows(m: usize, train_rows: &[usize]) -> Result<()> {
    if train_rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut seen = alloc::vec![false; m];
    for &r in train_rows {
        if r >= m || seen[r] {
            return Err(Error::InvalidParameter(alloc::format!("bad training row index {r}")));
        }
        seen[r] = true;
    }
    Ok(())
}

pub fn run_pipeline(ds: &Dataset, train_rows: &[usize], cfg: &PreprocessConfig) -> Result<PipelineOutput> {
    let m = ds.n_rows();
    check_rows(m, train_rows)?;
    let test_rows: Vec<usize> = (0..m).filter(|r| !train_rows.contains(r)).collect();

    let train_all = ds.select_rows(train_rows);
    let cols = columns_to_keep(&train_all, cfg.column_missing_threshold)?;
    let kept_pos = rows_to_keep(&train_all.select_features(&cols), cfg.block_missing_threshold)?;
    let dropped_rows: Vec<usize> = (0..train_rows.len())
        .filter(|p| !kept_pos.contains(p))
        .map(|p| train_rows[p])
        .collect();
    let kept_rows: Vec<usize> = kept_pos.iter().map(|&p| train_rows[p]).collect();

    // Dropping rows can leave a column constant or duplicated; clean once more.
    let train_kept = ds.select_rows(&kept_rows);
    let cols = {
        let pass2 = columns_to_keep(&train_kept.select_features(&cols), cfg.column_missing_threshold)?;
        pass2.into_iter().map(|p| cols[p]).collect::<Vec<_>>()
    };

    let train_ds = train_kept.select_features(&cols);
    let test_ds = ds.select_rows(&test_rows).select_features(&cols);

    let imputer = KnnImputer::fit(&train_ds, cfg.knn_k)?;
    let train_imp = imputer.impute_reference();
    let test_imp = imputer.impute_new(&test_ds)?;

    let mut train = encode_dataset(&train_imp.dataset)?;
    let mut test = encode_dataset(&test_imp.dataset)?;

    let mut params = TransformParams::default();
    for (j, col) in train.columns.iter().enumerate() {
        if col.encoding != Encoding::Numeric {
            continue;
        }
        let values: Vec<f64> = train.values.column(j).iter().copied().collect();
        let t = ColumnTransform::fit(col.name.clone(), &values)?;
        for x in train.values.column_mut(j).iter_mut() {
            *x = t.apply(*x);
        }
        for x in test.values.column_mut(j).iter_mut() {
            *x = t.apply(*x);
        }
        params.columns.push(t);
    }

    Ok(PipelineOutput {
        train,
        test,
        params,
        train_rows: kept_rows,
        test_rows,
        kept_features: train_ds.features.iter().map(|f| f.name.clone()).collect(),
        dropped_rows,
        train_warnings: train_imp.warnings,
        test_warnings: test_imp.warnings,
    })
}
