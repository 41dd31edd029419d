//! Cleaning, imputation, encoding and scaling of raw datasets.

pub mod clean;
pub mod encode;
pub mod impute;
pub mod pipeline;
pub mod power;
pub mod scale;

pub use clean::{drop_columns_by_missingness, drop_rows_by_missingness};
pub use encode::{encode_dataset, encode_onehot, encode_ordinal, encode_target};
pub use impute::{knn_impute, ImputeWarning, Imputed, KnnImputer};
pub use pipeline::{run_pipeline, PipelineOutput, PreprocessConfig};
pub use power::{apply_yeo_johnson, fit_yeo_johnson};
pub use scale::{fit_standardizer, standardize, ColumnTransform, TransformParams};
