use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid level {value:?} in column {column} (row {row})")]
    InvalidLevel {
        row: usize,
        column: String,
        value: String,
    },
    #[error("level index {level} out of range for feature {feature}")]
    UnknownLevel { feature: String, level: usize },
    #[error("unknown feature name {0:?}")]
    UnknownFeatureName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("every column was dropped by the cleaning rules")]
    AllColumnsDropped,
    #[error("every row was dropped by the cleaning rules")]
    AllRowsDropped,
    #[error("no fully observed column is available for neighbour distances")]
    NoCompleteColumns,
    #[error("column {0} has fewer than two distinct values")]
    DegenerateColumn(String),
    #[error("column {0} has zero variance")]
    ZeroVariance(String),
    #[error("censored record with {os_months} months of survival is not beyond the 60 month cutoff")]
    CensoredBelowCutoff { os_months: f64 },
    #[error("survival time {0} is negative or not finite")]
    InvalidSurvival(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("selected feature set is empty")]
    EmptySelection,
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),
}
