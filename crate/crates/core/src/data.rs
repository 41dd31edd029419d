//! Dataset model shared by every stage of the pipeline.
//!
//! A [`Dataset`] is the raw mixed-type table: one [`FeatureMeta`] per column,
//! a row-major grid of [`Cell`]s and one survival [`Target`] per row.
//! Missingness is explicit ([`Cell::Missing`]) so the cleaning thresholds and
//! the imputer can count it exactly.
//!
//! An [`EncodedMatrix`] is what the selectors and predictors consume: a dense
//! real matrix whose columns remember which source feature (and level) they
//! came from.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source block of a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    P,
    B,
    H,
    I,
    T,
}

impl Block {
    pub const ALL: [Block; 5] = [Block::P, Block::B, Block::H, Block::I, Block::T];

    pub fn as_str(self) -> &'static str {
        match self {
            Block::P => "p",
            Block::B => "b",
            Block::H => "h",
            Block::I => "i",
            Block::T => "t",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "p" => Some(Block::P),
            "b" => Some(Block::B),
            "h" => Some(Block::H),
            "i" => Some(Block::I),
            "t" => Some(Block::T),
            _ => None,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Nominal,
    Ordinal,
}

impl FeatureKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, FeatureKind::Numeric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub block: Block,
    pub kind: FeatureKind,
    /// Level labels. Declared order is the ordinal order; empty for numeric features.
    pub levels: Vec<String>,
}

impl FeatureMeta {
    pub fn numeric(name: impl Into<String>, block: Block) -> Self {
        FeatureMeta {
            name: name.into(),
            block,
            kind: FeatureKind::Numeric,
            levels: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        block: Block,
        kind: FeatureKind,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        FeatureMeta {
            name: name.into(),
            block,
            kind,
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }
}

/// One cell of the raw table. Categorical cells hold the index into
/// [`FeatureMeta::levels`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Level(usize),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Numeric view: the value itself for numeric cells, the level index for
    /// categorical cells.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(v) => Some(v),
            Cell::Level(l) => Some(l as f64),
            Cell::Missing => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub os_months: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<FeatureMeta>,
    /// Row-major cells, `cells[row][feature]`.
    pub cells: Vec<Vec<Cell>>,
    pub target: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    EmptyDataset,
    TargetLength,
    RaggedRow,
    DuplicateName,
    TooFewLevels,
    DuplicateLevel,
    LevelsOnNumeric,
    LevelOutOfRange,
    KindMismatch,
    NonFinite,
    InvalidSurvival,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::EmptyDataset => "dataset has no rows",
            Rule::TargetLength => "target length differs from row count",
            Rule::RaggedRow => "row length differs from feature count",
            Rule::DuplicateName => "duplicate feature name",
            Rule::TooFewLevels => "categorical feature needs at least two levels",
            Rule::DuplicateLevel => "duplicate level label",
            Rule::LevelsOnNumeric => "numeric feature declares levels",
            Rule::LevelOutOfRange => "level not declared for feature",
            Rule::KindMismatch => "cell type does not match feature kind",
            Rule::NonFinite => "numeric value is not finite",
            Rule::InvalidSurvival => "survival time negative or not finite",
        };
        f.write_str(s)
    }
}

/// A broken dataset invariant, located by row and/or column where applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub row: Option<usize>,
    pub column: Option<String>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.row, &self.column) {
            (Some(r), Some(c)) => write!(f, "row {r}, column {c}: {}", self.rule),
            (Some(r), None) => write!(f, "row {r}: {}", self.rule),
            (None, Some(c)) => write!(f, "column {c}: {}", self.rule),
            (None, None) => write!(f, "{}", self.rule),
        }
    }
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().map(move |row| row[j])
    }

    pub fn missing_count(&self, j: usize) -> usize {
        self.column(j).filter(Cell::is_missing).count()
    }

    pub fn has_missing(&self) -> bool {
        self.cells.iter().flatten().any(Cell::is_missing)
    }

    /// Sub-table with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            cells: rows.iter().map(|&r| self.cells[r].clone()).collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
        }
    }

    /// Sub-table with the given feature columns, in the given order.
    pub fn select_features(&self, cols: &[usize]) -> Dataset {
        Dataset {
            features: cols.iter().map(|&j| self.features[j].clone()).collect(),
            cells: self
                .cells
                .iter()
                .map(|row| cols.iter().map(|&j| row[j]).collect())
                .collect(),
            target: self.target.clone(),
        }
    }

    /// Checks every dataset invariant. An empty list means the dataset is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let v = |row: Option<usize>, column: Option<&str>, rule: Rule| Violation {
            row,
            column: column.map(ToString::to_string),
            rule,
        };

        if self.cells.is_empty() {
            out.push(v(None, None, Rule::EmptyDataset));
        }
        if self.target.len() != self.cells.len() {
            out.push(v(None, None, Rule::TargetLength));
        }

        let mut seen = BTreeSet::new();
        for f in &self.features {
            if !seen.insert(f.name.as_str()) {
                out.push(v(None, Some(&f.name), Rule::DuplicateName));
            }
            match f.kind {
                FeatureKind::Numeric if !f.levels.is_empty() => {
                    out.push(v(None, Some(&f.name), Rule::LevelsOnNumeric));
                }
                FeatureKind::Nominal | FeatureKind::Ordinal => {
                    if f.levels.len() < 2 {
                        out.push(v(None, Some(&f.name), Rule::TooFewLevels));
                    }
                    let distinct: BTreeSet<&str> = f.levels.iter().map(String::as_str).collect();
                    if distinct.len() != f.levels.len() {
                        out.push(v(None, Some(&f.name), Rule::DuplicateLevel));
                    }
                }
                _ => {}
            }
        }

        for (i, row) in self.cells.iter().enumerate() {
            if row.len() != self.features.len() {
                out.push(v(Some(i), None, Rule::RaggedRow));
                continue;
            }
            for (cell, f) in row.iter().zip(&self.features) {
                match (*cell, f.kind) {
                    (Cell::Missing, _) => {}
                    (Cell::Num(x), FeatureKind::Numeric) => {
                        if !x.is_finite() {
                            out.push(v(Some(i), Some(&f.name), Rule::NonFinite));
                        }
                    }
                    (Cell::Level(l), FeatureKind::Nominal | FeatureKind::Ordinal) => {
                        if l >= f.levels.len() {
                            out.push(v(Some(i), Some(&f.name), Rule::LevelOutOfRange));
                        }
                    }
                    _ => out.push(v(Some(i), Some(&f.name), Rule::KindMismatch)),
                }
            }
        }

        for (i, t) in self.target.iter().enumerate() {
            if !t.os_months.is_finite() || t.os_months < 0.0 {
                out.push(v(Some(i), None, Rule::InvalidSurvival));
            }
        }
        out
    }

    /// Returns `self` if valid, otherwise a schema error naming the first violation.
    pub fn validated(self) -> Result<Self> {
        match self.validate().first() {
            None => Ok(self),
            Some(v) => Err(Error::SchemaMismatch(format!("{v}"))),
        }
    }
}

/// How an encoded column was produced from its source feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "lowercase")]
pub enum Encoding {
    Numeric,
    /// Indicator of `value == level`.
    OneHot(usize),
    /// Indicator of `value >= level`.
    Ordinal(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    pub source: String,
    pub encoding: Encoding,
}

/// Fully numeric design matrix with column provenance and the integer target.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub values: DMatrix<f64>,
    pub columns: Vec<EncodedColumn>,
    /// Target level 1..=6 per row.
    pub target: Vec<u8>,
}

impl EncodedMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn target_f64(&self) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(self.target.len(), self.target.iter().map(|&t| t as f64))
    }

    /// Column sub-matrix in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DMatrix<f64> {
        self.values.select_columns(cols)
    }
}
