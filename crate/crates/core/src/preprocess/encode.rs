//! Categorical and target encodings.
//!
//! Both categorical encoders emit `c - 1` binary columns for a feature with `c`
//! levels; the first level is the all-zero reference row. Columns are laid out
//! from the highest level down to the second one, so for levels A < B < C < D:
//!
//! ```text
//! level  one-hot  ordinal
//!   A    (0,0,0)  (0,0,0)
//!   B    (0,0,1)  (0,0,1)
//!   C    (0,1,0)  (0,1,1)
//!   D    (1,0,0)  (1,1,1)
//! ```

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::data::{Cell, Dataset, EncodedColumn, EncodedMatrix, Encoding, FeatureKind, FeatureMeta};
use crate::error::{Error, Result};

/// Column position of level `l` (1-based from the second level) in a `c`-level group.
fn column_of(level: usize, c: usize) -> usize {
    c - 1 - level
}

fn check_kind(meta: &FeatureMeta, kind: FeatureKind) -> Result<()> {
    if meta.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "feature {} is {:?}, expected {:?}",
            meta.name, meta.kind, kind
        )));
    }
    if meta.levels.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "feature {} needs at least two levels",
            meta.name
        )));
    }
    Ok(())
}

fn encode_levels(
    values: &[usize],
    meta: &FeatureMeta,
    indicator: impl Fn(usize, usize) -> bool,
) -> Result<DMatrix<f64>> {
    let c = meta.levels.len();
    let mut out = DMatrix::zeros(values.len(), c - 1);
    for (i, &v) in values.iter().enumerate() {
        if v >= c {
            return Err(Error::UnknownLevel {
                feature: meta.name.clone(),
                level: v,
            });
        }
        for level in 1..c {
            if indicator(v, level) {
                out[(i, column_of(level, c))] = 1.0;
            }
        }
    }
    Ok(out)
}

/// One-hot encoding of a nominal feature given as level indices.
pub fn encode_onehot(values: &[usize], meta: &FeatureMeta) -> Result<DMatrix<f64>> {
    check_kind(meta, FeatureKind::Nominal)?;
    encode_levels(values, meta, |v, level| v == level)
}

/// Cumulative encoding of an ordinal feature: the bit for level `l` is set
/// when the value is at least `l`.
pub fn encode_ordinal(values: &[usize], meta: &FeatureMeta) -> Result<DMatrix<f64>> {
    check_kind(meta, FeatureKind::Ordinal)?;
    encode_levels(values, meta, |v, level| v >= level)
}

/// Yearly survival bucket: `OS <= 12 -> 1`, ..., `48 < OS <= 60 -> 5`,
/// `OS > 60 -> 6`. Censored records must lie beyond 60 months.
pub fn encode_target(os_months: f64, censored: bool) -> Result<u8> {
    if !os_months.is_finite() || os_months < 0.0 {
        return Err(Error::InvalidSurvival(os_months));
    }
    if censored {
        if os_months <= 60.0 {
            return Err(Error::CensoredBelowCutoff { os_months });
        }
        return Ok(6);
    }
    let bucket = [12.0, 24.0, 36.0, 48.0, 60.0]
        .iter()
        .position(|&edge| os_months <= edge)
        .unwrap_or(5);
    Ok(bucket as u8 + 1)
}

/// Encodes a complete dataset. Numeric columns are copied unchanged; the
/// power transform and scaling happen afterwards.
pub fn encode_dataset(ds: &Dataset) -> Result<EncodedMatrix> {
    let m = ds.n_rows();
    let mut blocks: Vec<DMatrix<f64>> = Vec::with_capacity(ds.n_features());
    let mut columns = Vec::new();

    for (j, meta) in ds.features.iter().enumerate() {
        match meta.kind {
            FeatureKind::Numeric => {
                let mut col = DMatrix::zeros(m, 1);
                for (i, cell) in ds.column(j).enumerate() {
                    col[(i, 0)] = match cell {
                        Cell::Num(x) => x,
                        other => return Err(cell_error(ds, i, j, other)),
                    };
                }
                blocks.push(col);
                columns.push(EncodedColumn {
                    name: meta.name.clone(),
                    source: meta.name.clone(),
                    encoding: Encoding::Numeric,
                });
            }
            FeatureKind::Nominal | FeatureKind::Ordinal => {
                let mut levels = Vec::with_capacity(m);
                for (i, cell) in ds.column(j).enumerate() {
                    match cell {
                        Cell::Level(l) => levels.push(l),
                        other => return Err(cell_error(ds, i, j, other)),
                    }
                }
                let c = meta.levels.len();
                let ordinal = meta.kind == FeatureKind::Ordinal;
                let block = if ordinal {
                    encode_ordinal(&levels, meta)?
                } else {
                    encode_onehot(&levels, meta)?
                };
                blocks.push(block);
                for level in (1..c).rev() {
                    let (name, encoding) = if ordinal {
                        (format!("{}>={}", meta.name, meta.levels[level]), Encoding::Ordinal(level))
                    } else {
                        (format!("{}={}", meta.name, meta.levels[level]), Encoding::OneHot(level))
                    };
                    columns.push(EncodedColumn {
                        name,
                        source: meta.name.clone(),
                        encoding,
                    });
                }
            }
        }
    }

    let n = columns.len();
    let mut values = DMatrix::zeros(m, n);
    let mut at = 0;
    for b in &blocks {
        values.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }

    let target = ds
        .target
        .iter()
        .map(|t| encode_target(t.os_months, t.censored))
        .collect::<Result<Vec<u8>>>()?;

    Ok(EncodedMatrix {
        values,
        columns,
        target,
    })
}

fn cell_error(ds: &Dataset, row: usize, j: usize, cell: Cell) -> Error {
    let value = match cell {
        Cell::Missing => "<missing>".to_string(),
        Cell::Num(x) => format!("{x}"),
        Cell::Level(l) => format!("level #{l}"),
    };
    Error::InvalidLevel {
        row,
        column: ds.features[j].name.clone(),
        value,
    }
}
