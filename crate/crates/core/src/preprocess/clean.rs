//! Column and row cleaning by missingness.

use alloc::vec::Vec;

use crate::data::{Block, Cell, Dataset};
use crate::error::{Error, Result};

fn check_fraction(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("{name} must lie in (0, 1], got {x}")))
    }
}

fn same_cell(a: Cell, b: Cell) -> bool {
    match (a, b) {
        (Cell::Num(x), Cell::Num(y)) => x == y,
        (Cell::Level(x), Cell::Level(y)) => x == y,
        (Cell::Missing, Cell::Missing) => true,
        _ => false,
    }
}

fn is_constant(ds: &Dataset, j: usize) -> bool {
    let mut observed = ds.column(j).filter(|c| !c.is_missing());
    match observed.next() {
        None => true,
        Some(first) => observed.all(|c| same_cell(c, first)),
    }
}

fn is_duplicate(ds: &Dataset, a: usize, b: usize) -> bool {
    let (fa, fb) = (&ds.features[a], &ds.features[b]);
    fa.kind == fb.kind
        && fa.levels == fb.levels
        && ds.cells.iter().all(|row| same_cell(row[a], row[b]))
}

/// Indices of the columns that survive cleaning on `ds`: missing fraction at
/// most `threshold`, more than one distinct observed value, and not an exact
/// copy of an earlier surviving column.
pub fn columns_to_keep(ds: &Dataset, threshold: f64) -> Result<Vec<usize>> {
    check_fraction("column missingness threshold", threshold)?;
    let m = ds.n_rows() as f64;
    let mut keep: Vec<usize> = Vec::new();
    for j in 0..ds.n_features() {
        let frac = ds.missing_count(j) as f64 / m;
        if frac > threshold || is_constant(ds, j) {
            continue;
        }
        if keep.iter().any(|&k| is_duplicate(ds, k, j)) {
            continue;
        }
        keep.push(j);
    }
    if keep.is_empty() {
        return Err(Error::AllColumnsDropped);
    }
    Ok(keep)
}

/// Drops columns with more than `threshold` missing cells, constant columns
/// and duplicated columns.
pub fn drop_columns_by_missingness(ds: &Dataset, threshold: f64) -> Result<Dataset> {
    let keep = columns_to_keep(ds, threshold)?;
    Ok(ds.select_features(&keep))
}

/// True when the row's missing fraction inside some block exceeds `block_threshold`.
pub fn row_exceeds(ds: &Dataset, row: usize, block_threshold: f64) -> bool {
    Block::ALL.iter().any(|&block| {
        let (mut total, mut missing) = (0usize, 0usize);
        for (j, f) in ds.features.iter().enumerate() {
            if f.block == block {
                total += 1;
                missing += usize::from(ds.cells[row][j].is_missing());
            }
        }
        total > 0 && missing as f64 / total as f64 > block_threshold
    })
}

/// Indices of the rows that survive the per-block missingness rule.
pub fn rows_to_keep(ds: &Dataset, block_threshold: f64) -> Result<Vec<usize>> {
    check_fraction("block missingness threshold", block_threshold)?;
    let keep: Vec<usize> = (0..ds.n_rows())
        .filter(|&i| !row_exceeds(ds, i, block_threshold))
        .collect();
    if keep.is_empty() {
        return Err(Error::AllRowsDropped);
    }
    Ok(keep)
}

/// Drops every row whose missing fraction within any single block exceeds
/// `block_threshold`.
pub fn drop_rows_by_missingness(ds: &Dataset, block_threshold: f64) -> Result<Dataset> {
    let keep = rows_to_keep(ds, block_threshold)?;
    Ok(ds.select_rows(&keep))
}
