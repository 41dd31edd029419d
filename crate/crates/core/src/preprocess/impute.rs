//! k-nearest-neighbour median imputation.
//!
//! Distances are Euclidean over the columns that are fully observed in the
//! reference (training) rows: numeric columns standardized with the reference
//! mean and standard deviation, ordinal columns as integer codes and nominal
//! columns as a 0/1 mismatch. Ties at equal distance go to the lower row index.
//!
//! A missing numeric cell gets the median of the neighbours' observed values,
//! an ordinal cell the (lower) median of the codes and a nominal cell the most
//! frequent level, ties resolved in neighbour order.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::data::{Cell, Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::stats::{lower_median, mean, median, sample_sd};

#[derive(Debug, Clone, Copy)]
enum Metric {
    Scaled { col: usize, mean: f64, sd: f64 },
    Ordinal { col: usize },
    Nominal { col: usize },
}

/// A missing cell whose neighbours all lacked the feature; the reference
/// column median (mode for nominal features) was used instead.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputeWarning {
    pub row: usize,
    pub feature: String,
}

#[derive(Debug, Clone)]
pub struct Imputed {
    pub dataset: Dataset,
    pub warnings: Vec<ImputeWarning>,
}

/// Imputer fitted on a set of reference rows. Rows imputed later only ever
/// see reference rows as neighbours.
#[derive(Debug, Clone)]
pub struct KnnImputer {
    k: usize,
    reference: Dataset,
    metric: Vec<Metric>,
    fallback: Vec<Cell>,
}

impl KnnImputer {
    pub fn fit(reference: &Dataset, k: usize) -> Result<Self> {
        if k == 0 || k % 2 == 0 {
            return Err(Error::InvalidParameter(alloc::format!("k must be odd and positive, got {k}")));
        }
        if k >= reference.n_rows() {
            return Err(Error::TooFewRows {
                needed: k + 1,
                found: reference.n_rows(),
            });
        }

        let mut metric = Vec::new();
        for (j, f) in reference.features.iter().enumerate() {
            if reference.missing_count(j) > 0 {
                continue;
            }
            match f.kind {
                FeatureKind::Numeric => {
                    let xs: Vec<f64> = reference.column(j).filter_map(|c| c.as_f64()).collect();
                    let sd = sample_sd(&xs);
                    if sd > 0.0 {
                        metric.push(Metric::Scaled { col: j, mean: mean(&xs), sd });
                    }
                }
                FeatureKind::Ordinal => metric.push(Metric::Ordinal { col: j }),
                FeatureKind::Nominal => metric.push(Metric::Nominal { col: j }),
            }
        }
        if metric.is_empty() {
            return Err(Error::NoCompleteColumns);
        }

        let fallback = (0..reference.n_features())
            .map(|j| {
                let observed: Vec<Cell> = reference.column(j).filter(|c| !c.is_missing()).collect();
                aggregate(reference.features[j].kind, &observed)
                    .ok_or_else(|| Error::DegenerateColumn(reference.features[j].name.clone()))
            })
            .collect::<Result<Vec<Cell>>>()?;

        Ok(KnnImputer {
            k,
            reference: reference.clone(),
            metric,
            fallback,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn distance(&self, query: &[Cell], other: &[Cell]) -> f64 {
        let mut d2 = 0.0;
        for m in &self.metric {
            let (q, o) = match *m {
                Metric::Scaled { col, mean, sd } => match (query[col], other[col]) {
                    (Cell::Num(a), Cell::Num(b)) => ((a - mean) / sd, (b - mean) / sd),
                    _ => continue,
                },
                Metric::Ordinal { col } => match (query[col], other[col]) {
                    (Cell::Level(a), Cell::Level(b)) => (a as f64, b as f64),
                    _ => continue,
                },
                Metric::Nominal { col } => match (query[col], other[col]) {
                    (Cell::Level(a), Cell::Level(b)) => (0.0, if a == b { 0.0 } else { 1.0 }),
                    _ => continue,
                },
            };
            d2 += (q - o) * (q - o);
        }
        d2.sqrt()
    }

    /// The `k` reference rows closest to `query`, nearest first. `exclude`
    /// removes one reference row (the query itself when it is a reference row).
    pub fn neighbors(&self, query: &[Cell], exclude: Option<usize>) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .reference
            .cells
            .iter()
            .enumerate()
            .filter(|(l, _)| Some(*l) != exclude)
            .map(|(l, row)| (self.distance(query, row), l))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(self.k);
        scored.into_iter().map(|(_, l)| l).collect()
    }

    /// Neighbourhood of reference row `row`, excluding the row itself.
    pub fn neighborhood(&self, row: usize) -> Vec<usize> {
        self.neighbors(&self.reference.cells[row], Some(row))
    }

    fn impute_row(&self, row: &mut [Cell], exclude: Option<usize>, row_id: usize, warnings: &mut Vec<ImputeWarning>) {
        if !row.iter().any(Cell::is_missing) {
            return;
        }
        let original: Vec<Cell> = row.to_vec();
        let nbrs = self.neighbors(&original, exclude);
        for (j, cell) in row.iter_mut().enumerate() {
            if !cell.is_missing() {
                continue;
            }
            let observed: Vec<Cell> = nbrs
                .iter()
                .map(|&l| self.reference.cells[l][j])
                .filter(|c| !c.is_missing())
                .collect();
            *cell = match aggregate(self.reference.features[j].kind, &observed) {
                Some(v) => v,
                None => {
                    warnings.push(ImputeWarning {
                        row: row_id,
                        feature: self.reference.features[j].name.clone(),
                    });
                    self.fallback[j]
                }
            };
        }
    }

    /// Imputes the reference rows themselves; each row is excluded from its
    /// own neighbourhood.
    pub fn impute_reference(&self) -> Imputed {
        let mut dataset = self.reference.clone();
        let mut warnings = Vec::new();
        for (i, row) in dataset.cells.iter_mut().enumerate() {
            self.impute_row(row, Some(i), i, &mut warnings);
        }
        Imputed { dataset, warnings }
    }

    /// Imputes rows that are not part of the reference set.
    pub fn impute_new(&self, ds: &Dataset) -> Result<Imputed> {
        if ds.features != self.reference.features {
            return Err(Error::SchemaMismatch("imputer was fitted on different features".into()));
        }
        let mut dataset = ds.clone();
        let mut warnings = Vec::new();
        for (i, row) in dataset.cells.iter_mut().enumerate() {
            self.impute_row(row, None, i, &mut warnings);
        }
        Ok(Imputed { dataset, warnings })
    }
}

/// Median / lower median / mode of observed cells, `None` when empty.
fn aggregate(kind: FeatureKind, observed: &[Cell]) -> Option<Cell> {
    if observed.is_empty() {
        return None;
    }
    match kind {
        FeatureKind::Numeric => {
            let xs: Vec<f64> = observed.iter().filter_map(Cell::as_f64).collect();
            Some(Cell::Num(median(&xs)))
        }
        FeatureKind::Ordinal => {
            let codes: Vec<usize> = observed
                .iter()
                .filter_map(|c| match c {
                    Cell::Level(l) => Some(*l),
                    _ => None,
                })
                .collect();
            lower_median(&codes).map(Cell::Level)
        }
        FeatureKind::Nominal => {
            let mut best: Option<(usize, usize)> = None;
            for c in observed {
                if let Cell::Level(l) = *c {
                    let count = observed.iter().filter(|o| **o == Cell::Level(l)).count();
                    if best.map_or(true, |(_, n)| count > n) {
                        best = Some((l, count));
                    }
                }
            }
            best.map(|(l, _)| Cell::Level(l))
        }
    }
}

/// Imputes every missing cell of `ds` using the other rows of `ds` as neighbours.
pub fn knn_impute(ds: &Dataset, k: usize) -> Result<Imputed> {
    Ok(KnnImputer::fit(ds, k)?.impute_reference())
}
