//! Experimental protocol: outer K-fold splits, the nested grid search for
//! RENT, the max_s sweep with both selectors and the prior-weight sweep.
//!
//! Folds, inner splits and grid cells are independent work items. They run on
//! the current rayon pool and are always collected in (fold, inner split,
//! grid) order, so results do not depend on the number of workers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ensfs_core::data::{Cell, Dataset, EncodedMatrix};
use ensfs_core::folds::{make_folds, FoldPlan};
use ensfs_core::metrics::{perc, redundancy_rate, rmse, sign_class, stability, SignClass};
use ensfs_core::models::elastic_net::ElasticNetConfig;
use ensfs_core::models::knn::knn_regress;
use ensfs_core::models::linear::fit_ols;
use ensfs_core::preprocess::clean::rows_to_keep;
use ensfs_core::preprocess::pipeline::{run_pipeline, PipelineOutput, PreprocessConfig};
use ensfs_core::rent::{rent_train, rent_train_path, select_with_thresholds, RentConfig, RentDiagnostics};
use ensfs_core::stats::{mean, sample_sd};
use ensfs_core::ubayfs::{ubay_select, ubay_train, UBayConfig, UBayPosterior, DEFAULT_PRIOR_WEIGHT};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::config::{GridSpec, RunConfig};
use crate::error::{EnsfsError, Result};

/// Dataset after the row-local missingness rule, with its outer folds.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    /// Row of the input dataset each kept row came from.
    pub source_rows: Vec<usize>,
    pub plan: FoldPlan,
}

/// Drops rows that are too incomplete in some block and splits the rest into folds.
pub fn prepare(ds: &Dataset, cfg: &RunConfig) -> Result<Prepared> {
    let keep = rows_to_keep(ds, cfg.preprocess.block_missing_threshold)?;
    let dataset = ds.select_rows(&keep);
    let plan = make_folds(dataset.n_rows(), cfg.folds.k, cfg.folds.seed)?;
    Ok(Prepared {
        dataset,
        source_rows: keep,
        plan,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub c: f64,
    pub l1: f64,
    pub tau1: f64,
    pub tau2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CellScore {
    rmse: f64,
    size: usize,
}

/// Inner cross-validation results of one outer fold over the whole grid.
#[derive(Debug, Clone)]
pub struct PrestudyFold {
    pub fold: usize,
    /// Grid points in grid order.
    pub points: Vec<GridPoint>,
    /// Mean inner-validation RMSE of the linear model on the selected columns.
    pub rmse: Vec<f64>,
    /// Largest selected set over the inner splits.
    pub max_size: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub fold: usize,
    pub max_s: usize,
    pub point: GridPoint,
    pub tau3: f64,
    pub inner_rmse: f64,
    pub inner_max_size: usize,
    /// False when no grid point met `max_s` and the smallest sets were taken instead.
    pub feasible: bool,
}

impl PrestudyFold {
    /// Lowest inner RMSE among points whose sets never exceed `max_s`; ties go
    /// to the smaller set, then to grid order.
    pub fn choose(&self, max_s: usize, tau3: f64) -> Choice {
        let order = |a: &usize, b: &usize| {
            self.rmse[*a]
                .total_cmp(&self.rmse[*b])
                .then(self.max_size[*a].cmp(&self.max_size[*b]))
                .then(a.cmp(b))
        };
        let feasible: Vec<usize> = (0..self.points.len()).filter(|&i| self.max_size[i] <= max_s).collect();
        let (best, ok) = match feasible.iter().copied().min_by(order) {
            Some(i) => (i, true),
            None => {
                let i = (0..self.points.len())
                    .min_by(|a, b| self.max_size[*a].cmp(&self.max_size[*b]).then(order(a, b)))
                    .expect("grid is non-empty");
                (i, false)
            }
        };
        Choice {
            fold: self.fold,
            max_s,
            point: self.points[best],
            tau3,
            inner_rmse: self.rmse[best],
            inner_max_size: self.max_size[best],
            feasible: ok,
        }
    }
}

fn rent_config(cfg: &RunConfig, c: f64, l1: f64, tau1: f64, tau2: f64) -> Result<RentConfig> {
    let rc = RentConfig {
        models: cfg.rent.models,
        split_ratio: cfg.rent.split_ratio,
        net: ElasticNetConfig::new(c, l1)?,
        tau1,
        tau2,
        tau3: cfg.rent.tau3,
        seed: cfg.rent.seed,
    };
    rc.validate()?;
    Ok(rc)
}

fn target_vec(m: &EncodedMatrix) -> DVector<f64> {
    m.target_f64()
}

/// Linear and kNN predictions from the selected columns; an empty set
/// predicts the training mean.
fn predict_on(train: &EncodedMatrix, test: &EncodedMatrix, selected: &[usize], knn_k: usize) -> Result<Predictions> {
    let ytr = target_vec(train);
    let m_test = test.n_rows();
    if selected.is_empty() {
        let mu = ytr.mean();
        return Ok(Predictions {
            linear: DVector::from_element(m_test, mu),
            knn: DVector::from_element(m_test, mu),
            coefficients: Vec::new(),
        });
    }
    let xtr = train.select_columns(selected);
    let xte = test.select_columns(selected);
    let ols = fit_ols(&xtr, &ytr)?;
    let linear = ols.model.predict(&xte)?;
    let knn = knn_regress(&xtr, &ytr, &xte, knn_k.min(xtr.nrows()))?;
    Ok(Predictions {
        linear,
        knn,
        coefficients: ols.model.coefficients.iter().copied().collect(),
    })
}

struct Predictions {
    linear: DVector<f64>,
    knn: DVector<f64>,
    coefficients: Vec<f64>,
}

fn ols_rmse(train: &EncodedMatrix, test: &EncodedMatrix, selected: &[usize]) -> Result<f64> {
    let ytr = target_vec(train);
    let yte = target_vec(test);
    let yhat = if selected.is_empty() {
        DVector::from_element(yte.len(), ytr.mean())
    } else {
        let ols = fit_ols(&train.select_columns(selected), &ytr)?;
        ols.model.predict(&test.select_columns(selected))?
    };
    Ok(rmse(&yte, &yhat)?)
}

/// One inner split of one outer fold, preprocessed on its own training rows.
struct InnerSplit {
    out: PipelineOutput,
}

fn inner_splits(ds: &Dataset, plan: &FoldPlan, fold: usize, pre: &PreprocessConfig) -> Result<Vec<InnerSplit>> {
    let outer_train = plan.train_rows(fold);
    let sub = ds.select_rows(&outer_train);
    let sub_fold: Vec<usize> = outer_train.iter().map(|&r| plan.assignment[r]).collect();
    (0..plan.k)
        .filter(|&v| v != fold)
        .map(|v| {
            let train: Vec<usize> = (0..sub.n_rows()).filter(|&p| sub_fold[p] != v).collect();
            Ok(InnerSplit {
                out: run_pipeline(&sub, &train, pre)?,
            })
        })
        .collect()
}

/// Nested grid search: for every outer fold, RENT is trained for each
/// (C, ℓ1) on each inner split and every (τ1, τ2) pair is scored by the
/// validation RMSE of OLS on the selected columns.
pub fn prestudy_grid_search(prep: &Prepared, cfg: &RunConfig) -> Result<Vec<PrestudyFold>> {
    let grid = &cfg.grid;
    let plan = &prep.plan;
    let splits: Vec<Vec<InnerSplit>> = (0..plan.k)
        .into_par_iter()
        .map(|fold| inner_splits(&prep.dataset, plan, fold, &cfg.preprocess))
        .collect::<Result<_>>()?;

    let pairs: Vec<(f64, f64)> = grid.c.iter().flat_map(|&c| grid.l1.iter().map(move |&l| (c, l))).collect();
    let taus: Vec<(f64, f64)> = grid
        .tau1
        .iter()
        .flat_map(|&t1| grid.tau2.iter().map(move |&t2| (t1, t2)))
        .collect();

    let n_l1 = grid.l1.len();
    let units: Vec<(usize, usize, usize)> = (0..plan.k)
        .flat_map(|f| (0..plan.k - 1).flat_map(move |v| (0..n_l1).map(move |l| (f, v, l))))
        .collect();
    let per_unit: Vec<Vec<Vec<CellScore>>> = units
        .par_iter()
        .map(|&(f, v, l)| {
            let split = &splits[f][v].out;
            let rc = rent_config(cfg, grid.c[0], grid.l1[l], 0.0, 0.0)?;
            let diags = rent_train_path(&split.train.values, &split.train.target_f64(), &rc, &grid.c)?;
            let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
            diags
                .iter()
                .map(|diag| {
                    taus.iter()
                        .map(|&(t1, t2)| {
                            let s: Vec<usize> = select_with_thresholds(diag, t1, t2, true).into_iter().collect();
                            let r = match cache.get(&s) {
                                Some(&r) => r,
                                None => {
                                    let r = ols_rmse(&split.train, &split.test, &s)?;
                                    cache.insert(s.clone(), r);
                                    r
                                }
                            };
                            Ok(CellScore { rmse: r, size: s.len() })
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // regroup to [(fold, split) × (C, ℓ1)] in grid order
    let n_c = grid.c.len();
    let scores: Vec<&Vec<CellScore>> = (0..plan.k * (plan.k - 1))
        .flat_map(|fv| {
            let per_unit = &per_unit;
            (0..n_c).flat_map(move |ci| (0..n_l1).map(move |l| &per_unit[fv * n_l1 + l][ci]))
        })
        .collect();

    let inner = plan.k - 1;
    Ok((0..plan.k)
        .map(|f| {
            let mut points = Vec::with_capacity(grid.size());
            let mut rmse_mean = Vec::with_capacity(grid.size());
            let mut max_size = Vec::with_capacity(grid.size());
            for (p, &(c, l1)) in pairs.iter().enumerate() {
                for (t, &(tau1, tau2)) in taus.iter().enumerate() {
                    let cells: Vec<CellScore> = (0..inner)
                        .map(|v| scores[(f * inner + v) * pairs.len() + p][t])
                        .collect();
                    points.push(GridPoint { c, l1, tau1, tau2 });
                    rmse_mean.push(cells.iter().map(|s| s.rmse).sum::<f64>() / inner as f64);
                    max_size.push(cells.iter().map(|s| s.size).max().unwrap_or(0));
                }
            }
            PrestudyFold {
                fold: f,
                points,
                rmse: rmse_mean,
                max_size,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    Rent,
    UBayFs,
}

impl Selector {
    pub fn as_str(self) -> &'static str {
        match self {
            Selector::Rent => "rent",
            Selector::UBayFs => "ubayfs",
        }
    }
}

/// Residual analysis of one prediction vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `true - predicted`; positive means the outcome was underestimated.
    pub residuals: Vec<f64>,
    /// Positions with `|residual| > threshold`.
    pub outliers: Vec<usize>,
}

pub fn residual_report(y: &[f64], yhat: &[f64], threshold: f64) -> Result<ResidualReport> {
    if y.len() != yhat.len() {
        return Err(ensfs_core::Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        }
        .into());
    }
    let residuals: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| a - b).collect();
    let outliers = residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| r.abs() > threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(ResidualReport { residuals, outliers })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestPrediction {
    /// Row of the input dataset (before incomplete rows were dropped).
    pub row: usize,
    pub target: f64,
    pub linear: f64,
    pub knn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    /// Selected encoded column names, in column order.
    pub selected: Vec<String>,
    /// OLS coefficient of each selected column.
    pub coefficients: Vec<f64>,
    pub rmse_linear: f64,
    pub rmse_knn: f64,
    /// Redundancy of the selection on the fold's training matrix (0 for fewer than two columns).
    pub redundancy: f64,
    pub perc: Option<f64>,
    pub predictions: Vec<TestPrediction>,
    /// RENT only: hyperparameters chosen by the pre-study.
    pub choice: Option<Choice>,
    /// RENT only: the outer-fold set respected `max_s`.
    pub within_cap: bool,
}

/// Every fold of one selector at one setting (a `max_s` or a prior weight).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigOutcome {
    pub selector: Selector,
    pub setting: f64,
    pub folds: Vec<FoldOutcome>,
    pub stability: f64,
    pub stability_raw: f64,
    pub redundancy: f64,
    pub perc: Option<f64>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let sd = if xs.len() > 1 { sample_sd(xs) } else { 0.0 };
    (mean(xs), sd)
}

impl ConfigOutcome {
    pub fn rmse_linear(&self) -> (f64, f64) {
        mean_sd(&self.folds.iter().map(|f| f.rmse_linear).collect::<Vec<_>>())
    }

    pub fn rmse_knn(&self) -> (f64, f64) {
        mean_sd(&self.folds.iter().map(|f| f.rmse_knn).collect::<Vec<_>>())
    }

    pub fn mean_size(&self) -> f64 {
        self.folds.iter().map(|f| f.selected.len() as f64).sum::<f64>() / self.folds.len() as f64
    }

    /// Selection count (0..=K) and sign class of every feature selected at least once.
    pub fn frequencies(&self) -> Vec<(String, usize, SignClass)> {
        let mut coeffs: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
        for (k, f) in self.folds.iter().enumerate() {
            for (name, &c) in f.selected.iter().zip(&f.coefficients) {
                coeffs.entry(name.as_str()).or_insert_with(|| vec![None; self.folds.len()])[k] = Some(c);
            }
        }
        coeffs
            .into_iter()
            .map(|(name, cs)| (name.to_string(), cs.iter().flatten().count(), sign_class(&cs)))
            .collect()
    }
}

/// Stability over the union of encoded columns seen in any fold.
pub fn selection_stability(folds: &[FoldOutcome], universe: &[String]) -> Result<(f64, f64)> {
    let index: HashMap<&str, usize> = universe.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let sets: Vec<BTreeSet<usize>> = folds
        .iter()
        .map(|f| f.selected.iter().map(|n| index[n.as_str()]).collect())
        .collect();
    let s = stability(&sets, universe.len())?;
    Ok((s.value, s.raw))
}

fn summarize(selector: Selector, setting: f64, folds: Vec<FoldOutcome>, universe: &[String]) -> Result<ConfigOutcome> {
    let (stab, raw) = selection_stability(&folds, universe)?;
    let reds: Vec<f64> = folds.iter().filter(|f| !f.selected.is_empty()).map(|f| f.redundancy).collect();
    let percs: Vec<f64> = folds.iter().filter_map(|f| f.perc).collect();
    Ok(ConfigOutcome {
        selector,
        setting,
        stability: stab,
        stability_raw: raw,
        redundancy: if reds.is_empty() { 0.0 } else { mean(&reds) },
        perc: if percs.is_empty() { None } else { Some(mean(&percs)) },
        folds,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Name of the swept setting: `max_s` or `w`.
    pub setting_name: String,
    pub configs: Vec<ConfigOutcome>,
    /// Union of encoded column names over the folds; the stability universe.
    pub universe: Vec<String>,
    /// Findings of the leakage check; empty when clean or not requested.
    pub leakage: Vec<String>,
    pub leakage_checked: bool,
    pub prestudy: Vec<Choice>,
}

/// Outer fold with its preprocessed train/test matrices.
pub struct OuterFold {
    pub fold: usize,
    pub out: PipelineOutput,
}

pub fn outer_folds(prep: &Prepared, pre: &PreprocessConfig) -> Result<Vec<OuterFold>> {
    (0..prep.plan.k)
        .into_par_iter()
        .map(|fold| {
            Ok(OuterFold {
                fold,
                out: run_pipeline(&prep.dataset, &prep.plan.train_rows(fold), pre)?,
            })
        })
        .collect()
}

fn universe(folds: &[OuterFold]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in folds {
        for c in &f.out.train.columns {
            if seen.insert(c.name.clone()) {
                out.push(c.name.clone());
            }
        }
    }
    out
}

/// Encoded columns of `m` matched by the elevated names (source feature or column name).
pub fn elevated_columns(m: &EncodedMatrix, elevated: &[String]) -> BTreeSet<usize> {
    m.columns
        .iter()
        .enumerate()
        .filter(|(_, c)| elevated.iter().any(|e| *e == c.source || *e == c.name))
        .map(|(j, _)| j)
        .collect()
}

fn check_elevated(ds: &Dataset, elevated: &[String]) -> Result<()> {
    for e in elevated {
        let known = ds.features.iter().any(|f| {
            f.name == *e
                || (f.kind.is_categorical()
                    && f.levels.iter().any(|l| *e == format!("{}={l}", f.name) || *e == format!("{}>={l}", f.name)))
        });
        if !known {
            return Err(ensfs_core::Error::UnknownFeatureName(e.clone()).into());
        }
    }
    Ok(())
}

fn evaluate(
    fold: &OuterFold,
    selected: &BTreeSet<usize>,
    elevated: &[String],
    prep: &Prepared,
    knn_k: usize,
) -> Result<FoldOutcome> {
    let out = &fold.out;
    let s: Vec<usize> = selected.iter().copied().collect();
    let p = predict_on(&out.train, &out.test, &s, knn_k)?;
    let y = out.test.target_f64();
    let redundancy = if s.is_empty() {
        0.0
    } else {
        redundancy_rate(&out.train.values, selected)?.value
    };
    let perc = if s.is_empty() || elevated.is_empty() {
        None
    } else {
        Some(perc(selected, &elevated_columns(&out.train, elevated))?)
    };
    let predictions = out
        .test_rows
        .iter()
        .enumerate()
        .map(|(i, &r)| TestPrediction {
            row: prep.source_rows[r],
            target: y[i],
            linear: p.linear[i],
            knn: p.knn[i],
        })
        .collect();
    Ok(FoldOutcome {
        fold: fold.fold,
        selected: s.iter().map(|&j| out.train.columns[j].name.clone()).collect(),
        coefficients: p.coefficients,
        rmse_linear: rmse(&y, &p.linear)?,
        rmse_knn: rmse(&y, &p.knn)?,
        redundancy,
        perc,
        predictions,
        choice: None,
        within_cap: true,
    })
}

fn ubay_counts(fold: &OuterFold, cfg: &RunConfig, max_s: usize) -> Result<UBayPosterior> {
    let train = &fold.out.train;
    let n = train.n_cols();
    let uc = UBayConfig {
        models: cfg.ubayfs.models,
        split_ratio: cfg.ubayfs.split_ratio,
        max_s: max_s.min(n),
        prior_weights: vec![DEFAULT_PRIOR_WEIGHT; n],
        seed: cfg.ubayfs.seed,
    };
    Ok(ubay_train(&train.values, &train.target_f64(), &uc)?)
}

fn ubay_pick(post: &UBayPosterior, weights: &[f64], max_s: usize) -> BTreeSet<usize> {
    let n = weights.len();
    let uc = UBayConfig {
        max_s: max_s.min(n),
        ..UBayConfig::uniform(n)
    };
    ubay_select(&post.rescore(weights), &uc)
}

/// Poisoned copy: every cell and target of `rows` replaced by extreme values.
fn poison(ds: &Dataset, rows: &[usize]) -> Dataset {
    let mut out = ds.clone();
    for &r in rows {
        for (j, cell) in out.cells[r].iter_mut().enumerate() {
            let f = &ds.features[j];
            *cell = match (f.kind.is_categorical(), j % 3) {
                (_, 0) => Cell::Missing,
                (true, _) => Cell::Level(f.levels.len() - 1),
                (false, _) => Cell::Num(1e6 * (r + 1) as f64),
            };
        }
        out.target[r].os_months = 0.25;
        out.target[r].censored = false;
    }
    out
}

/// Refits the pipeline with all non-training rows poisoned and lists every
/// fitted quantity that changed.
pub fn leakage_violations(ds: &Dataset, train_rows: &[usize], pre: &PreprocessConfig, label: &str) -> Result<Vec<String>> {
    let test_rows: Vec<usize> = (0..ds.n_rows()).filter(|r| !train_rows.contains(r)).collect();
    let clean = run_pipeline(ds, train_rows, pre)?;
    let dirty = run_pipeline(&poison(ds, &test_rows), train_rows, pre)?;
    let mut v = Vec::new();
    let mut diff = |what: &str, same: bool| {
        if !same {
            v.push(format!("{label}: {what} depends on test rows"));
        }
    };
    diff("kept features", clean.kept_features == dirty.kept_features);
    diff("dropped rows", clean.dropped_rows == dirty.dropped_rows);
    diff("transform parameters", clean.params == dirty.params);
    diff("imputed training matrix", clean.train.values == dirty.train.values);
    diff("training target", clean.train.target == dirty.train.target);
    diff("imputation fallbacks", clean.train_warnings == dirty.train_warnings);
    Ok(v)
}

fn leakage_sweep(prep: &Prepared, cfg: &RunConfig, inner: bool) -> Result<Vec<String>> {
    let plan = &prep.plan;
    let mut units: Vec<(usize, Option<usize>)> = (0..plan.k).map(|f| (f, None)).collect();
    if inner {
        units.extend((0..plan.k).flat_map(|f| (0..plan.k).filter(move |&v| v != f).map(move |v| (f, Some(v)))));
    }
    let found: Vec<Vec<String>> = units
        .par_iter()
        .map(|&(f, v)| match v {
            None => leakage_violations(&prep.dataset, &plan.train_rows(f), &cfg.preprocess, &format!("fold {f}")),
            Some(v) => {
                let outer = plan.train_rows(f);
                let sub = prep.dataset.select_rows(&outer);
                let train: Vec<usize> = (0..outer.len()).filter(|&p| plan.assignment[outer[p]] != v).collect();
                leakage_violations(&sub, &train, &cfg.preprocess, &format!("fold {f} inner {v}"))
            }
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Pre-study on its own: the chosen RENT hyperparameters per fold and `max_s`.
pub fn run_prestudy(prep: &Prepared, cfg: &RunConfig, max_s_values: &[usize]) -> Result<Vec<Choice>> {
    let table = prestudy_grid_search(prep, cfg)?;
    Ok(max_s_values
        .iter()
        .flat_map(|&s| table.iter().map(move |t| t.choose(s, cfg.rent.tau3)))
        .collect())
}

/// Experiment 1: both selectors at every `max_s`, RENT tuned by the pre-study.
pub fn run_experiment1(prep: &Prepared, cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let e = &cfg.experiment;
    check_elevated(&prep.dataset, &e.elevated)?;
    let folds = outer_folds(prep, &cfg.preprocess)?;
    let universe = universe(&folds);

    let choices = run_prestudy(prep, cfg, &e.max_s_values)?;
    let k = prep.plan.k;

    // RENT diagnostics on each outer training set, once per chosen (C, ℓ1).
    let mut needed: Vec<(usize, u64, u64)> = choices
        .iter()
        .map(|c| (c.fold, c.point.c.to_bits(), c.point.l1.to_bits()))
        .collect();
    needed.sort_unstable();
    needed.dedup();
    let diags: Vec<RentDiagnostics> = needed
        .par_iter()
        .map(|&(f, c, l1)| {
            let rc = rent_config(cfg, f64::from_bits(c), f64::from_bits(l1), 0.0, 0.0)?;
            let train = &folds[f].out.train;
            Ok(rent_train(&train.values, &train.target_f64(), &rc)?)
        })
        .collect::<Result<_>>()?;
    let diag_of: HashMap<(usize, u64, u64), &RentDiagnostics> = needed.iter().copied().zip(diags.iter()).collect();

    let mut configs = Vec::new();
    for (si, &max_s) in e.max_s_values.iter().enumerate() {
        let rent_folds: Vec<FoldOutcome> = (0..k)
            .into_par_iter()
            .map(|f| {
                let choice = &choices[si * k + f];
                let diag = diag_of[&(f, choice.point.c.to_bits(), choice.point.l1.to_bits())];
                let s = select_with_thresholds(diag, choice.point.tau1, choice.point.tau2, true);
                let mut o = evaluate(&folds[f], &s, &e.elevated, prep, e.knn_k)?;
                o.within_cap = s.len() <= max_s;
                o.choice = Some(choice.clone());
                Ok(o)
            })
            .collect::<Result<_>>()?;
        configs.push(summarize(Selector::Rent, max_s as f64, rent_folds, &universe)?);

        let ubay_folds: Vec<FoldOutcome> = (0..k)
            .into_par_iter()
            .map(|f| {
                let post = ubay_counts(&folds[f], cfg, max_s)?;
                let n = folds[f].out.train.n_cols();
                let s = ubay_pick(&post, &vec![DEFAULT_PRIOR_WEIGHT; n], max_s);
                evaluate(&folds[f], &s, &e.elevated, prep, e.knn_k)
            })
            .collect::<Result<_>>()?;
        configs.push(summarize(Selector::UBayFs, max_s as f64, ubay_folds, &universe)?);
    }

    let leakage = if e.leakage_check {
        leakage_sweep(prep, cfg, true)?
    } else {
        Vec::new()
    };
    Ok(ExperimentReport {
        experiment: "exp1".into(),
        setting_name: "max_s".into(),
        configs,
        universe,
        leakage,
        leakage_checked: e.leakage_check,
        prestudy: choices,
    })
}

/// Experiment 2: UBayFS at `max_s` with the elevated columns weighted by each `w`.
pub fn run_experiment2(prep: &Prepared, cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let e = &cfg.experiment;
    if e.elevated.is_empty() {
        return Err(EnsfsError::Config("experiment 2 needs a non-empty experiment.elevated list".into()));
    }
    check_elevated(&prep.dataset, &e.elevated)?;
    let folds = outer_folds(prep, &cfg.preprocess)?;
    let universe = universe(&folds);
    let posts: Vec<UBayPosterior> = folds
        .par_iter()
        .map(|f| ubay_counts(f, cfg, e.max_s))
        .collect::<Result<_>>()?;

    let mut configs = Vec::new();
    for &w in &e.w_values {
        let outcomes: Vec<FoldOutcome> = folds
            .par_iter()
            .zip(&posts)
            .map(|(f, post)| {
                let elevated = elevated_columns(&f.out.train, &e.elevated);
                let weights: Vec<f64> = (0..f.out.train.n_cols())
                    .map(|j| if elevated.contains(&j) { w } else { DEFAULT_PRIOR_WEIGHT })
                    .collect();
                let s = ubay_pick(post, &weights, e.max_s);
                evaluate(f, &s, &e.elevated, prep, e.knn_k)
            })
            .collect::<Result<_>>()?;
        configs.push(summarize(Selector::UBayFs, w, outcomes, &universe)?);
    }

    let leakage = if e.leakage_check {
        leakage_sweep(prep, cfg, false)?
    } else {
        Vec::new()
    };
    Ok(ExperimentReport {
        experiment: "exp2".into(),
        setting_name: "w".into(),
        configs,
        universe,
        leakage,
        leakage_checked: e.leakage_check,
        prestudy: Vec::new(),
    })
}

/// Runs `f` on a pool with `jobs` workers (0 = one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| EnsfsError::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Grid of the pre-study flattened in search order.
pub fn grid_points(grid: &GridSpec) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(grid.size());
    for &c in &grid.c {
        for &l1 in &grid.l1 {
            for &tau1 in &grid.tau1 {
                for &tau2 in &grid.tau2 {
                    out.push(GridPoint { c, l1, tau1, tau2 });
                }
            }
        }
    }
    out
}
