//! Run configuration, read from one TOML file. Every field has a default, so
//! an empty file runs the default protocol; command-line flags override
//! individual values.

use std::path::{Path, PathBuf};

use ensfs_core::preprocess::pipeline::PreprocessConfig;
use ensfs_core::synth::SynthSpec;
use serde::{Deserialize, Serialize};

use crate::error::{EnsfsError, Result};
use crate::io::{parse_toml, read_text};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data: PathBuf,
    pub metadata: PathBuf,
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data: "data.csv".into(),
            metadata: "data.meta.toml".into(),
            output: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldSettings {
    pub k: usize,
    pub seed: u64,
}

impl Default for FoldSettings {
    fn default() -> Self {
        FoldSettings { k: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSettings {
    pub models: usize,
    pub split_ratio: f64,
    pub seed: u64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        EnsembleSettings {
            models: 100,
            split_ratio: 0.75,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RentSettings {
    pub models: usize,
    pub split_ratio: f64,
    pub tau3: f64,
    pub seed: u64,
}

impl Default for RentSettings {
    fn default() -> Self {
        RentSettings {
            models: 100,
            split_ratio: 0.75,
            tau3: 0.975,
            seed: 0,
        }
    }
}

fn steps(to: f64, by: f64) -> Vec<f64> {
    let n = (to / by).round() as usize;
    (0..=n).map(|i| (i as f64 * by * 1e6).round() / 1e6).collect()
}

/// Hyperparameter grid searched by the pre-study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub l1: Vec<f64>,
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c: vec![1.0, 10.0, 100.0, 1000.0],
            l1: steps(1.0, 0.1),
            tau1: steps(1.0, 0.05),
            tau2: steps(1.0, 0.05),
        }
    }
}

impl GridSpec {
    pub fn size(&self) -> usize {
        self.c.len() * self.l1.len() * self.tau1.len() * self.tau2.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    /// Size cap used by the pre-study and experiment 2.
    pub max_s: usize,
    /// Size caps swept by experiment 1.
    pub max_s_values: Vec<usize>,
    /// Prior weights swept by experiment 2.
    pub w_values: Vec<f64>,
    /// Prior-elevated features (source feature or encoded column names).
    pub elevated: Vec<String>,
    /// Neighbours of the kNN regressor.
    pub knn_k: usize,
    pub outlier_threshold: f64,
    /// Refit every step with the test rows poisoned and compare.
    pub leakage_check: bool,
    /// Also write per-metric curves as JSON.
    pub curves: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            max_s: 20,
            max_s_values: vec![5, 10, 15, 20, 25, 30, 35, 40],
            w_values: std::iter::once(0.1).chain((1..=11).map(|i| 10.0 * i as f64)).collect(),
            elevated: Vec::new(),
            knn_k: 5,
            outlier_threshold: 2.5,
            leakage_check: false,
            curves: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    /// Named profile used when no explicit spec is given: `paper` or `prior`.
    pub profile: String,
    pub seed: u64,
    pub spec: Option<SynthSpec>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings {
            profile: "paper".into(),
            seed: 0,
            spec: None,
        }
    }
}

impl SynthSettings {
    pub fn resolve(&self) -> Result<SynthSpec> {
        if let Some(spec) = &self.spec {
            return Ok(spec.clone());
        }
        match self.profile.as_str() {
            "paper" => Ok(SynthSpec::paper_profile(self.seed)),
            "prior" => Ok(SynthSpec::prior_profile(self.seed)),
            other => Err(EnsfsError::Config(format!("unknown synthetic profile {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; 0 uses every core. Results do not depend on it, so it
    /// is left out of the config echo.
    #[serde(skip_serializing)]
    pub jobs: usize,
    pub paths: Paths,
    pub preprocess: PreprocessConfig,
    pub folds: FoldSettings,
    pub rent: RentSettings,
    pub ubayfs: EnsembleSettings,
    pub grid: GridSpec,
    pub experiment: ExperimentSettings,
    pub synth: SynthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            jobs: 0,
            paths: Paths::default(),
            preprocess: PreprocessConfig::default(),
            folds: FoldSettings::default(),
            rent: RentSettings::default(),
            ubayfs: EnsembleSettings::default(),
            grid: GridSpec::default(),
            experiment: ExperimentSettings::default(),
            synth: SynthSettings::default(),
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(EnsfsError::Config(msg()))
    }
}

fn fraction(name: &str, x: f64) -> Result<()> {
    check((0.0..=1.0).contains(&x), || format!("{name} = {x} is outside [0, 1]"))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(path, &read_text(path)?)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        parse_toml(path, text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.preprocess;
        check(p.column_missing_threshold > 0.0 && p.column_missing_threshold <= 1.0, || {
            format!("preprocess.column_missing_threshold = {} is outside (0, 1]", p.column_missing_threshold)
        })?;
        check(p.block_missing_threshold > 0.0 && p.block_missing_threshold <= 1.0, || {
            format!("preprocess.block_missing_threshold = {} is outside (0, 1]", p.block_missing_threshold)
        })?;
        check(p.knn_k % 2 == 1, || format!("preprocess.knn_k = {} must be odd", p.knn_k))?;
        check(self.folds.k >= 2, || format!("folds.k = {} must be at least 2", self.folds.k))?;
        check(self.rent.models >= 2, || "rent.models must be at least 2".into())?;
        check(self.ubayfs.models >= 1, || "ubayfs.models must be at least 1".into())?;
        for (name, r) in [("rent.split_ratio", self.rent.split_ratio), ("ubayfs.split_ratio", self.ubayfs.split_ratio)] {
            check(r > 0.0 && r <= 1.0, || format!("{name} = {r} is outside (0, 1]"))?;
        }
        check(self.rent.tau3 > 0.5 && self.rent.tau3 < 1.0, || {
            format!("rent.tau3 = {} is outside (0.5, 1)", self.rent.tau3)
        })?;
        let g = &self.grid;
        check(g.size() > 0, || "grid must have at least one point".into())?;
        for &c in &g.c {
            check(c > 0.0, || format!("grid.c value {c} must be positive"))?;
        }
        for (name, values) in [("grid.l1", &g.l1), ("grid.tau1", &g.tau1), ("grid.tau2", &g.tau2)] {
            for &x in values {
                fraction(name, x)?;
            }
        }
        let e = &self.experiment;
        check(e.max_s >= 1, || "experiment.max_s must be at least 1".into())?;
        check(!e.max_s_values.is_empty() && e.max_s_values.iter().all(|&s| s >= 1), || {
            "experiment.max_s_values must be a non-empty list of positive sizes".into()
        })?;
        check(!e.w_values.is_empty() && e.w_values.iter().all(|&w| w > 0.0 && w.is_finite()), || {
            "experiment.w_values must be a non-empty list of positive weights".into()
        })?;
        check(e.knn_k >= 1, || "experiment.knn_k must be at least 1".into())?;
        check(e.outlier_threshold >= 0.0, || "experiment.outlier_threshold must be non-negative".into())?;
        Ok(())
    }
}
