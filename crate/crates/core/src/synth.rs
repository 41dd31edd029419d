//! Synthetic mixed-type datasets with planted informative features.
//!
//! Every feature starts from a standard normal latent value. Features in a
//! correlation cluster share a latent factor, so two members correlate at the
//! cluster's target level. Numeric features expose the latent value (free
//! numeric features may be log-normal), ordinal and nominal features cut it
//! into equiprobable levels.
//!
//! The continuous outcome is a signed, weighted sum of the planted features'
//! standardized signals plus Gaussian noise. It is mapped to survival months
//! at 36 months plus 18 months per standard deviation, so every yearly bucket
//! is populated; some rows beyond 60 months are marked censored. Cells go
//! missing completely at random.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Block, Cell, Dataset, FeatureKind, FeatureMeta, Target};
use crate::error::{Error, Result};

/// Features of one block. Level counts are given per categorical feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub block: Block,
    #[serde(default)]
    pub numeric: usize,
    #[serde(default)]
    pub nominal_levels: Vec<usize>,
    #[serde(default)]
    pub ordinal_levels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFeature {
    pub feature: String,
    /// Weight of the feature's unit-variance signal in the outcome.
    pub effect: f64,
    #[serde(default = "positive")]
    pub positive: bool,
}

fn positive() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCluster {
    pub features: Vec<String>,
    /// Target pairwise |correlation| of the members' latent values.
    pub correlation: f64,
}

/// Structural defects added on top of the regular features, mirroring what
/// the cleaning rules are meant to remove.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Defects {
    /// Numeric columns with 40% of their cells missing.
    pub sparse_columns: usize,
    /// Columns holding one value.
    pub constant_columns: usize,
    /// Exact copies of the first regular numeric feature.
    pub duplicate_columns: usize,
    /// Rows (at the end of the table) missing three quarters of the largest block.
    pub incomplete_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub m: usize,
    pub blocks: Vec<BlockSpec>,
    #[serde(default)]
    pub planted: Vec<PlantedFeature>,
    pub noise_sd: f64,
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default)]
    pub clusters: Vec<CorrelationCluster>,
    /// Probability that a record beyond 60 months is censored.
    #[serde(default)]
    pub censor_rate: f64,
    /// Every other numeric feature outside planted sets and clusters is log-normal.
    #[serde(default)]
    pub lognormal_free_numeric: bool,
    #[serde(default)]
    pub defects: Defects,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone)]
struct Planned {
    meta: FeatureMeta,
    cluster: Option<usize>,
    lognormal: bool,
}

fn kind_tag(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Numeric => "num",
        FeatureKind::Nominal => "nom",
        FeatureKind::Ordinal => "ord",
    }
}

fn level_labels(kind: FeatureKind, c: usize) -> Vec<String> {
    match kind {
        FeatureKind::Ordinal => (0..c).map(|l| format!("{l}")).collect(),
        _ => (0..c).map(|l| String::from(char::from(b'a' + (l % 26) as u8))).collect(),
    }
}

impl SynthSpec {
    /// Names of the regular features, in column order: `<block>_<kind><nn>`,
    /// e.g. `p_num01`, `h_ord02`.
    pub fn feature_names(&self) -> Vec<String> {
        self.regular_features().into_iter().map(|f| f.name).collect()
    }

    fn regular_features(&self) -> Vec<FeatureMeta> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for i in 0..b.numeric {
                out.push(FeatureMeta::numeric(format!("{}_num{:02}", b.block, i + 1), b.block));
            }
            for (kind, levels) in [(FeatureKind::Nominal, &b.nominal_levels), (FeatureKind::Ordinal, &b.ordinal_levels)] {
                for (i, &c) in levels.iter().enumerate() {
                    out.push(FeatureMeta::categorical(
                        format!("{}_{}{:02}", b.block, kind_tag(kind), i + 1),
                        b.block,
                        kind,
                        level_labels(kind, c),
                    ));
                }
            }
        }
        out
    }

    fn check(&self) -> Result<Vec<FeatureMeta>> {
        let bad = |msg: String| Err(Error::InfeasibleSpec(msg));
        if self.m < 2 {
            return bad(format!("need at least two rows, got {}", self.m));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad(format!("noise_sd {} must be non-negative", self.noise_sd));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad(format!("missing_rate {} outside [0, 1)", self.missing_rate));
        }
        if !(0.0..=1.0).contains(&self.censor_rate) {
            return bad(format!("censor_rate {} outside [0, 1]", self.censor_rate));
        }
        let features = self.regular_features();
        if features.is_empty() {
            return bad("no features".into());
        }
        if let Some(f) = features.iter().find(|f| f.kind.is_categorical() && f.levels.len() < 2) {
            return bad(format!("{} needs at least two levels", f.name));
        }
        let names: BTreeSet<&str> = features.iter().map(|f| f.name.as_str()).collect();
        let mut seen_planted = BTreeSet::new();
        for p in &self.planted {
            if !names.contains(p.feature.as_str()) {
                return bad(format!("planted feature {} is not generated", p.feature));
            }
            if !seen_planted.insert(p.feature.as_str()) {
                return bad(format!("{} planted twice", p.feature));
            }
            if !p.effect.is_finite() || p.effect < 0.0 {
                return bad(format!("effect of {} must be non-negative", p.feature));
            }
        }
        let mut clustered = BTreeSet::new();
        for c in &self.clusters {
            if !(0.0..=1.0).contains(&c.correlation) {
                return bad(format!("cluster correlation {} outside [0, 1]", c.correlation));
            }
            for f in &c.features {
                if !names.contains(f.as_str()) {
                    return bad(format!("cluster member {f} is not generated"));
                }
                if !clustered.insert(f.as_str()) {
                    return bad(format!("{f} belongs to two clusters"));
                }
            }
        }
        if self.defects.duplicate_columns > 0 && !features.iter().any(|f| f.kind == FeatureKind::Numeric) {
            return bad("duplicate columns need a numeric feature to copy".into());
        }
        if self.defects.incomplete_rows >= self.m {
            return bad("every row would be incomplete".into());
        }
        Ok(features)
    }

    fn plan(&self, features: Vec<FeatureMeta>) -> Vec<Planned> {
        let planted: BTreeSet<&str> = self.planted.iter().map(|p| p.feature.as_str()).collect();
        let mut cluster_of = BTreeMap::new();
        for (c, cl) in self.clusters.iter().enumerate() {
            for f in &cl.features {
                cluster_of.insert(f.clone(), c);
            }
        }
        let mut free_numeric = 0usize;
        features
            .into_iter()
            .map(|meta| {
                let cluster = cluster_of.get(&meta.name).copied();
                let free = meta.kind == FeatureKind::Numeric && cluster.is_none() && !planted.contains(meta.name.as_str());
                let lognormal = free && self.lognormal_free_numeric && {
                    free_numeric += 1;
                    free_numeric % 2 == 0
                };
                Planned { meta, cluster, lognormal }
            })
            .collect()
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2))
}

/// Equiprobable level of a standard normal latent value.
fn level_of(z: f64, c: usize) -> usize {
    ((normal_cdf(z) * c as f64) as usize).min(c - 1)
}

/// Unit-variance signal a planted feature contributes to the outcome.
fn signal(meta: &FeatureMeta, latent: f64) -> f64 {
    let c = meta.levels.len() as f64;
    match meta.kind {
        FeatureKind::Numeric => latent,
        FeatureKind::Ordinal => {
            let code = level_of(latent, meta.levels.len()) as f64;
            (code - 0.5 * (c - 1.0)) / ((c * c - 1.0) / 12.0).sqrt()
        }
        FeatureKind::Nominal => {
            let top = (level_of(latent, meta.levels.len()) == meta.levels.len() - 1) as u8 as f64;
            (top - 1.0 / c) / ((1.0 / c) * (1.0 - 1.0 / c)).sqrt()
        }
    }
}

/// Generates the dataset described by `spec`; identical specs give identical data.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    let regular = spec.check()?;
    let plan = spec.plan(regular);
    let m = spec.m;
    let n = plan.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let factors: Vec<Vec<f64>> = spec
        .clusters
        .iter()
        .map(|_| (0..m).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mut latent = vec![vec![0.0f64; n]; m];
    for (j, p) in plan.iter().enumerate() {
        let loading = p.cluster.map_or(0.0, |c| spec.clusters[c].correlation.sqrt());
        let own = (1.0 - loading * loading).sqrt();
        for i in 0..m {
            let e: f64 = StandardNormal.sample(&mut rng);
            let shared = p.cluster.map_or(0.0, |c| factors[c][i]);
            latent[i][j] = loading * shared + own * e;
        }
    }

    let index: BTreeMap<&str, usize> = plan.iter().enumerate().map(|(j, p)| (p.meta.name.as_str(), j)).collect();
    let total_sd = (spec.planted.iter().map(|p| p.effect * p.effect).sum::<f64>() + spec.noise_sd * spec.noise_sd).sqrt();
    let mut target = Vec::with_capacity(m);
    for row in &latent {
        let mut s = 0.0;
        for p in &spec.planted {
            let j = index[p.feature.as_str()];
            let sign = if p.positive { 1.0 } else { -1.0 };
            s += sign * p.effect * signal(&plan[j].meta, row[j]);
        }
        let noise: f64 = StandardNormal.sample(&mut rng);
        s += spec.noise_sd * noise;
        let z = if total_sd > 0.0 { s / total_sd } else { 0.0 };
        let os_months = (36.0 + 18.0 * z).max(0.5);
        let censored = os_months > 60.0 && rng.gen::<f64>() < spec.censor_rate;
        target.push(Target { os_months, censored });
    }

    let mut features: Vec<FeatureMeta> = plan.iter().map(|p| p.meta.clone()).collect();
    let mut cells: Vec<Vec<Cell>> = latent
        .iter()
        .map(|row| {
            row.iter()
                .zip(&plan)
                .map(|(&z, p)| match p.meta.kind {
                    FeatureKind::Numeric if p.lognormal => Cell::Num(z.exp()),
                    FeatureKind::Numeric => Cell::Num(z),
                    _ => Cell::Level(level_of(z, p.meta.levels.len())),
                })
                .collect()
        })
        .collect();

    if spec.missing_rate > 0.0 {
        for row in cells.iter_mut() {
            for cell in row.iter_mut() {
                if rng.gen::<f64>() < spec.missing_rate {
                    *cell = Cell::Missing;
                }
            }
        }
    }

    add_defects(spec, &mut features, &mut cells, &mut rng);

    Dataset { features, cells, target }.validated()
}

fn add_defects(spec: &SynthSpec, features: &mut Vec<FeatureMeta>, cells: &mut [Vec<Cell>], rng: &mut ChaCha8Rng) {
    let d = &spec.defects;
    let m = spec.m;
    for s in 0..d.sparse_columns {
        features.push(FeatureMeta::numeric(format!("x_sparse{:02}", s + 1), Block::T));
        let missing: BTreeSet<usize> = sample(rng, m, m * 2 / 5).into_iter().collect();
        for (i, row) in cells.iter_mut().enumerate() {
            let v: f64 = StandardNormal.sample(rng);
            row.push(if missing.contains(&i) { Cell::Missing } else { Cell::Num(v) });
        }
    }
    for s in 0..d.constant_columns {
        features.push(FeatureMeta::numeric(format!("x_const{:02}", s + 1), Block::P));
        for row in cells.iter_mut() {
            row.push(Cell::Num(1.0));
        }
    }
    if d.duplicate_columns > 0 {
        let src = features.iter().position(|f| f.kind == FeatureKind::Numeric).unwrap_or(0);
        for s in 0..d.duplicate_columns {
            let mut meta = features[src].clone();
            meta.name = format!("x_dup{:02}", s + 1);
            features.push(meta);
            for row in cells.iter_mut() {
                let v = row[src];
                row.push(v);
            }
        }
    }
    if d.incomplete_rows > 0 {
        let largest = Block::ALL
            .iter()
            .copied()
            .max_by_key(|&b| (features.iter().filter(|f| f.block == b).count(), core::cmp::Reverse(b)))
            .unwrap_or(Block::P);
        let cols: Vec<usize> = (0..features.len()).filter(|&j| features[j].block == largest).collect();
        let k = (cols.len() * 3).div_ceil(4);
        for row in cells.iter_mut().skip(m - d.incomplete_rows) {
            for &j in cols.iter().take(k) {
                row[j] = Cell::Missing;
            }
        }
    }
}

/// Names of the planted features.
pub fn ground_truth(spec: &SynthSpec) -> Vec<String> {
    spec.planted.iter().map(|p| p.feature.clone()).collect()
}

/// Precision and recall of a selected feature-name set against the planted set.
pub fn recovery<S: AsRef<str>>(spec: &SynthSpec, selected: &[S]) -> (f64, f64) {
    let truth: BTreeSet<&str> = spec.planted.iter().map(|p| p.feature.as_str()).collect();
    let chosen: BTreeSet<&str> = selected.iter().map(AsRef::as_ref).collect();
    let hits = chosen.intersection(&truth).count() as f64;
    let precision = if chosen.is_empty() { 0.0 } else { hits / chosen.len() as f64 };
    let recall = if truth.is_empty() { 0.0 } else { hits / truth.len() as f64 };
    (precision, recall)
}

fn planted(feature: &str, effect: f64, positive: bool) -> PlantedFeature {
    PlantedFeature {
        feature: feature.into(),
        effect,
        positive,
    }
}

impl SynthSpec {
    /// Small all-numeric spec with `planted` informative features among `n` columns.
    pub fn simple(m: usize, n: usize, planted_effects: &[f64], noise_sd: f64, seed: u64) -> Self {
        let planted = planted_effects
            .iter()
            .enumerate()
            .map(|(i, &e)| self::planted(&format!("p_num{:02}", i + 1), e, i % 2 == 0))
            .collect();
        SynthSpec {
            m,
            blocks: vec![BlockSpec {
                block: Block::P,
                numeric: n,
                nominal_levels: Vec::new(),
                ordinal_levels: Vec::new(),
            }],
            planted,
            noise_sd,
            missing_rate: 0.0,
            clusters: Vec::new(),
            censor_rate: 0.0,
            lognormal_free_numeric: false,
            defects: Defects::default(),
            seed,
        }
    }

    /// A dataset shaped like a small clinical cohort: five blocks, mixed
    /// feature types, 134 encoded columns once cleaned, and 66 raw rows of
    /// which three are too incomplete to keep. The raw table has 135 feature
    /// columns (137 with the two survival columns).
    pub fn paper_profile(seed: u64) -> Self {
        let blocks = vec![
            BlockSpec {
                block: Block::P,
                numeric: 20,
                nominal_levels: [vec![2; 17], vec![3; 4]].concat(),
                ordinal_levels: vec![3, 3, 4, 5, 3],
            },
            BlockSpec {
                block: Block::B,
                numeric: 25,
                nominal_levels: Vec::new(),
                ordinal_levels: vec![3, 4, 3],
            },
            BlockSpec {
                block: Block::H,
                numeric: 10,
                nominal_levels: [vec![2; 8], vec![3; 2]].concat(),
                ordinal_levels: vec![3, 4],
            },
            BlockSpec {
                block: Block::I,
                numeric: 5,
                nominal_levels: vec![2],
                ordinal_levels: Vec::new(),
            },
            BlockSpec {
                block: Block::T,
                numeric: 6,
                nominal_levels: vec![2; 5],
                ordinal_levels: Vec::new(),
            },
        ];
        let planted = vec![
            planted("p_num01", 1.0, true),
            planted("b_num01", 1.0, false),
            planted("h_num01", 0.9, true),
            planted("h_ord01", 0.8, false),
            planted("t_num01", 0.8, true),
        ];
        let clusters = vec![
            CorrelationCluster {
                features: vec!["b_num02".into(), "b_num03".into(), "b_num04".into(), "b_num05".into()],
                correlation: 0.6,
            },
            CorrelationCluster {
                features: vec!["p_num02".into(), "p_num03".into(), "p_num04".into()],
                correlation: 0.5,
            },
            CorrelationCluster {
                features: vec!["h_num02".into(), "h_num03".into()],
                correlation: 0.7,
            },
        ];
        SynthSpec {
            m: 66,
            blocks,
            planted,
            noise_sd: 1.0,
            missing_rate: 0.03,
            clusters,
            censor_rate: 0.5,
            lognormal_free_numeric: true,
            defects: Defects {
                sparse_columns: 19,
                constant_columns: 2,
                duplicate_columns: 1,
                incomplete_rows: 3,
            },
            seed,
        }
    }
}

impl SynthSpec {
    /// The paper-shaped table with twenty informative numeric features that
    /// share one latent factor (within-group correlation 0.3). Together with
    /// two pure-noise columns they make up [`PRIOR_PROFILE_ELEVATED`], a prior
    /// set of 22 encoded columns of which 20 carry signal.
    pub fn prior_profile(seed: u64) -> Self {
        let informative: Vec<String> = (1..=20).map(|i| format!("p_num{i:02}")).collect();
        SynthSpec {
            planted: informative.iter().map(|f| planted(f, 1.0, true)).collect(),
            clusters: vec![CorrelationCluster {
                features: informative,
                correlation: 0.3,
            }],
            ..SynthSpec::paper_profile(seed)
        }
    }
}

/// Elevated columns for [`SynthSpec::prior_profile`].
pub const PRIOR_PROFILE_ELEVATED: [&str; 22] = [
    "p_num01", "p_num02", "p_num03", "p_num04", "p_num05", "p_num06", "p_num07", "p_num08", "p_num09", "p_num10", "p_num11",
    "p_num12", "p_num13", "p_num14", "p_num15", "p_num16", "p_num17", "p_num18", "p_num19", "p_num20", "b_num24", "b_num25",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::encode::encode_target;
    use crate::stats::pearson;

    #[test]
    fn deterministic() {
        let spec = SynthSpec::paper_profile(3);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec { seed: 4, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn paper_profile_shape_is_valid() {
        let ds = generate(&SynthSpec::paper_profile(1)).unwrap();
        assert_eq!(ds.n_rows(), 66);
        assert_eq!(ds.n_features(), 135);
        assert!(ds.validate().is_empty());
    }

    #[test]
    fn noiseless_single_feature_gives_step_function() {
        let spec = SynthSpec::simple(80, 3, &[1.0], 0.0, 5);
        let ds = generate(&spec).unwrap();
        let mut pairs: Vec<(f64, u8)> = ds
            .cells
            .iter()
            .zip(&ds.target)
            .map(|(row, t)| (row[0].as_f64().unwrap(), encode_target(t.os_months, t.censored).unwrap()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        let levels: BTreeSet<u8> = pairs.iter().map(|p| p.1).collect();
        assert!(levels.len() >= 4);
    }

    #[test]
    fn ground_truth_and_recovery() {
        let spec = SynthSpec::simple(20, 8, &[1.0; 5], 1.0, 0);
        let truth = ground_truth(&spec);
        assert_eq!(truth.len(), 5);
        assert_eq!(recovery(&spec, &truth), (1.0, 1.0));
        let none = SynthSpec::simple(20, 8, &[], 1.0, 0);
        assert!(ground_truth(&none).is_empty());
    }

    #[test]
    fn cluster_correlation_near_target() {
        let mut spec = SynthSpec::simple(400, 6, &[], 1.0, 8);
        spec.clusters = vec![CorrelationCluster {
            features: vec!["p_num02".into(), "p_num03".into(), "p_num04".into()],
            correlation: 0.6,
        }];
        let ds = generate(&spec).unwrap();
        let col = |j: usize| -> Vec<f64> { ds.column(j).map(|c| c.as_f64().unwrap()).collect() };
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            let r = pearson(&col(a), &col(b)).unwrap().abs();
            assert!((r - 0.6).abs() < 0.15, "{r}");
        }
        let r = pearson(&col(0), &col(1)).unwrap().abs();
        assert!(r < 0.2);
    }

    #[test]
    fn infeasible_specs() {
        let mut spec = SynthSpec::simple(20, 3, &[1.0], 1.0, 0);
        spec.planted[0].feature = "zzz".into();
        assert!(matches!(generate(&spec), Err(Error::InfeasibleSpec(_))));
        let spec = SynthSpec::simple(1, 3, &[], 1.0, 0);
        assert!(generate(&spec).is_err());
        let mut spec = SynthSpec::simple(20, 3, &[], 1.0, 0);
        spec.missing_rate = 1.0;
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn missingness_rate_roughly_respected() {
        let mut spec = SynthSpec::simple(300, 10, &[], 1.0, 2);
        spec.missing_rate = 0.1;
        let ds = generate(&spec).unwrap();
        let missing = ds.cells.iter().flatten().filter(|c| c.is_missing()).count() as f64;
        assert!((missing / 3000.0 - 0.1).abs() < 0.02);
    }
}
