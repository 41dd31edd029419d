//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one line, pass or fail:
//!
//! ```text
//! cargo test -p ensfs --test acceptance            # all twelve
//! cargo test -p ensfs --test acceptance -- 3 7     # a subset
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ensfs::config::RunConfig;
use ensfs::harness::{outer_folds, prepare, run_experiment2, ExperimentReport};
use ensfs_core::data::{Block, FeatureKind, FeatureMeta};
use ensfs_core::metrics::{perc, redundancy_rate, rmse, stability};
use ensfs_core::models::elastic_net::{fit_elastic_net, kkt_residual, ElasticNetConfig};
use ensfs_core::models::linear::fit_ols;
use ensfs_core::preprocess::encode::{encode_onehot, encode_ordinal, encode_target};
use ensfs_core::preprocess::power::{apply_yeo_johnson, fit_yeo_johnson, log_likelihood};
use ensfs_core::rent::{rent_select_capped, rent_train, select_with_thresholds, RentConfig, RentDiagnostics};
use ensfs_core::synth::{generate, recovery, PlantedFeature, SynthSpec, PRIOR_PROFILE_ELEVATED};
use ensfs_core::ubayfs::{ubay_select, ubay_train, UBayConfig, UBayPosterior};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn c1_encoding() -> Check {
    let start = Instant::now();
    let levels = ["A", "B", "C", "D"];
    let nominal = FeatureMeta::categorical("x", Block::P, FeatureKind::Nominal, levels);
    let ordinal = FeatureMeta::categorical("x", Block::P, FeatureKind::Ordinal, levels);
    let onehot = [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
    let cumulative = [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
    let got_onehot = rows(&encode_onehot(&[0, 1, 2, 3], &nominal).map_err(|e| e.to_string())?);
    let got_ordinal = rows(&encode_ordinal(&[0, 1, 2, 3], &ordinal).map_err(|e| e.to_string())?);
    for v in 0..4 {
        ensure(got_onehot[v] == onehot[v], || format!("one-hot {} -> {:?}", levels[v], got_onehot[v]))?;
        ensure(got_ordinal[v] == cumulative[v], || format!("ordinal {} -> {:?}", levels[v], got_ordinal[v]))?;
    }
    let target = [
        (6.0, false, 1),
        (12.0, false, 1),
        (18.5, false, 2),
        (30.0, false, 3),
        (48.0, false, 4),
        (59.9, false, 5),
        (60.5, false, 6),
        (70.0, true, 6),
    ];
    for (os, censored, want) in target {
        let got = encode_target(os, censored).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("target OS={os} censored={censored} -> {got}, want {want}"))?;
    }
    ensure(encode_target(40.0, true).is_err(), || "censored below 60 months accepted".into())?;
    within(Duration::from_secs(1), start)?;
    Ok("8/8 encoding rows, 6/6 target buckets".into())
}

fn grid_lambda(xs: &[f64]) -> f64 {
    (0..=10_000)
        .map(|i| -5.0 + i as f64 * 1e-3)
        .max_by(|a, b| log_likelihood(xs, *a).total_cmp(&log_likelihood(xs, *b)))
        .unwrap()
}

fn c2_yeo_johnson() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-50.0..50.0);
        ensure((apply_yeo_johnson(x, 1.0) - x).abs() < 1e-12, || format!("identity fails at {x}"))?;
    }
    let eps = 1e-6;
    for i in 0..=100 {
        let x = i as f64 * 0.5;
        let d0 = (apply_yeo_johnson(x, eps) - apply_yeo_johnson(x, 0.0)).abs();
        let d2 = (apply_yeo_johnson(-x, 2.0 - eps) - apply_yeo_johnson(-x, 2.0)).abs();
        ensure(d0 < 1e-4 && d2 < 1e-4, || format!("discontinuity at x={x}: {d0:e}, {d2:e}"))?;
    }
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-20.0..20.0);
        let dx: f64 = rng.gen_range(1e-3..5.0);
        let lambda: f64 = rng.gen_range(-5.0..5.0);
        let (a, b) = (apply_yeo_johnson(x, lambda), apply_yeo_johnson(x + dx, lambda));
        ensure(b > a, || format!("not increasing at x={x}, dx={dx}, lambda={lambda}"))?;
    }
    let mut worst: f64 = 0.0;
    for c in 0..20 {
        let n = rng.gen_range(30..200);
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                match c % 4 {
                    0 => 3.0 * z + 1.0,
                    1 => z.exp(),
                    2 => -(0.7 * z).exp() * 4.0,
                    _ => z * z * 2.0 - 1.0,
                }
            })
            .collect();
        let fitted = fit_yeo_johnson(&xs).map_err(|e| e.to_string())?;
        let oracle = grid_lambda(&xs);
        worst = worst.max((fitted - oracle).abs());
        ensure((fitted - oracle).abs() <= 0.25, || format!("column {c}: lambda {fitted} vs oracle {oracle}"))?;
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("identity, continuity, 1000 monotone pairs, max |lambda - oracle| = {worst:.1e} on 20 columns"))
}

fn random_problem(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let x = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let beta = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
    let noise = DVector::from_fn(m, |_, _| 0.5 * rng.sample::<f64, _>(StandardNormal));
    let y = &x * beta + noise;
    (x, y.add_scalar(1.5))
}

/// Ridge with an unpenalized intercept, from the normal equations of the centred problem.
fn ridge(x: &DMatrix<f64>, y: &DVector<f64>, l2: f64) -> DVector<f64> {
    let m = x.nrows() as f64;
    let means = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.mean()));
    let mut xc = x.clone();
    for (j, mut col) in xc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    let yc = y.add_scalar(-y.mean());
    let a = xc.transpose() * &xc / m + DMatrix::identity(x.ncols(), x.ncols()) * l2;
    a.lu().solve(&(xc.transpose() * yc / m)).expect("ridge system is regular")
}

fn c3_elastic_net() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut ridge_err, mut ols_err, mut kkt): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let (x, y) = random_problem(&mut rng, 30, 8);
        let c = rng.gen_range(0.5..20.0);
        let cfg = ElasticNetConfig::new(c, 0.0).map_err(|e| e.to_string())?;
        let fit = fit_elastic_net(&x, &y, &cfg).map_err(|e| e.to_string())?;
        ensure(fit.converged, || "ridge fit did not converge".into())?;
        ridge_err = ridge_err.max((&fit.model.coefficients - ridge(&x, &y, 1.0 / c)).amax());
        kkt = kkt.max(kkt_residual(&x, &y, &fit.model, &cfg));

        let cfg = ElasticNetConfig::new(1e9, rng.gen_range(0.0..=1.0)).map_err(|e| e.to_string())?;
        let fit = fit_elastic_net(&x, &y, &cfg).map_err(|e| e.to_string())?;
        ensure(fit.converged, || "near-OLS fit did not converge".into())?;
        let ols = fit_ols(&x, &y).map_err(|e| e.to_string())?.model;
        ols_err = ols_err
            .max((&fit.model.coefficients - &ols.coefficients).amax())
            .max((fit.model.intercept - ols.intercept).abs());
        kkt = kkt.max(kkt_residual(&x, &y, &fit.model, &cfg));

        let cfg = ElasticNetConfig::new(rng.gen_range(0.5..50.0), rng.gen_range(0.05..=1.0)).map_err(|e| e.to_string())?;
        let fit = fit_elastic_net(&x, &y, &cfg).map_err(|e| e.to_string())?;
        kkt = kkt.max(kkt_residual(&x, &y, &fit.model, &cfg));
    }
    ensure(ridge_err < 1e-6, || format!("ridge deviation {ridge_err:e}"))?;
    ensure(ols_err < 1e-5, || format!("OLS deviation {ols_err:e}"))?;
    ensure(kkt < 1e-5, || format!("KKT residual {kkt:e}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!("ridge {ridge_err:.1e}, OLS {ols_err:.1e}, KKT {kkt:.1e} over 50 problems"))
}

fn c4_rent() -> Check {
    let start = Instant::now();
    let w = DMatrix::from_row_slice(
        4,
        4,
        &[0.5, 0.0, 0.3, 0.0, 0.6, 0.0, -0.3, -0.2, 0.4, 0.0, 0.3, 0.0, 0.5, 0.0, -0.3, -0.4],
    );
    let d = RentDiagnostics::from_weights(w, 0.975);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    ensure(d.c1 == [1.0, 0.0, 1.0, 0.5], || format!("c1 {:?}", d.c1))?;
    ensure(d.c2 == [1.0, 0.0, 0.0, 0.5], || format!("c2 {:?}", d.c2))?;
    // column 0: mean 0.5, sd sqrt(0.02/3); column 3: mean -0.15, sd sqrt(0.11/3)
    let t0 = 0.5 / ((0.02f64 / 3.0).sqrt() / 2.0);
    let t3 = -0.15 / ((0.11f64 / 3.0).sqrt() / 2.0);
    ensure(close(d.t_stat[0], t0) && close(d.t_stat[3], t3) && d.t_stat[1] == 0.0 && d.t_stat[2] == 0.0, || {
        format!("t {:?}", d.t_stat)
    })?;
    ensure((d.t_critical - 3.182446305284263).abs() < 1e-6, || format!("t critical {}", d.t_critical))?;
    ensure(d.c3_pass == [true, false, false, false], || format!("c3 {:?}", d.c3_pass))?;

    let spec = SynthSpec::simple(80, 30, &[1.0, 1.0, 0.8, 0.6], 1.0, 4);
    let ds = generate(&spec).map_err(|e| e.to_string())?;
    let cfg = RunConfig::default();
    let prep = prepare(&ds, &cfg).map_err(|e| e.to_string())?;
    let fold = &outer_folds(&prep, &cfg.preprocess).map_err(|e| e.to_string())?[0];
    let (x, y) = (&fold.out.train.values, fold.out.train.target_f64());
    let rc = RentConfig {
        models: 50,
        ..RentConfig::default()
    };
    let diag = rent_train(x, &y, &rc).map_err(|e| e.to_string())?;
    let taus = [0.0, 0.25, 0.5, 0.75, 1.0];
    let sel = |a: usize, b: usize| select_with_thresholds(&diag, taus[a], taus[b], true);
    for a in 0..5 {
        for b in 0..5 {
            let s = sel(a, b);
            if a + 1 < 5 {
                ensure(sel(a + 1, b).is_subset(&s), || format!("not monotone in tau1 at {a},{b}"))?;
            }
            if b + 1 < 5 {
                ensure(sel(a, b + 1).is_subset(&s), || format!("not monotone in tau2 at {a},{b}"))?;
            }
        }
    }
    let again = rent_train(x, &y, &rc).map_err(|e| e.to_string())?;
    ensure(again == diag, || "two runs with one seed differ".into())?;
    within(Duration::from_secs(30), start)?;
    Ok("hand table, 5x5 monotone grid, repeatable".into())
}

fn c5_ubayfs() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let n = rng.gen_range(2..=12);
        let max_s = rng.gen_range(1..=n.min(6));
        let counts: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=100)).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..120.0)).collect();
        let post = UBayPosterior::from_counts(counts, &weights, 100);
        let chosen = ubay_select(&post, &UBayConfig { max_s, ..UBayConfig::uniform(n) });
        let total = |s: &BTreeSet<usize>| s.iter().map(|&j| post.scores[j]).sum::<f64>();
        let mut best: (f64, BTreeSet<usize>) = (f64::NEG_INFINITY, BTreeSet::new());
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize <= max_s {
                let s: BTreeSet<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
                let t = total(&s);
                if t > best.0 {
                    best = (t, s);
                }
            }
        }
        ensure(chosen == best.1, || format!("case {case}: {chosen:?} vs brute force {:?}", best.1))?;
    }
    within(Duration::from_secs(30), start)?;
    Ok("100/100 instances agree with enumeration".into())
}

fn prior_config(models: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.ubayfs.models = models;
    cfg.experiment.max_s = 20;
    cfg.experiment.elevated = PRIOR_PROFILE_ELEVATED.iter().map(|s| s.to_string()).collect();
    cfg
}

fn prior_run(seed: u64) -> Result<ExperimentReport, String> {
    let ds = generate(&SynthSpec::prior_profile(seed)).map_err(|e| e.to_string())?;
    let cfg = prior_config(100);
    let prep = prepare(&ds, &cfg).map_err(|e| e.to_string())?;
    run_experiment2(&prep, &cfg).map_err(|e| e.to_string())
}

fn c6_dominance() -> Check {
    let r = prior_run(0)?;
    let last = r.configs.last().ok_or("no w settings")?;
    ensure(last.setting == 110.0, || format!("last w is {}", last.setting))?;
    let elevated: BTreeSet<&str> = PRIOR_PROFILE_ELEVATED.into_iter().collect();
    for f in &last.folds {
        ensure(f.selected.len() == 20, || format!("fold {} selected {}", f.fold, f.selected.len()))?;
        ensure(f.selected.iter().all(|s| elevated.contains(s.as_str())), || {
            format!("fold {} selected a non-elevated column", f.fold)
        })?;
        ensure(f.perc == Some(1.0), || format!("fold {} PERC {:?}", f.fold, f.perc))?;
    }
    Ok("5/5 folds inside the 22 elevated columns, PERC = 1".into())
}

fn stability_ok(r: &ExperimentReport) -> Result<(), String> {
    let s: Vec<f64> = r.configs.iter().map(|c| c.stability).collect();
    let (first, last) = (s[0], s[s.len() - 1]);
    ensure(last >= 0.95, || format!("stability at w=110 is {last:.3}"))?;
    ensure(last >= first, || format!("stability fell from {first:.3} to {last:.3}"))?;
    ensure(s.windows(2).all(|w| w[1] >= w[0] - 0.05), || format!("stability sequence {s:.3?}"))
}

fn c7_stability() -> Check {
    let mut lows = Vec::new();
    for seed in 0..10 {
        let r = prior_run(seed)?;
        stability_ok(&r).map_err(|e| format!("seed {seed}: {e}"))?;
        lows.push(r.configs.last().unwrap().stability);
    }
    let (lo, first) = (lows.iter().copied().fold(1.0, f64::min), prior_run(0)?.configs[0].stability);
    Ok(format!("w=110 stability >= {lo:.3} on 10 seeds (seed 0 rises from {first:.3})"))
}

fn c8_perc() -> Check {
    for seed in 0..10 {
        let r = prior_run(seed)?;
        let p: Vec<f64> = r.configs.iter().map(|c| c.perc.unwrap_or(0.0)).collect();
        ensure(p.windows(2).all(|w| w[1] >= w[0]), || format!("seed {seed}: PERC {p:.3?}"))?;
    }
    Ok("non-decreasing on 10/10 seeds".into())
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// P(X >= hits) for X hypergeometric: `draws` from `population` containing `good`.
fn hypergeometric_tail(population: u64, good: u64, draws: u64, hits: u64) -> f64 {
    let num: u128 = (hits..=draws.min(good))
        .map(|x| binomial(good, x) * binomial(population - good, draws - x))
        .sum();
    num as f64 / binomial(population, draws) as f64
}

fn c9_recovery() -> Check {
    let mut spec = SynthSpec::paper_profile(9);
    spec.m = 200;
    spec.missing_rate = 0.005;
    spec.planted = ["p_num01", "b_num01", "h_num01", "i_num01", "t_num01"]
        .iter()
        .enumerate()
        .map(|(i, f)| PlantedFeature {
            feature: f.to_string(),
            effect: 1.0,
            positive: i % 2 == 0,
        })
        .collect();
    let ds = generate(&spec).map_err(|e| e.to_string())?;
    let cfg = RunConfig::default();
    let prep = prepare(&ds, &cfg).map_err(|e| e.to_string())?;
    let folds = outer_folds(&prep, &cfg.preprocess).map_err(|e| e.to_string())?;
    let rc = RentConfig {
        net: ElasticNetConfig { c: 1.0, l1_ratio: 0.3 },
        ..RentConfig::default()
    };
    let mut good = BTreeMap::from([("rent", 0), ("ubayfs", 0)]);
    let mut worst_p: f64 = 0.0;
    for f in &folds {
        let train = &f.out.train;
        let y = train.target_f64();
        let rent = rent_select_capped(&train.values, &y, &rc, 10).map_err(|e| e.to_string())?;
        ensure(rent.feasible, || format!("fold {}: RENT picked {}", f.fold, rent.selected.len()))?;
        let uc = UBayConfig {
            max_s: 10,
            ..UBayConfig::uniform(train.n_cols())
        };
        let post = ubay_train(&train.values, &y, &uc).map_err(|e| e.to_string())?;
        for (name, set) in [("rent", rent.selected), ("ubayfs", ubay_select(&post, &uc))] {
            let names: Vec<&str> = set.iter().map(|&j| train.columns[j].name.as_str()).collect();
            let hits = (recovery(&spec, &names).1 * 5.0).round() as u64;
            if hits >= 4 {
                *good.get_mut(name).unwrap() += 1;
            }
            let p = hypergeometric_tail(train.n_cols() as u64, 5, names.len() as u64, hits);
            worst_p = worst_p.max(p);
            ensure(p < 0.01, || format!("fold {} {name}: {hits}/5 with {} picks, p = {p:.3}", f.fold, names.len()))?;
        }
    }
    ensure(good.values().all(|&g| g >= 4), || format!("folds with >= 4/5 recovered: {good:?}"))?;
    Ok(format!(
        "folds with >= 4/5 planted: rent {}, ubayfs {}; worst hypergeometric p = {worst_p:.1e}",
        good["rent"], good["ubayfs"]
    ))
}

fn c10_metrics() -> Check {
    let s: BTreeSet<usize> = [1, 4, 7].into();
    let st = stability(&[s.clone(), s.clone(), s.clone(), s.clone(), s], 20).map_err(|e| e.to_string())?;
    ensure(st.value == 1.0, || format!("stability of identical sets {}", st.value))?;

    let x = DMatrix::from_fn(6, 3, |i, j| match j {
        0 => i as f64,
        1 => 3.0 - 2.0 * i as f64,
        _ => ((i * 7) % 5) as f64,
    });
    let pair = redundancy_rate(&x, &[0, 1].into()).map_err(|e| e.to_string())?.value;
    ensure((pair - 1.0).abs() < 1e-12, || format!("RED of correlated pair {pair}"))?;
    let single = redundancy_rate(&x, &[2].into()).map_err(|e| e.to_string())?.value;
    ensure(single == 0.0, || format!("RED of one column {single}"))?;

    let elevated: BTreeSet<usize> = (0..22).collect();
    let sel: BTreeSet<usize> = [0, 5, 9, 30, 31, 32, 33, 34, 35, 36].into();
    let p = perc(&sel, &elevated).map_err(|e| e.to_string())?;
    ensure((p - 0.30).abs() < 1e-12, || format!("PERC 3 of 10 = {p}"))?;
    let p = perc(&[40, 41].into(), &elevated).map_err(|e| e.to_string())?;
    ensure(p == 0.0, || format!("PERC none = {p}"))?;
    let p = perc(&[1, 2, 3].into(), &elevated).map_err(|e| e.to_string())?;
    ensure(p == 1.0, || format!("PERC all = {p}"))?;

    let v = |xs: &[f64]| DVector::from_column_slice(xs);
    let cases = [
        (v(&[1.0, 2.0, 3.0]), v(&[1.0, 2.0, 3.0]), 0.0),
        (v(&[0.0, 0.0]), v(&[3.0, 4.0]), 12.5f64.sqrt()),
        (v(&[1.0, 2.0, 3.0, 4.0]), v(&[2.0, 2.0, 2.0, 2.0]), 1.5f64.sqrt()),
        (v(&[6.0]), v(&[1.0]), 5.0),
    ];
    for (y, yhat, want) in cases {
        let got = rmse(&y, &yhat).map_err(|e| e.to_string())?;
        ensure((got - want).abs() < 1e-12, || format!("RMSE {got} vs {want}"))?;
    }
    Ok("stability, RED, PERC and RMSE worked examples".into())
}

fn ensfs(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ensfs"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("ensfs {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn violations(path: &Path) -> Result<usize, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix("violations: "))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| format!("unreadable {}", path.display()))
}

fn c11_leakage_and_runtime() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let elevated = PRIOR_PROFILE_ELEVATED.join(",");
    let start = Instant::now();
    ensfs(d, &["synth", "--profile", "paper"])?;
    ensfs(d, &["exp1", "--leakage-check"])?;
    ensfs(d, &["exp2", "--leakage-check", "--elevated", &elevated])?;
    let took = start.elapsed();
    let v1 = violations(&d.join("out/exp1/leakage.txt"))?;
    let v2 = violations(&d.join("out/exp2/leakage.txt"))?;
    ensure(v1 + v2 == 0, || format!("{v1} + {v2} leakage violations"))?;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    ensure(took < Duration::from_secs(15 * 60), || format!("full protocol took {took:.0?} on {cores} cores"))?;
    Ok(format!("0 violations; 63x134, M=100, 5 folds, full grid in {took:.0?} on {cores} core(s)"))
}

fn tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).map_err(|e| e.to_string())?;
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), bytes);
            }
        }
    }
    Ok(out)
}

const SMALL_GRID: &str = "[grid]\nc = [1.0, 100.0]\nl1 = [0.3, 1.0]\n\n[rent]\nmodels = 20\n\n[ubayfs]\nmodels = 20\n";

fn c12_determinism() -> Check {
    let elevated = PRIOR_PROFILE_ELEVATED.join(",");
    let mut trees = Vec::new();
    for jobs in ["1", "8", "1"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = dir.path();
        fs::write(d.join("run.toml"), SMALL_GRID).map_err(|e| e.to_string())?;
        ensfs(d, &["synth", "--profile", "prior"])?;
        let common = ["--config", "run.toml", "--jobs", jobs, "--leakage-check", "--curves"];
        ensfs(d, &[&["exp1"], &common[..]].concat())?;
        ensfs(d, &[&["exp2", "--elevated", &elevated], &common[..]].concat())?;
        trees.push(tree(&d.join("out"))?);
    }
    let files = trees[0].len();
    ensure(files >= 18, || format!("only {files} report files"))?;
    for (i, t) in trees.iter().enumerate().skip(1) {
        let keys: Vec<_> = t.keys().collect();
        ensure(keys == trees[0].keys().collect::<Vec<_>>(), || format!("run {i} wrote different files"))?;
        if let Some((p, _)) = t.iter().find(|(p, b)| trees[0][*p] != **b) {
            return Err(format!("run {i} differs in {}", p.display()));
        }
    }
    Ok(format!("{files} files byte-identical across --jobs 1, 8, 1 (M=20, 2x2x21x21 grid)"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check); 12] = [
        (1, "encoding tables", c1_encoding),
        (2, "Yeo-Johnson", c2_yeo_johnson),
        (3, "elastic-net solver", c3_elastic_net),
        (4, "RENT criteria", c4_rent),
        (5, "UBayFS MAP", c5_ubayfs),
        (6, "w=110 dominance", c6_dominance),
        (7, "stability rises with w", c7_stability),
        (8, "PERC monotone in w", c8_perc),
        (9, "planted recovery", c9_recovery),
        (10, "metric examples", c10_metrics),
        (11, "leakage guard and runtime", c11_leakage_and_runtime),
        (12, "determinism", c12_determinism),
    ];
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted: BTreeSet<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    if !args.is_empty() && wanted.is_empty() {
        return;
    }
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
