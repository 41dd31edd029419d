//! Report files written under `<output>/<experiment>/`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::RunConfig;
use crate::error::{EnsfsError, Result};
use crate::harness::{residual_report, Choice, ExperimentReport};
use crate::io::write_text;

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| EnsfsError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn setting(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

pub fn selection_frequencies_csv(r: &ExperimentReport) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.configs {
        let mut freq = c.frequencies();
        freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for (name, n, sign) in freq {
            rows.push(vec![
                c.selector.as_str().into(),
                setting(c.setting),
                name,
                n.to_string(),
                sign.symbol().into(),
            ]);
        }
    }
    csv_text(&["selector", &r.setting_name, "feature", "frequency", "sign"], rows)
}

pub fn metrics_csv(r: &ExperimentReport) -> Result<String> {
    let rows = r
        .configs
        .iter()
        .map(|c| {
            let (lm, ls) = c.rmse_linear();
            let (km, ks) = c.rmse_knn();
            vec![
                c.selector.as_str().into(),
                setting(c.setting),
                f6(lm),
                f6(ls),
                f6(km),
                f6(ks),
                f6(c.stability),
                f6(c.redundancy),
                opt(c.perc),
                f6(c.mean_size()),
            ]
        })
        .collect();
    csv_text(
        &[
            "selector",
            &r.setting_name,
            "rmse_linear_mean",
            "rmse_linear_sd",
            "rmse_knn_mean",
            "rmse_knn_sd",
            "stability",
            "redundancy",
            "perc",
            "mean_size",
        ],
        rows,
    )
}

pub fn fold_metrics_csv(r: &ExperimentReport) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.configs {
        for f in &c.folds {
            let mut row = vec![
                c.selector.as_str().into(),
                setting(c.setting),
                f.fold.to_string(),
                f.selected.len().to_string(),
                f6(f.rmse_linear),
                f6(f.rmse_knn),
                f6(f.redundancy),
                opt(f.perc),
                f.within_cap.to_string(),
            ];
            match &f.choice {
                Some(ch) => row.extend([setting(ch.point.c), setting(ch.point.l1), setting(ch.point.tau1), setting(ch.point.tau2)]),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            rows.push(row);
        }
    }
    csv_text(
        &[
            "selector",
            &r.setting_name,
            "fold",
            "size",
            "rmse_linear",
            "rmse_knn",
            "redundancy",
            "perc",
            "within_cap",
            "c",
            "l1",
            "tau1",
            "tau2",
        ],
        rows,
    )
}

pub fn selections_csv(r: &ExperimentReport) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.configs {
        for f in &c.folds {
            for (name, coef) in f.selected.iter().zip(&f.coefficients) {
                rows.push(vec![
                    c.selector.as_str().into(),
                    setting(c.setting),
                    f.fold.to_string(),
                    name.clone(),
                    f6(*coef),
                ]);
            }
        }
    }
    csv_text(&["selector", &r.setting_name, "fold", "feature", "coefficient"], rows)
}

pub fn residuals_csv(r: &ExperimentReport, threshold: f64) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.configs {
        for f in &c.folds {
            let y: Vec<f64> = f.predictions.iter().map(|p| p.target).collect();
            for (model, yhat) in [
                ("linear", f.predictions.iter().map(|p| p.linear).collect::<Vec<_>>()),
                ("knn", f.predictions.iter().map(|p| p.knn).collect()),
            ] {
                let rep = residual_report(&y, &yhat, threshold)?;
                for (i, p) in f.predictions.iter().enumerate() {
                    rows.push(vec![
                        c.selector.as_str().into(),
                        setting(c.setting),
                        f.fold.to_string(),
                        p.row.to_string(),
                        model.into(),
                        setting(p.target),
                        f6(yhat[i]),
                        f6(rep.residuals[i]),
                        rep.outliers.contains(&i).to_string(),
                    ]);
                }
            }
        }
    }
    csv_text(
        &["selector", &r.setting_name, "fold", "row", "model", "target", "prediction", "residual", "outlier"],
        rows,
    )
}

pub fn hyperparameters_csv(choices: &[Choice]) -> Result<String> {
    let rows = choices
        .iter()
        .map(|c| {
            vec![
                c.fold.to_string(),
                c.max_s.to_string(),
                setting(c.point.c),
                setting(c.point.l1),
                setting(c.point.tau1),
                setting(c.point.tau2),
                setting(c.tau3),
                f6(c.inner_rmse),
                c.inner_max_size.to_string(),
                c.feasible.to_string(),
            ]
        })
        .collect();
    csv_text(
        &["fold", "max_s", "c", "l1", "tau1", "tau2", "tau3", "inner_rmse", "inner_max_size", "feasible"],
        rows,
    )
}

pub fn curves_json(r: &ExperimentReport) -> String {
    let mut curves = serde_json::Map::new();
    let metrics: [(&str, fn(&crate::harness::ConfigOutcome) -> Option<f64>); 6] = [
        ("rmse_linear", |c| Some(c.rmse_linear().0)),
        ("rmse_knn", |c| Some(c.rmse_knn().0)),
        ("stability", |c| Some(c.stability)),
        ("redundancy", |c| Some(c.redundancy)),
        ("perc", |c| c.perc),
        ("mean_size", |c| Some(c.mean_size())),
    ];
    for (metric, get) in metrics {
        let mut per_selector = serde_json::Map::new();
        for c in &r.configs {
            let series = per_selector
                .entry(c.selector.as_str())
                .or_insert_with(|| json!([]))
                .as_array_mut()
                .expect("series is an array");
            series.push(json!([c.setting, get(c)]));
        }
        curves.insert(metric.into(), serde_json::Value::Object(per_selector));
    }
    let doc = json!({ "experiment": r.experiment, "x": r.setting_name, "curves": curves });
    serde_json::to_string_pretty(&doc).expect("json serializes") + "\n"
}

/// One-screen text summary.
pub fn summary(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({} settings, {} encoded columns seen)", r.experiment, r.configs.len(), r.universe.len());
    for c in &r.configs {
        let (lm, _) = c.rmse_linear();
        let (km, _) = c.rmse_knn();
        let per_fold: Vec<String> = c.folds.iter().map(|f| format!("{:.3}", f.rmse_knn)).collect();
        let _ = writeln!(
            s,
            "{:<7} {}={:<5} rmse lin {:.3} knn {:.3} [{}] stab {:.3} red {:.3} perc {}",
            c.selector.as_str(),
            r.setting_name,
            setting(c.setting),
            lm,
            km,
            per_fold.join(" "),
            c.stability,
            c.redundancy,
            c.perc.map(|p| format!("{p:.3}")).unwrap_or_else(|| "-".into()),
        );
    }
    if r.leakage_checked {
        let _ = writeln!(s, "leakage check: {} violations", r.leakage.len());
    }
    s
}

/// Writes every report file and returns the experiment directory.
pub fn write_report(r: &ExperimentReport, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.paths.output.join(&r.experiment);
    let put = |name: &str, text: &str| write_text(&dir.join(name), text);
    put("selection_frequencies.csv", &selection_frequencies_csv(r)?)?;
    put("metrics.csv", &metrics_csv(r)?)?;
    put("fold_metrics.csv", &fold_metrics_csv(r)?)?;
    put("selections.csv", &selections_csv(r)?)?;
    put("residuals.csv", &residuals_csv(r, cfg.experiment.outlier_threshold)?)?;
    if !r.prestudy.is_empty() {
        put("hyperparameters.csv", &hyperparameters_csv(&r.prestudy)?)?;
    }
    if r.leakage_checked {
        let mut text = format!("violations: {}\n", r.leakage.len());
        for v in &r.leakage {
            text.push_str(v);
            text.push('\n');
        }
        put("leakage.txt", &text)?;
    }
    if cfg.experiment.curves {
        put("curves.json", &curves_json(r))?;
    }
    put("summary.txt", &summary(r))?;
    write_config_echo(&dir, cfg)?;
    Ok(dir)
}

pub fn write_config_echo(dir: &Path, cfg: &RunConfig) -> Result<()> {
    write_text(&dir.join("config_echo.toml"), &cfg.to_toml())
}
