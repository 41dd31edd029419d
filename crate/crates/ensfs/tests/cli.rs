use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ensfs_core::synth::PRIOR_PROFILE_ELEVATED;

const SMALL: &str = "[grid]\nc = [1.0, 100.0]\nl1 = [0.3, 1.0]\n\n[rent]\nmodels = 10\n\n[ubayfs]\nmodels = 10\n";

fn ensfs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ensfs"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ensfs(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn files_under(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn synth_writes_exactly_two_files_and_creates_directories() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--data", "a/b/data.csv", "--metadata", "c/meta.toml"]);
    assert_eq!(files_under(dir.path()), ["a/b/data.csv", "c/meta.toml"]);
    let header = fs::read_to_string(dir.path().join("a/b/data.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap().split(',').count(), 137);
    assert_eq!(header.lines().count(), 67);
}

#[test]
fn usage_and_config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ensfs(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(ensfs(d, &["exp1", "--jobs", "many"]).status.code(), Some(2));

    fs::write(d.join("bad.toml"), "[folds]\nk = \"five\"\n").unwrap();
    let out = ensfs(d, &["exp1", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(d.join("unknown.toml"), "[grid]\nsizes = [1]\n").unwrap();
    assert_eq!(ensfs(d, &["prestudy", "--config", "unknown.toml"]).status.code(), Some(2));

    fs::write(d.join("range.toml"), "[grid]\ntau1 = [1.5]\n").unwrap();
    assert_eq!(ensfs(d, &["prestudy", "--config", "range.toml"]).status.code(), Some(2));

    assert_eq!(ensfs(d, &["exp1", "--config", "missing.toml"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ensfs(d, &["preprocess"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file not found"));

    ok(d, &["synth"]);
    let data = fs::read_to_string(d.join("data.csv")).unwrap();
    let mut lines: Vec<String> = data.lines().map(str::to_string).collect();
    lines[1] = lines[1].replacen(',', ",not-a-number,", 1);
    fs::write(d.join("data.csv"), lines.join("\n")).unwrap();
    assert_eq!(ensfs(d, &["preprocess"]).status.code(), Some(1));
}

#[test]
fn unknown_elevated_feature_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth"]);
    fs::write(d.join("run.toml"), SMALL).unwrap();
    let out = ensfs(d, &["exp2", "--config", "run.toml", "--elevated", "p_num01,nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));
}

#[test]
fn preprocess_reports_paper_shape() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth"]);
    let stdout = ok(d, &["preprocess"]);
    assert!(stdout.contains("raw 66x135 -> encoded 63x134"), "{stdout}");
    let encoded = fs::read_to_string(d.join("out/preprocess/encoded.csv")).unwrap();
    assert_eq!(encoded.lines().count(), 64);
    assert!(d.join("out/preprocess/transform_params.toml").exists());
}

#[test]
fn experiments_write_one_row_per_setting() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--profile", "prior"]);
    fs::write(d.join("run.toml"), SMALL).unwrap();
    ok(d, &["exp1", "--config", "run.toml", "--max-s-values", "5,10,20"]);
    let exp1 = csv_rows(&d.join("out/exp1/metrics.csv"));
    assert_eq!(exp1.len(), 6);
    let hyper = csv_rows(&d.join("out/exp1/hyperparameters.csv"));
    assert_eq!(hyper.len(), 15);

    let elevated = PRIOR_PROFILE_ELEVATED.join(",");
    ok(d, &["exp2", "--config", "run.toml", "--elevated", &elevated]);
    let exp2 = csv_rows(&d.join("out/exp2/metrics.csv"));
    assert_eq!(exp2.len(), 12);
    assert_eq!(&exp2[0][1], "0.1");
    assert_eq!(&exp2[11][1], "110");
    assert_eq!(&exp2[11][8], "1.000000");

    let uniform = exp1.iter().find(|r| &r[0] == "ubayfs" && &r[1] == "20").unwrap();
    assert_eq!(
        exp2[0].iter().skip(2).take(6).collect::<Vec<_>>(),
        uniform.iter().skip(2).take(6).collect::<Vec<_>>()
    );

    let echo = fs::read_to_string(d.join("out/exp2/config_echo.toml")).unwrap();
    assert!(echo.contains("models = 10"));
    assert!(!echo.contains("jobs"));
}
