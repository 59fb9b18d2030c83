use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use enn::net::in_sieve;
use enn_cli::model::ModelFile;
use serde_json::Value;

fn enn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enn")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// `x1,x2,y` with y = x1 - x2 + small deterministic wiggle.
fn write_csv(path: &Path, n: usize) {
    let mut text = String::from("x1,x2,y\n");
    for i in 0..n {
        let a = (i as f64 * 0.618_033_988_7).fract();
        let b = (i as f64 * 0.414_213_562_3).fract();
        let y = a - b + 0.05 * (i as f64 * 1.7).sin();
        text.push_str(&format!("{a},{b},{y}\n"));
    }
    fs::write(path, text).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn quick_train<'a>(data: &'a str, out: &'a str) -> Vec<&'a str> {
    vec!["train", "--data", data, "--out", out, "--max-iters", "100", "--restarts", "2"]
}

#[test]
fn train_writes_a_feasible_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    write_csv(&data, 120);
    let out = dir.path().join("out");
    let mut args = quick_train(s(&data), s(&out));
    args.extend(["--tau", "0.5", "--r", "4"]);
    let res = enn(&args);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let model = ModelFile::load(&out.join("model.json")).unwrap();
    assert_eq!(model.params.width(), 4);
    assert_eq!(model.sieve.d, 2);
    assert!(in_sieve(&model.params, &model.sieve));
    let printed: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(printed["risk"].as_f64().unwrap(), model.risk);
}

#[test]
fn several_taus_write_suffixed_models() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    write_csv(&data, 60);
    let out = dir.path().join("out");
    let mut args = quick_train(s(&data), s(&out));
    args.extend(["--tau", "0.5", "--tau", "0.9", "--r", "2"]);
    let res = enn(&args);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let lo = ModelFile::load(&out.join("model_tau0.5.json")).unwrap();
    let hi = ModelFile::load(&out.join("model_tau0.9.json")).unwrap();
    assert_eq!((lo.tau.value(), hi.tau.value()), (0.5, 0.9));
    assert!(!out.join("model.json").exists());
}

#[test]
fn predictions_round_trip_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    write_csv(&data, 200);
    let out = dir.path().join("fit");
    let mut args = quick_train(s(&data), s(&out));
    args.extend(["--tau", "0.7", "--r", "3"]);
    assert_eq!(code(&enn(&args)), 0);

    let again = dir.path().join("again");
    let res = enn(&["predict", "--model", s(&out.join("model.json")), "--data", s(&data), "--out", s(&again)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let fitted = fs::read_to_string(out.join("predictions.csv")).unwrap();
    let reloaded = fs::read_to_string(again.join("predictions.csv")).unwrap();
    assert_eq!(fitted, reloaded);
    let bits = |t: &str| t.lines().skip(1).map(|l| l.parse::<f64>().unwrap().to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&fitted).len(), 200);
    assert_eq!(bits(&fitted), bits(&reloaded));

    let model = ModelFile::load(&out.join("model.json")).unwrap();
    let printed: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(printed["risk"].as_f64().unwrap().to_bits(), model.risk.to_bits());
}

#[test]
fn malformed_row_cites_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    let mut text = String::from("x1,x2,y\n");
    for i in 0..10 {
        text.push_str(if i == 5 { "0.1,abc,0.3\n" } else { "0.1,0.2,0.3\n" });
    }
    fs::write(&data, text).unwrap();
    let res = enn(&["train", "--data", s(&data), "--out", s(dir.path())]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("line 7"), "{}", stderr(&res));
}

#[test]
fn infeasible_sieve_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    write_csv(&data, 20);
    let res = enn(&["train", "--data", s(&data), "--out", s(dir.path()), "--v", "3"]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("V"), "{}", stderr(&res));
}

#[test]
fn missing_data_file_is_a_config_error() {
    let res = enn(&["train", "--data", "/definitely/not/here.csv"]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("does not exist"));
}

#[test]
fn overflowing_data_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("huge.csv");
    fs::write(&data, "x1,y\n0.1,1e300\n0.5,-1e300\n0.9,1e300\n").unwrap();
    let res = enn(&["train", "--data", s(&data), "--out", s(dir.path()), "--restarts", "1"]);
    assert_eq!(code(&res), 3, "{}", stderr(&res));
}

#[test]
fn config_keys_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    write_csv(&dir.path().join("train.csv"), 50);
    let cfg = dir.path().join("train.toml");
    fs::write(
        &cfg,
        "data = \"train.csv\"\nout = \"from_config\"\ntaus = [0.9]\n[sieve]\nr = 2\n[train]\nmax_iters = 30\n",
    )
    .unwrap();
    let res = enn(&["train", "--config", s(&cfg)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let model = ModelFile::load(&dir.path().join("from_config/model.json")).unwrap();
    assert_eq!((model.params.width(), model.tau.value()), (2, 0.9));

    let out = dir.path().join("from_flags");
    let res = enn(&["train", "--config", s(&cfg), "--r", "3", "--tau", "0.25", "--out", s(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let model = ModelFile::load(&out.join("model.json")).unwrap();
    assert_eq!((model.params.width(), model.tau.value()), (3, 0.25));
}

#[test]
fn bounds_worked_example() {
    let res = enn(&[
        "bounds", "--eps", "1", "--r", "1", "--d", "1", "--v", "8", "--n", "1000", "--b", "3", "--tau", "0.9",
        "--sigma2", "1",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!((v["log_covering"].as_f64().unwrap() - 25.03).abs() < 0.01);
    assert_eq!(v["deviation"].as_f64().unwrap(), 1.0);
    assert_eq!(v["vacuous"], Value::Bool(true));
    assert!((v["thresholds"][0]["threshold"].as_f64().unwrap() - 2.8284).abs() < 1e-4);
    // p = 4 parameters at n = 1000.
    assert!((v["growth_ratio"].as_f64().unwrap() - 4.0 * 4f64.ln() / 1000.0).abs() < 1e-15);
}

#[test]
fn bounds_reject_small_output_budget() {
    let res = enn(&["bounds", "--eps", "1", "--r", "1", "--v", "4", "--n", "1000", "--b", "3"]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("covering bound undefined for V <= 4"));
}

fn small_experiment(dir: &Path, ceiling: &str) -> PathBuf {
    let cfg = dir.join("approx.toml");
    let text = format!(
        "experiment = \"approximation\"\nseed = 11\nr_grid = [1, 2]\nn_train = 60\nreplications = 2\n\
         oracle_size = 2000\nceiling = {ceiling}\n[target]\nkind = \"sine\"\namplitude = 1.0\nfrequency = 1.0\n\
         [train]\nmax_iters = 40\nrestarts = 2\n"
    );
    fs::write(&cfg, text).unwrap();
    cfg
}

fn validator() -> jsonschema::Validator {
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(workspace().join("docs/report.schema.json")).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn experiment_reports_are_reproducible_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_experiment(dir.path(), "1.0");
    let runs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|n| dir.path().join(n)).collect();
    assert_eq!(code(&enn(&["experiment", "--config", s(&cfg), "--out", s(&runs[0])])), 0);
    assert_eq!(code(&enn(&["experiment", "--config", s(&cfg), "--out", s(&runs[1])])), 0);
    assert_eq!(code(&enn(&["experiment", "--config", s(&cfg), "--out", s(&runs[2]), "--sequential"])), 0);
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    for other in &runs[1..] {
        assert_eq!(read(&runs[0], "report.json"), read(other, "report.json"));
        assert_eq!(read(&runs[0], "raw.csv"), read(other, "raw.csv"));
    }
    let report: Value = serde_json::from_slice(&read(&runs[0], "report.json")).unwrap();
    assert_eq!(report["seed"], 11);
    assert!(validator().is_valid(&report));

    let reseeded = dir.path().join("d");
    assert_eq!(code(&enn(&["experiment", "--config", s(&cfg), "--out", s(&reseeded), "--seed", "12"])), 0);
    assert_ne!(read(&runs[0], "report.json"), read(&reseeded, "report.json"));
}

#[test]
fn threshold_failure_exits_one_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_experiment(dir.path(), "1e-12");
    let out = dir.path().join("out");
    let res = enn(&["experiment", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&res), 1);
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], Value::Bool(false));
    assert!(validator().is_valid(&report));
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    assert!(
        !v.is_valid(&serde_json::json!({ "experiment": "ulln", "seed": 1, "pass": true, "cells": [] , "checks": []}))
    );
    assert!(
        !v.is_valid(&serde_json::json!({ "experiment": "other", "seed": 1, "pass": true, "cells": [], "checks": [] }))
    );
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("x.toml");
    fs::write(&cfg, "experiment = \"bootstrap\"\n").unwrap();
    let res = enn(&["experiment", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("bootstrap"), "{}", stderr(&res));
}

#[test]
fn degenerate_normality_cell_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(workspace().join("configs/normality.toml"))
        .unwrap()
        .replace("kind = \"linear\"\na = [1.0]\nb = 0.0", "kind = \"constant\"\nc = 2.0");
    assert!(text.contains("constant"));
    let cfg = dir.path().join("flat.toml");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let res = enn(&["experiment", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("degenerate"), "{}", stderr(&res));
    assert!(!out.join("report.json").exists());
}

#[test]
fn shipped_normality_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace().join("configs/normality.toml");
    let res = enn(&["experiment", "--config", s(&cfg), "--out", s(dir.path()), "--seed", "20240611"]);
    assert_eq!(code(&res), 0, "{}{}", String::from_utf8_lossy(&res.stdout), stderr(&res));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["cells"][0]["aggregates"]["ks"].as_f64().unwrap() < 0.0729);
    assert!(validator().is_valid(&report));
}
