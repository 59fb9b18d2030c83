use std::path::{Path, PathBuf};

use enn::bounds::{
    default_budgets, deviation_bound_detail, growth_condition_ratio, identifiability_threshold, log_covering_bound,
    param_count, BoundInputs, GrowthRule, GrowthSchedule,
};
use enn::lab::ExperimentConfig;
use enn::net::predict;
use enn::train::fit;
use enn::{Dataset, EnnError, Execution, SieveSpec, Tau};
use serde_json::json;

use crate::args::{BoundsArgs, ExperimentArgs, PredictArgs, SieveArgs, TrainArgs};
use crate::config::{self, BoundsFile, PartialSieve, PredictFile, TrainFile};
use crate::error::{CliError, Result};
use crate::model::{model_file_name, predictions_file_name, ModelFile};
use crate::table::{read_table, write_predictions};

fn taus(flags: &[f64], file: Option<Vec<Tau>>) -> Result<Vec<Tau>> {
    let taus = if flags.is_empty() {
        file.unwrap_or_else(|| vec![Tau::new(0.5).unwrap()])
    } else {
        flags.iter().map(|&t| Tau::new(t)).collect::<enn::Result<_>>()?
    };
    if taus.is_empty() {
        return Err(CliError::usage("at least one tau is required"));
    }
    for (i, t) in taus.iter().enumerate() {
        if taus[..i].contains(t) {
            return Err(CliError::usage(format!("tau {} given twice", t.value())));
        }
    }
    Ok(taus)
}

/// Flags over file over defaults; width defaults to `ceil(n^(1/4))`, budgets to
/// the default schedule for that width.
fn sieve(flags: &SieveArgs, file: &PartialSieve, n: u64, d: usize) -> Result<SieveSpec> {
    let r = flags.r.or(file.r).unwrap_or_else(|| GrowthSchedule::power(0.25, d).width(n));
    let (v0, m0) = default_budgets(r);
    let v = flags.v.or(file.v).unwrap_or(v0);
    let m = flags.m.or(file.m).unwrap_or(m0);
    Ok(SieveSpec::new(r, v, m, d)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn train(args: &TrainArgs) -> Result<u8> {
    let cfg_path = args.config.as_deref();
    let file: TrainFile = config::load(cfg_path)?;
    let data_path = args
        .data
        .clone()
        .or_else(|| file.data.clone().map(|p| config::resolve(cfg_path, p)))
        .ok_or_else(|| CliError::usage("training data is required (--data or `data` in the config)"))?;
    let data_path = config::existing(data_path, "data file")?;
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone().map(|p| config::resolve(cfg_path, p)))
        .unwrap_or_else(|| ".".into());
    let taus = taus(&args.taus, file.taus.clone())?;

    let mut train = file.train.unwrap_or_default();
    if let Some(s) = args.seed.or(file.seed) {
        train.seed = s;
    }
    train.step_size = args.step_size.unwrap_or(train.step_size);
    train.max_iters = args.max_iters.unwrap_or(train.max_iters);
    train.grad_tol = args.grad_tol.unwrap_or(train.grad_tol);
    train.restarts = args.restarts.unwrap_or(train.restarts);
    if args.no_momentum {
        train.momentum = false;
    }
    if args.sequential {
        train.execution = Execution::Sequential;
    }
    train.validate()?;

    let table = read_table(&data_path)?;
    let y = table.y.clone().ok_or_else(|| CliError::parse(&data_path, "training data needs a final y column"))?;
    let data = Dataset::new(table.x.clone(), table.d, y)?;
    let sieve = sieve(&args.sieve, &file.sieve, data.n() as u64, data.d())?;

    create_dir(&out)?;
    let many = taus.len() > 1;
    for &tau in &taus {
        let fitted = fit(&data, tau, &sieve, &train)?;
        let model_path = out.join(model_file_name(tau, many));
        let preds_path = out.join(predictions_file_name(tau, many));
        write_predictions(&preds_path, &predict(&fitted.params, &data)?)?;
        ModelFile { tau, sieve, params: fitted.params, risk: fitted.risk }.save(&model_path)?;
        println!(
            "{}",
            json!({
                "tau": tau.value(),
                "risk": fitted.risk,
                "iterations": fitted.iterations,
                "converged": fitted.converged,
                "restart": fitted.restart_index,
                "model": model_path,
                "predictions": preds_path,
            })
        );
    }
    Ok(0)
}

pub fn predict_cmd(args: &PredictArgs) -> Result<u8> {
    let cfg_path = args.config.as_deref();
    let file: PredictFile = config::load(cfg_path)?;
    let pick = |flag: &Option<PathBuf>, key: &Option<PathBuf>, what: &str| -> Result<PathBuf> {
        let p = flag
            .clone()
            .or_else(|| key.clone().map(|p| config::resolve(cfg_path, p)))
            .ok_or_else(|| CliError::usage(format!("{what} is required")))?;
        config::existing(p, what)
    };
    let model_path = pick(&args.model, &file.model, "model file")?;
    let data_path = pick(&args.data, &file.data, "data file")?;
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone().map(|p| config::resolve(cfg_path, p)))
        .unwrap_or_else(|| ".".into());

    let model = ModelFile::load(&model_path)?;
    let table = read_table(&data_path)?;
    if table.d != model.sieve.d {
        return Err(CliError::usage(format!(
            "model expects {} inputs but {} has {}",
            model.sieve.d,
            data_path.display(),
            table.d
        )));
    }
    let n = table.n();
    let y = table.y.clone().unwrap_or_else(|| vec![0.0; n]);
    let data = Dataset::new(table.x, table.d, y)?;
    let preds = predict(&model.params, &data)?;
    create_dir(&out)?;
    let path = out.join("predictions.csv");
    write_predictions(&path, &preds)?;
    let risk = match table.y {
        Some(_) => json!(enn::net::empirical_risk(model.tau, &model.params, &data)?),
        None => json!(null),
    };
    println!("{}", json!({ "n": n, "tau": model.tau.value(), "risk": risk, "predictions": path }));
    Ok(0)
}

pub fn bounds(args: &BoundsArgs) -> Result<u8> {
    let file: BoundsFile = config::load(args.config.as_deref())?;
    let need = |v: Option<f64>, what: &str| v.ok_or_else(|| CliError::usage(format!("--{what} is required")));
    let eps = need(args.eps.or(file.eps), "eps")?;
    let b = need(args.b.or(file.b), "b")?;
    let n = args.n.or(file.n).ok_or_else(|| CliError::usage("--n is required"))?;
    let d = args.d.or(file.d).unwrap_or(1);
    let sieve_flags = SieveArgs { r: args.sieve.r.or(file.sieve.r).or(Some(1)), ..args.sieve.clone() };
    let sieve = sieve(&sieve_flags, &file.sieve, n, d)?;
    let sigma2 = args.sigma2.or(file.sigma2).unwrap_or(1.0);
    let taus = taus(&args.taus, file.taus)?;

    let log_cover = log_covering_bound(eps, &sieve)?;
    let inputs =
        BoundInputs { transfer: file.transfer.map(|[m1, m2]| (m1, m2)), ..BoundInputs::new(eps, n, b, sieve)? };
    let dev = deviation_bound_detail(&inputs)?;
    let growth = growth_condition_ratio(&GrowthSchedule { rule: GrowthRule::Constant { r: sieve.r }, d }, n)?;
    let thresholds = taus
        .iter()
        .map(|&t| Ok(json!({ "tau": t.value(), "threshold": identifiability_threshold(t, sigma2)? })))
        .collect::<std::result::Result<Vec<_>, EnnError>>()?;
    let report = json!({
        "eps": eps,
        "n": n,
        "b": b,
        "sieve": sieve,
        "param_count": param_count(sieve.r, d),
        "log_covering": log_cover,
        "deviation": dev.value,
        "log_deviation": dev.log_value,
        "vacuous": dev.vacuous,
        "growth_ratio": growth,
        "sigma2": sigma2,
        "thresholds": thresholds,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("bounds serialize"));
    Ok(0)
}

fn override_taus(cfg: &mut ExperimentConfig, taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Ok(());
    }
    let taus = self::taus(taus, None)?;
    let single = |name: &str| -> Result<Tau> {
        match taus.as_slice() {
            [t] => Ok(*t),
            _ => Err(CliError::usage(format!("the {name} experiment takes a single tau"))),
        }
    };
    match cfg {
        ExperimentConfig::Ulln(c) => c.tau = single("ulln")?,
        ExperimentConfig::Consistency(c) => c.taus = taus,
        ExperimentConfig::Approximation(c) => c.tau = single("approximation")?,
        ExperimentConfig::Normality(c) => c.tau = single("normality")?,
    }
    Ok(())
}

pub fn experiment(args: &ExperimentArgs) -> Result<u8> {
    let path = config::existing(args.config.clone(), "config file")?;
    let text = config::read_text(&path)?;
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| CliError::parse(&path, e.to_string().trim_end()))?;
    let bad = |key: &str, want: &str| CliError::parse(&path, format!("`{key}` must be {want}"));

    let file_seed = match table.remove("seed") {
        None => None,
        Some(v) => Some(
            v.as_integer().and_then(|i| u64::try_from(i).ok()).ok_or_else(|| bad("seed", "a nonnegative integer"))?,
        ),
    };
    let file_out = match table.remove("out") {
        None => None,
        Some(v) => Some(config::resolve(Some(&path), v.as_str().ok_or_else(|| bad("out", "a path"))?.into())),
    };
    let mut exec = match table.remove("execution") {
        None => Execution::default(),
        Some(v) => v.try_into().map_err(|_| bad("execution", "\"parallel\" or \"sequential\""))?,
    };
    if args.sequential {
        exec = Execution::Sequential;
    }
    let seed = args.seed.or(file_seed).unwrap_or(0);
    let out = args.out.clone().or(file_out).unwrap_or_else(|| ".".into());

    if !table.contains_key("experiment") {
        return Err(CliError::parse(&path, "missing `experiment` (ulln, consistency, approximation or normality)"));
    }
    let mut cfg: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::parse(&path, e.to_string().trim_end()))?;
    override_taus(&mut cfg, &args.taus)?;
    cfg.validate()?;

    let report = cfg.run(seed, exec)?;
    create_dir(&out)?;
    let report_path = out.join("report.json");
    let raw_path = out.join("raw.csv");
    std::fs::write(&report_path, report.to_json()).map_err(|e| CliError::io(&report_path, e))?;
    std::fs::write(&raw_path, report.raw_csv()).map_err(|e| CliError::io(&raw_path, e))?;

    let cell_checks = report.cells.iter().flat_map(|c| c.threshold.iter());
    for check in cell_checks.chain(&report.checks) {
        println!(
            "{} {}: {} {} {}",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.value,
            check.comparison,
            check.threshold
        );
    }
    println!("{} {} (seed {seed}): {}", cfg.name(), if report.pass { "PASS" } else { "FAIL" }, report_path.display());
    Ok(if report.pass { 0 } else { 1 })
}
