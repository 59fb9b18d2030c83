use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::default_budgets;
use crate::error::{EnnError, Result};
use crate::net::{forward_unchecked, project_sieve, sample_sieve, EnnParams, SieveSpec, Tau};
use crate::par::{self, Execution};
use crate::train::{fit, fit_with_warm_start, TrainConfig};

use super::oracle::PopulationOracle;
use super::report::{params, CellReport, Check, Comparison, ExperimentReport, RawTable};
use super::stats::{median, quantile};
use super::target::{gen_data, NoiseSpec, TargetSpec};
use super::{stream_seed, Stream};

fn one() -> usize {
    1
}
fn default_n_train() -> usize {
    1000
}
fn default_replications() -> usize {
    3
}
fn default_oracle() -> usize {
    100_000
}
fn default_tau() -> Tau {
    Tau::new(0.5).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationConfig {
    pub target: TargetSpec,
    #[serde(default = "one")]
    pub d: usize,
    pub r_grid: Vec<usize>,
    #[serde(default = "default_tau")]
    pub tau: Tau,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub train: TrainConfig,
    /// Size of the uniform sample used to estimate the squared L2 error.
    #[serde(default = "default_oracle")]
    pub oracle_size: usize,
    /// When set, every cell's median error must be below it.
    #[serde(default)]
    pub ceiling: Option<f64>,
}

impl ApproximationConfig {
    pub fn validate(&self) -> Result<()> {
        self.target.validate(self.d)?;
        self.train.validate().map_err(|e| EnnError::config(e.to_string()))?;
        if self.r_grid.is_empty() || self.r_grid.contains(&0) {
            return Err(EnnError::config("r grid must be nonempty with positive widths"));
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EnnError::config("r grid must be strictly increasing"));
        }
        if self.n_train == 0 || self.replications == 0 || self.oracle_size == 0 {
            return Err(EnnError::config("n_train, replications and oracle_size must be positive"));
        }
        Ok(())
    }
}

/// Noiseless fits at increasing widths, scored by the squared L2 distance to
/// the target under the uniform covariate law.
///
/// Each replication draws one training set and walks the width grid. Every
/// width after the first also restarts from the previous fit, padded with
/// silent units; budgets grow with `r`, so that start is feasible.
pub fn approximation_experiment(cfg: &ApproximationConfig, seed: u64, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let oracle = PopulationOracle::monte_carlo(cfg.oracle_size, cfg.d, stream_seed(seed, 0, 0, Stream::Oracle))?;
    let sieves = cfg
        .r_grid
        .iter()
        .map(|&r| {
            let (v, m) = default_budgets(r);
            SieveSpec::new(r, v, m, cfg.d)
        })
        .collect::<Result<Vec<_>>>()?;

    // per_rep[rep][cell] = [rep, l2_error, risk, iterations, warm]
    let per_rep = par::try_map_indexed(exec, cfg.replications, |rep| -> Result<Vec<Vec<f64>>> {
        let data =
            gen_data(&cfg.target, &NoiseSpec::None, cfg.n_train, cfg.d, stream_seed(seed, 0, rep, Stream::Data))?;
        let mut prev: Option<EnnParams> = None;
        let mut out = Vec::with_capacity(sieves.len());
        for (c, sieve) in sieves.iter().enumerate() {
            let train = TrainConfig { seed: stream_seed(seed, c, rep, Stream::Train), execution: exec, ..cfg.train };
            let model = match &prev {
                None => fit(&data, cfg.tau, sieve, &train)?,
                Some(p) => {
                    let warm = widen(p, sieve, stream_seed(seed, c, rep, Stream::Networks));
                    fit_with_warm_start(&data, cfg.tau, sieve, &train, &warm)?
                }
            };
            let err = oracle.mean(Execution::Sequential, |x| {
                let e = forward_unchecked(&model.params, x) - cfg.target.eval(x);
                e * e
            });
            let from_warm = f64::from(u8::from(model.restart_index == train.restarts && prev.is_some()));
            out.push(vec![rep as f64, err, model.risk, model.iterations as f64, from_warm]);
            prev = Some(model.params);
        }
        Ok(out)
    })?;

    let mut cells = Vec::new();
    let mut checks = Vec::new();
    let mut prev: Option<f64> = None;
    for (c, sieve) in sieves.iter().enumerate() {
        let mut raw = RawTable::new(&["rep", "l2_error", "risk", "iterations", "warm_start_won"]);
        raw.rows = per_rep.iter().map(|rows| rows[c].clone()).collect();
        let errs = raw.column("l2_error").unwrap();
        let med = median(&errs);
        let mut cell = CellReport::new(
            params([
                ("r", json!(sieve.r)),
                ("v", json!(sieve.v)),
                ("m", json!(sieve.m)),
                ("n_train", json!(cfg.n_train)),
                ("tau", json!(cfg.tau.value())),
            ]),
            raw,
        );
        cell.aggregate("median_l2_error", med)
            .aggregate("q25_l2_error", quantile(&errs, 0.25))
            .aggregate("q75_l2_error", quantile(&errs, 0.75));
        if let Some(ceiling) = cfg.ceiling {
            cell.check(Check::new("median_l2_error_below_ceiling", med, Comparison::Lt, ceiling));
        }
        if let Some(p) = prev {
            checks.push(Check::new(
                format!("median error at r={} not above previous width", sieve.r),
                med,
                Comparison::Le,
                p,
            ));
        }
        prev = Some(med);
        cells.push(cell);
    }
    Ok(ExperimentReport::new("approximation", seed, cells, checks))
}

/// Embeds `params` in the wider `sieve`: existing units are kept and new
/// units get random hidden weights with zero output weight.
pub fn widen(params: &EnnParams, sieve: &SieveSpec, seed: u64) -> EnnParams {
    let mut wide = sample_sieve(sieve, seed);
    let r = params.width().min(sieve.r);
    wide.alpha0 = params.alpha0;
    wide.alpha.iter_mut().for_each(|a| *a = 0.0);
    wide.alpha[..r].copy_from_slice(&params.alpha[..r]);
    wide.gamma[..r].clone_from_slice(&params.gamma[..r]);
    wide.gamma0[..r].copy_from_slice(&params.gamma0[..r]);
    project_sieve(&wide, sieve)
}
