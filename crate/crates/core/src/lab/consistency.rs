use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{identifiability_threshold, GrowthRule, GrowthSchedule};
use crate::error::{EnnError, Result};
use crate::net::{SieveSpec, Tau};
use crate::par::{self, Execution};
use crate::train::{empirical_norm, fit, TrainConfig};

use super::report::{params, CellReport, Check, Comparison, ExperimentReport, RawTable};
use super::stats::{mean, median, quantile};
use super::target::{gen_data, NoiseSpec, TargetSpec};
use super::{stream_seed, Stream};

fn one() -> usize {
    1
}
fn default_growth() -> GrowthRule {
    GrowthRule::Power { exponent: 0.25 }
}
fn default_ceiling() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub target: TargetSpec,
    pub noise: NoiseSpec,
    pub taus: Vec<Tau>,
    #[serde(default = "one")]
    pub d: usize,
    pub n_grid: Vec<u64>,
    pub replications: usize,
    #[serde(default = "default_growth")]
    pub growth: GrowthRule,
    /// A fixed sieve for every `n`; overrides `growth` when set.
    #[serde(default)]
    pub sieve: Option<SieveSpec>,
    #[serde(default)]
    pub train: TrainConfig,
    /// Upper bound on the median norm at the largest `n`. For `tau != 1/2` the
    /// bound used is the larger of this and the identifiability threshold.
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
}

impl ConsistencyConfig {
    fn sieve_at(&self, n: u64) -> Result<SieveSpec> {
        match self.sieve {
            Some(s) => Ok(s),
            None => GrowthSchedule { rule: self.growth, d: self.d }.sieve(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.target.validate(self.d)?;
        self.noise.validate()?;
        self.train.validate().map_err(|e| EnnError::config(e.to_string()))?;
        if self.taus.is_empty() {
            return Err(EnnError::config("at least one tau is required"));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(EnnError::config("n grid must be nonempty with positive sizes"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EnnError::config("n grid must be strictly increasing"));
        }
        if self.replications == 0 {
            return Err(EnnError::config("replications must be positive"));
        }
        if !(self.ceiling > 0.0) {
            return Err(EnnError::config("ceiling must be positive"));
        }
        for &n in &self.n_grid {
            let s = self.sieve_at(n)?;
            if s.d != self.d {
                return Err(EnnError::config("sieve dimension differs from the experiment dimension"));
            }
        }
        Ok(())
    }
}

/// Fits the estimator on fresh data for every `(tau, n, replication)` and
/// tracks the empirical norm to the true function on the training design.
pub fn consistency_experiment(cfg: &ConsistencyConfig, seed: u64, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sigma2 = cfg.noise.sigma2();
    let mut cells = Vec::new();
    let mut checks = Vec::new();
    for (ti, &tau) in cfg.taus.iter().enumerate() {
        let threshold = identifiability_threshold(tau, sigma2)?;
        let mut medians = Vec::with_capacity(cfg.n_grid.len());
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let c = ti * cfg.n_grid.len() + ni;
            let sieve = cfg.sieve_at(n)?;
            let rows = par::try_map_indexed(exec, cfg.replications, |rep| -> Result<Vec<f64>> {
                let data =
                    gen_data(&cfg.target, &cfg.noise, n as usize, cfg.d, stream_seed(seed, c, rep, Stream::Data))?;
                let train =
                    TrainConfig { seed: stream_seed(seed, c, rep, Stream::Train), execution: exec, ..cfg.train };
                let model = fit(&data, tau, &sieve, &train)?;
                let norm = empirical_norm(&model.params, |x| cfg.target.eval(x), data.x(), cfg.d)?;
                Ok(vec![rep as f64, norm, model.risk, model.iterations as f64, f64::from(u8::from(model.converged))])
            })?;
            let mut raw = RawTable::new(&["rep", "norm", "risk", "iterations", "converged"]);
            raw.rows = rows;
            let norms = raw.column("norm").unwrap();
            let mean_risk = mean(&raw.column("risk").unwrap());
            let converged = mean(&raw.column("converged").unwrap());
            let med = median(&norms);
            medians.push(med);
            let mut cell = CellReport::new(
                params([
                    ("tau", json!(tau.value())),
                    ("n", json!(n)),
                    ("r", json!(sieve.r)),
                    ("v", json!(sieve.v)),
                    ("m", json!(sieve.m)),
                    ("sigma2", json!(sigma2)),
                ]),
                raw,
            );
            cell.aggregate("median_norm", med)
                .aggregate("q25_norm", quantile(&norms, 0.25))
                .aggregate("q75_norm", quantile(&norms, 0.75))
                .aggregate("mean_risk", mean_risk)
                .aggregate("converged_fraction", converged)
                .aggregate("identifiability_threshold", threshold);
            cells.push(cell);
        }
        let last = *medians.last().unwrap();
        let tag = format!("tau={}", tau.value());
        if medians.len() >= 2 {
            checks.push(Check::new(
                format!("{tag}: median norm at largest n below smallest n"),
                last,
                Comparison::Lt,
                medians[0],
            ));
        }
        let ceiling = if tau.value() == 0.5 { cfg.ceiling } else { cfg.ceiling.max(threshold) };
        checks.push(Check::new(
            format!("{tag}: median norm at largest n below ceiling"),
            last,
            Comparison::Lt,
            ceiling,
        ));
    }
    Ok(ExperimentReport::new("consistency", seed, cells, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::fit_constant;

    fn base() -> ConsistencyConfig {
        ConsistencyConfig {
            target: TargetSpec::Constant { c: 1.5 },
            noise: NoiseSpec::Gaussian { sigma2: 1.0 },
            taus: vec![Tau::new(0.5).unwrap()],
            d: 1,
            n_grid: vec![40, 400],
            replications: 4,
            growth: default_growth(),
            sieve: None,
            train: TrainConfig { max_iters: 300, restarts: 1, ..Default::default() },
            ceiling: 1.0,
        }
    }

    #[test]
    fn constant_target_shrinks() {
        let cfg = base();
        let report = consistency_experiment(&cfg, 1, Execution::Parallel).unwrap();
        let med = |i: usize| report.cells[i].aggregates["median_norm"];
        assert!(med(1) < med(0));
        assert!(report.pass);
    }

    #[test]
    fn constant_cell_matches_expectile_of_sample() {
        // A fixed sieve with a frozen hidden layer turns fit into the sample mean.
        let cfg = ConsistencyConfig {
            sieve: Some(SieveSpec::new(1, 4.0, 1e-12, 1).unwrap()),
            n_grid: vec![200],
            replications: 1,
            train: TrainConfig { max_iters: 3000, grad_tol: 1e-10, restarts: 1, ..Default::default() },
            ..base()
        };
        let report = consistency_experiment(&cfg, 5, Execution::Sequential).unwrap();
        let data = gen_data(&cfg.target, &cfg.noise, 200, 1, stream_seed(5, 0, 0, Stream::Data)).unwrap();
        let c = fit_constant(data.y(), Tau::new(0.5).unwrap()).unwrap();
        let norm = report.cells[0].aggregates["median_norm"];
        assert!((norm - (c - 1.5).abs()).abs() < 1e-4);
    }

    #[test]
    fn validation() {
        assert!(ConsistencyConfig { taus: vec![], ..base() }.validate().is_err());
        assert!(ConsistencyConfig { n_grid: vec![100, 10], ..base() }.validate().is_err());
        assert!(ConsistencyConfig { d: 2, ..base() }.validate().is_ok());
        let bad_sieve = ConsistencyConfig { sieve: Some(SieveSpec::new(1, 4.0, 1.0, 3).unwrap()), ..base() };
        assert!(bad_sieve.validate().is_err());
    }
}
