use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{GrowthRule, GrowthSchedule};
use crate::error::{EnnError, Result};
use crate::ks::{ks_critical_value, ks_statistic, normal_cdf};
use crate::net::{forward_unchecked, SieveSpec, Tau};
use crate::par::{self, Execution};
use crate::train::{fit, TrainConfig};

use super::oracle::{PopulationOracle, DEFAULT_ORACLE_POINTS};
use super::report::{params, CellReport, Check, Comparison, ExperimentReport, RawTable};
use super::stats::{mean, median, variance};
use super::target::{gen_data, NoiseSpec, TargetSpec};
use super::{stream_seed, Stream};

/// Fewest replications for which the KS comparison is meaningful.
pub const MIN_REPLICATIONS: usize = 200;

fn one() -> usize {
    1
}
fn default_growth() -> GrowthRule {
    GrowthRule::Power { exponent: 0.25 }
}
fn default_oracle() -> usize {
    DEFAULT_ORACLE_POINTS
}
fn default_ks_constant() -> f64 {
    1.63
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityConfig {
    pub target: TargetSpec,
    pub noise: NoiseSpec,
    pub tau: Tau,
    #[serde(default = "one")]
    pub d: usize,
    pub n: u64,
    pub replications: usize,
    #[serde(default = "default_growth")]
    pub growth: GrowthRule,
    #[serde(default)]
    pub sieve: Option<SieveSpec>,
    #[serde(default)]
    pub train: TrainConfig,
    /// Monte Carlo oracle size for `d > 1`; one-dimensional cells use Romberg.
    #[serde(default = "default_oracle")]
    pub oracle_size: usize,
    /// KS pass threshold is `ks_constant / sqrt(replications)`.
    #[serde(default = "default_ks_constant")]
    pub ks_constant: f64,
}

impl NormalityConfig {
    fn sieve(&self) -> Result<SieveSpec> {
        match self.sieve {
            Some(s) => Ok(s),
            None => GrowthSchedule { rule: self.growth, d: self.d }.sieve(self.n),
        }
    }

    fn oracle(&self, seed: u64) -> Result<PopulationOracle> {
        PopulationOracle::for_dimension(self.d, self.oracle_size, stream_seed(seed, 0, 0, Stream::Oracle))
    }

    /// Limit variance `P f0^2 - (P f0)^2` and `P f0`.
    fn limit_moments(&self, oracle: &PopulationOracle) -> (f64, f64) {
        let p1 = oracle.mean(Execution::Sequential, |x| self.target.eval(x));
        let p2 = oracle.mean(Execution::Sequential, |x| self.target.eval(x).powi(2));
        (p2 - p1 * p1, p1)
    }

    pub fn validate(&self) -> Result<()> {
        self.target.validate(self.d)?;
        self.noise.validate()?;
        self.train.validate().map_err(|e| EnnError::config(e.to_string()))?;
        if self.replications < MIN_REPLICATIONS {
            return Err(EnnError::config(format!(
                "normality needs at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if self.n < 2 {
            return Err(EnnError::config("n must be at least 2"));
        }
        if self.sieve()?.d != self.d {
            return Err(EnnError::config("sieve dimension differs from the experiment dimension"));
        }
        // The limit variance only depends on the target; a cheap oracle is enough
        // to reject degenerate cells.
        let probe = PopulationOracle::for_dimension(self.d, 10_000, 0)?;
        let (v0, _) = self.limit_moments(&probe);
        if !(v0 > 1e-12) {
            return Err(EnnError::config(format!(
                "degenerate normality cell: limit variance P f0^2 - (P f0)^2 = {v0:e}"
            )));
        }
        Ok(())
    }
}

/// Refits on fresh data each replication and compares the spread of
/// `S = n^(-1/2) sum_i (f_hat(X_i) - P f_hat)` with `N(0, Var f0(X))`.
pub fn normality_experiment(cfg: &NormalityConfig, seed: u64, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sieve = cfg.sieve()?;
    let oracle = cfg.oracle(seed)?;
    let (v0, p_f0) = cfg.limit_moments(&oracle);
    let n = cfg.n as usize;
    let root_n = (n as f64).sqrt();

    let rows = par::try_map_indexed(exec, cfg.replications, |rep| -> Result<Vec<f64>> {
        let data = gen_data(&cfg.target, &cfg.noise, n, cfg.d, stream_seed(seed, 0, rep, Stream::Data))?;
        let train = TrainConfig { seed: stream_seed(seed, 0, rep, Stream::Train), execution: exec, ..cfg.train };
        let model = fit(&data, cfg.tau, &sieve, &train)?;
        let p_fhat = oracle.mean(Execution::Sequential, |x| forward_unchecked(&model.params, x));
        let (mut s, mut f0_sum) = (0.0, 0.0);
        for x in data.rows() {
            s += forward_unchecked(&model.params, x) - p_fhat;
            f0_sum += cfg.target.eval(x) - p_f0;
        }
        let s = s / root_n;
        // Centred estimation error: S minus the same statistic for f0.
        let t = s - f0_sum / root_n;
        Ok(vec![rep as f64, s, t, p_fhat, model.risk, model.iterations as f64])
    })?;
    let mut raw = RawTable::new(&["rep", "s", "centered_difference", "p_fhat", "risk", "iterations"]);
    raw.rows = rows;

    let s = raw.column("s").unwrap();
    let abs_t: Vec<f64> = raw.column("centered_difference").unwrap().iter().map(|v| v.abs()).collect();
    let ks = ks_statistic(&s, normal_cdf(v0)?)?;
    let critical = ks_critical_value(cfg.replications, cfg.ks_constant);
    let sd_s = variance(&s).sqrt();
    let med_t = median(&abs_t);

    let mut cell = CellReport::new(
        params([
            ("n", json!(cfg.n)),
            ("r", json!(sieve.r)),
            ("v", json!(sieve.v)),
            ("m", json!(sieve.m)),
            ("tau", json!(cfg.tau.value())),
            ("sigma2", json!(cfg.noise.sigma2())),
        ]),
        raw,
    );
    cell.aggregate("ks", ks)
        .aggregate("v0", v0)
        .aggregate("p_f0", p_f0)
        .aggregate("mean_s", mean(&s))
        .aggregate("var_s", sd_s * sd_s)
        .aggregate("sd_s", sd_s)
        .aggregate("median_abs_centered_difference", med_t);
    cell.check(Check::new("ks_below_critical", ks, Comparison::Lt, critical));
    cell.check(Check::new("centered_difference_below_spread_of_s", med_t, Comparison::Lt, sd_s));
    Ok(ExperimentReport::new("normality", seed, vec![cell], vec![]))
}
