use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{growth_condition_ratio, GrowthRule, GrowthSchedule};
use crate::error::{EnnError, Result};
use crate::net::{forward_unchecked, sample_sieve, Dataset, EnnParams, Tau};
use crate::par::{self, Execution, SUM_CHUNK};

use super::report::{params, CellReport, Check, Comparison, ExperimentReport, RawTable};
use super::stats::{median, ols_slope, quantile};
use super::target::{gen_data, NoiseSpec, TargetSpec};
use super::{stream_seed, Stream};

/// Means of the two one-sided squared residuals
/// `g1 = (y - f)^2 1{y >= f}` and `g2 = (y - f)^2 1{y < f}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSplit {
    pub g1: f64,
    pub g2: f64,
}

impl RiskSplit {
    /// `tau g1 + (1 - tau) g2`, the expectile risk.
    pub fn risk(&self, tau: Tau) -> f64 {
        tau.value() * self.g1 + (1.0 - tau.value()) * self.g2
    }
}

#[inline]
fn split_terms(params: &EnnParams, x: &[f64], y: f64) -> (f64, f64) {
    let f = forward_unchecked(params, x);
    let r = y - f;
    if y >= f {
        (r * r, 0.0)
    } else {
        (0.0, r * r)
    }
}

fn split_range(params: &EnnParams, data: &Dataset, lo: usize, hi: usize) -> (f64, f64) {
    (lo..hi).fold((0.0, 0.0), |(a, b), i| {
        let (g1, g2) = split_terms(params, data.row(i), data.y()[i]);
        (a + g1, b + g2)
    })
}

/// Empirical means of `g1`, `g2` over `data`.
pub fn risk_split(params: &EnnParams, data: &Dataset) -> RiskSplit {
    let (s1, s2) = split_range(params, data, 0, data.n());
    let n = data.n() as f64;
    RiskSplit { g1: s1 / n, g2: s2 / n }
}

/// Population means of `g1`, `g2`, estimated on a large independent sample.
/// Sums are accumulated per fixed chunk and then in chunk order.
pub fn population_split(params: &EnnParams, oracle: &Dataset, exec: Execution) -> RiskSplit {
    let n = oracle.n();
    let chunks = n.div_ceil(SUM_CHUNK);
    let parts = par::map_indexed(exec, chunks, |c| {
        let lo = c * SUM_CHUNK;
        split_range(params, oracle, lo, (lo + SUM_CHUNK).min(n))
    });
    let (s1, s2) = parts.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    RiskSplit { g1: s1 / n as f64, g2: s2 / n as f64 }
}

/// `|tau (g1_hat - E g1) + (1 - tau)(g2_hat - E g2)|`.
pub fn centered_deviation(tau: Tau, empirical: RiskSplit, population: RiskSplit) -> f64 {
    let t = tau.value();
    (t * (empirical.g1 - population.g1) + (1.0 - t) * (empirical.g2 - population.g2)).abs()
}

fn one() -> usize {
    1
}
fn default_growth() -> GrowthRule {
    GrowthRule::Power { exponent: 0.25 }
}
fn default_oracle() -> usize {
    super::DEFAULT_ORACLE_POINTS
}
fn default_slope_reps() -> usize {
    200
}
fn default_slope_range() -> [f64; 2] {
    [-0.7, -0.3]
}

/// Required ratio between the oracle sample and the largest data sample, so
/// that oracle error stays an order of magnitude below sampling error.
pub const ORACLE_FACTOR: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UllnConfig {
    pub tau: Tau,
    pub target: TargetSpec,
    pub noise: NoiseSpec,
    #[serde(default = "one")]
    pub d: usize,
    pub n_grid: Vec<u64>,
    #[serde(default = "default_growth")]
    pub growth: GrowthRule,
    /// Networks sampled from each sieve to approximate the supremum.
    pub networks: usize,
    pub replications: usize,
    #[serde(default = "default_oracle")]
    pub oracle_size: usize,
    /// Replications per sample size for the fixed-network rate fit.
    #[serde(default = "default_slope_reps")]
    pub slope_replications: usize,
    /// Accepted range of the log-log slope of the fixed-network deviation.
    #[serde(default = "default_slope_range")]
    pub slope_range: [f64; 2],
}

impl UllnConfig {
    pub fn schedule(&self) -> GrowthSchedule {
        GrowthSchedule { rule: self.growth, d: self.d }
    }

    pub fn validate(&self) -> Result<()> {
        self.target.validate(self.d)?;
        self.noise.validate()?;
        if self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n < 2) {
            return Err(EnnError::config("n grid must be nonempty with every n >= 2"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EnnError::config("n grid must be strictly increasing"));
        }
        if self.networks == 0 || self.replications == 0 || self.slope_replications == 0 {
            return Err(EnnError::config("networks and replication counts must be positive"));
        }
        let sched = self.schedule();
        let ratios = self.n_grid.iter().map(|&n| growth_condition_ratio(&sched, n)).collect::<Result<Vec<_>>>()?;
        if ratios.windows(2).any(|w| w[1] >= w[0]) {
            return Err(EnnError::config(format!(
                "growth ratio p ln p / n must decrease along the n grid, got {ratios:?}"
            )));
        }
        let max_n = *self.n_grid.last().unwrap();
        if (self.oracle_size as u64) < ORACLE_FACTOR * max_n {
            return Err(EnnError::config(format!(
                "oracle sample of {} points is too small: need at least {} x {max_n}",
                self.oracle_size, ORACLE_FACTOR
            )));
        }
        for &n in &self.n_grid {
            sched.sieve(n)?;
        }
        Ok(())
    }
}

/// Centred empirical risk over sampled sieve members, across a grid of sample
/// sizes, plus the deviation rate of one fixed network.
pub fn ulln_experiment(cfg: &UllnConfig, seed: u64, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sched = cfg.schedule();
    let tau = cfg.tau;
    let oracle = gen_data(&cfg.target, &cfg.noise, cfg.oracle_size, cfg.d, stream_seed(seed, 0, 0, Stream::Oracle))?;

    let mut cells = Vec::new();
    let mut prev_median: Option<f64> = None;
    for (c, &n) in cfg.n_grid.iter().enumerate() {
        let sieve = sched.sieve(n)?;
        let nets: Vec<EnnParams> =
            (0..cfg.networks).map(|k| sample_sieve(&sieve, stream_seed(seed, c, k, Stream::Networks))).collect();
        let pops = par::map_indexed(exec, nets.len(), |k| population_split(&nets[k], &oracle, Execution::Sequential));

        let rows = par::try_map_indexed(exec, cfg.replications, |rep| -> Result<Vec<f64>> {
            let data = gen_data(&cfg.target, &cfg.noise, n as usize, cfg.d, stream_seed(seed, c, rep, Stream::Data))?;
            let (arg, sup) = nets
                .iter()
                .zip(&pops)
                .map(|(p, pop)| centered_deviation(tau, risk_split(p, &data), *pop))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
            Ok(vec![rep as f64, sup, arg as f64])
        })?;
        let mut raw = RawTable::new(&["rep", "sup_deviation", "argmax_network"]);
        raw.rows = rows;
        let sups = raw.column("sup_deviation").unwrap();
        let med = median(&sups);

        let mut cell = CellReport::new(
            params([
                ("quantity", json!("sup_deviation")),
                ("n", json!(n)),
                ("r", json!(sieve.r)),
                ("v", json!(sieve.v)),
                ("m", json!(sieve.m)),
                ("networks", json!(cfg.networks)),
                ("tau", json!(tau.value())),
            ]),
            raw,
        );
        cell.aggregate("median", med)
            .aggregate("q25", quantile(&sups, 0.25))
            .aggregate("q75", quantile(&sups, 0.75))
            .aggregate("growth_ratio", growth_condition_ratio(&sched, n)?);
        if let Some(prev) = prev_median {
            cell.check(Check::new("median_below_previous_n", med, Comparison::Lt, prev));
        }
        prev_median = Some(med);
        cells.push(cell);
    }

    // Fixed network: deviation should shrink like n^(-1/2).
    let probe_sieve = sched.sieve(cfg.n_grid[0])?;
    let probe = sample_sieve(&probe_sieve, stream_seed(seed, 0, 0, Stream::Probe));
    let probe_pop = population_split(&probe, &oracle, exec);
    let mut log_n = Vec::new();
    let mut log_med = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let c = cfg.n_grid.len() + i;
        let rows = par::try_map_indexed(exec, cfg.slope_replications, |rep| -> Result<Vec<f64>> {
            let data = gen_data(&cfg.target, &cfg.noise, n as usize, cfg.d, stream_seed(seed, c, rep, Stream::Probe))?;
            // A single network is its own supremum.
            Ok(vec![rep as f64, centered_deviation(tau, risk_split(&probe, &data), probe_pop), 0.0])
        })?;
        let mut raw = RawTable::new(&["rep", "sup_deviation", "argmax_network"]);
        raw.rows = rows;
        let devs = raw.column("sup_deviation").unwrap();
        let med = median(&devs);
        log_n.push((n as f64).ln());
        log_med.push(med.ln());
        let mut cell = CellReport::new(
            params([
                ("quantity", json!("fixed_network_deviation")),
                ("n", json!(n)),
                ("r", json!(probe_sieve.r)),
                ("networks", json!(1)),
                ("tau", json!(tau.value())),
            ]),
            raw,
        );
        cell.aggregate("median", med).aggregate("q25", quantile(&devs, 0.25)).aggregate("q75", quantile(&devs, 0.75));
        cells.push(cell);
    }

    let mut checks = Vec::new();
    if cfg.n_grid.len() >= 2 {
        let slope = ols_slope(&log_n, &log_med);
        checks.push(Check::new("fixed_network_loglog_slope_min", slope, Comparison::Ge, cfg.slope_range[0]));
        checks.push(Check::new("fixed_network_loglog_slope_max", slope, Comparison::Le, cfg.slope_range[1]));
    }
    Ok(ExperimentReport::new("ulln", seed, cells, checks))
}
