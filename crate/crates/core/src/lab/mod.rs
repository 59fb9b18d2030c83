//! Monte Carlo experiments on the large-sample behaviour of the sieve
//! estimator: the uniform law of large numbers for the centred risk,
//! consistency in empirical norm, approximation power as the width grows, and
//! the Gaussian limit of the centred plug-in statistic.
//!
//! Every random stream is derived from `(master seed, cell, replication,
//! purpose)` and every fold runs in replication order, so a report depends only
//! on its configuration and seed.

mod approximation;
mod consistency;
mod normality;
mod oracle;
mod report;
pub mod stats;
mod target;
mod ulln;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::par::Execution;
use crate::seed::derive_seed;

pub use approximation::{approximation_experiment, ApproximationConfig};
pub use consistency::{consistency_experiment, ConsistencyConfig};
pub use normality::{normality_experiment, NormalityConfig};
pub use oracle::{romberg_unit, PopulationOracle, DEFAULT_ORACLE_POINTS, ROMBERG_LEVELS};
pub use report::{CellReport, Check, Comparison, ExperimentReport, RawTable};
pub use target::{gen_data, gen_design, NoiseSpec, TargetSpec};
pub use ulln::{centered_deviation, population_split, risk_split, ulln_experiment, RiskSplit, UllnConfig};

pub use crate::ks::ks_statistic;

/// One experiment definition, tagged by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
pub enum ExperimentConfig {
    Ulln(UllnConfig),
    Consistency(ConsistencyConfig),
    Approximation(ApproximationConfig),
    Normality(NormalityConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Ulln(_) => "ulln",
            ExperimentConfig::Consistency(_) => "consistency",
            ExperimentConfig::Approximation(_) => "approximation",
            ExperimentConfig::Normality(_) => "normality",
        }
    }

    /// Checks preconditions without running anything.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Ulln(c) => c.validate(),
            ExperimentConfig::Consistency(c) => c.validate(),
            ExperimentConfig::Approximation(c) => c.validate(),
            ExperimentConfig::Normality(c) => c.validate(),
        }
    }

    pub fn run(&self, seed: u64, exec: Execution) -> Result<ExperimentReport> {
        match self {
            ExperimentConfig::Ulln(c) => ulln_experiment(c, seed, exec),
            ExperimentConfig::Consistency(c) => consistency_experiment(c, seed, exec),
            ExperimentConfig::Approximation(c) => approximation_experiment(c, seed, exec),
            ExperimentConfig::Normality(c) => normality_experiment(c, seed, exec),
        }
    }
}

/// What a derived random stream is used for.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    Data = 0,
    Train = 1,
    Networks = 2,
    Oracle = 3,
    Probe = 4,
}

pub(crate) fn stream_seed(master: u64, cell: usize, rep: usize, stream: Stream) -> u64 {
    derive_seed(master, &[cell as u64, rep as u64, stream as u64])
}
