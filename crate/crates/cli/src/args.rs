use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Expectile neural networks: train, predict, evaluate sieve bounds and run
/// Monte Carlo experiments.
///
/// Settings come from the optional `--config` TOML file; any flag given on
/// the command line overrides the matching key in that file.
#[derive(Debug, Parser)]
#[command(name = "enn", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a network on a CSV file with header x1,...,xd,y.
    Train(TrainArgs),
    /// Evaluate a saved model on a CSV file.
    Predict(PredictArgs),
    /// Print covering, deviation and identifiability bounds as JSON.
    Bounds(BoundsArgs),
    /// Run an experiment and write report.json and raw.csv.
    Experiment(ExperimentArgs),
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("tau must lie in (0, 1), got {v}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SieveArgs {
    /// Hidden units.
    #[arg(long)]
    pub r: Option<usize>,
    /// Output-layer L1 budget (at least 4).
    #[arg(long)]
    pub v: Option<f64>,
    /// Per-unit hidden-layer L1 budget.
    #[arg(long)]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for model and prediction files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Expectile level; repeat to fit several.
    #[arg(long = "tau", value_parser = parse_tau)]
    pub taus: Vec<f64>,
    #[command(flatten)]
    pub sieve: SieveArgs,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Plain projected gradient steps without extrapolation.
    #[arg(long)]
    pub no_momentum: bool,
    /// Run restarts one after another.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// model.json written by `enn train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// CSV with columns x1,...,xd and an optional y.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for predictions.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<u64>,
    /// Range bound of the loss class.
    #[arg(long)]
    pub b: Option<f64>,
    /// Input dimension.
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub sieve: SieveArgs,
    /// Expectile level for the identifiability threshold; repeat for several.
    #[arg(long = "tau", value_parser = parse_tau)]
    pub taus: Vec<f64>,
    /// Noise variance for the identifiability threshold.
    #[arg(long)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for report.json and raw.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the expectile level(s) of the experiment.
    #[arg(long = "tau", value_parser = parse_tau)]
    pub taus: Vec<f64>,
    /// Run replications one after another.
    #[arg(long)]
    pub sequential: bool,
}
