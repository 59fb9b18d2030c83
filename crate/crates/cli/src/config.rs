//! Config files are TOML. Keys mirror the long flags of each subcommand and a
//! flag given on the command line always wins over the file. Relative paths
//! in a file are resolved against the file's directory.

use std::path::{Path, PathBuf};

use enn::{Tau, TrainConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSieve {
    pub r: Option<usize>,
    pub v: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub taus: Option<Vec<Tau>>,
    #[serde(default)]
    pub sieve: PartialSieve,
    pub train: Option<TrainConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictFile {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFile {
    pub eps: Option<f64>,
    pub n: Option<u64>,
    pub b: Option<f64>,
    pub d: Option<usize>,
    #[serde(default)]
    pub sieve: PartialSieve,
    pub taus: Option<Vec<Tau>>,
    pub sigma2: Option<f64>,
    /// `[M1, M2]` with `|y| < M1` and `|f| < M2`.
    pub transfer: Option<[f64; 2]>,
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Parses `path`, or returns the defaults when no file was given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| CliError::parse(p, e.to_string().trim_end())),
    }
}

/// Resolves a path taken from the config file at `config`.
pub fn resolve(config: Option<&Path>, p: PathBuf) -> PathBuf {
    match config.and_then(Path::parent) {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

pub fn existing(p: PathBuf, what: &str) -> Result<PathBuf> {
    if p.exists() {
        Ok(p)
    } else {
        Err(CliError::usage(format!("{what} {} does not exist", p.display())))
    }
}
