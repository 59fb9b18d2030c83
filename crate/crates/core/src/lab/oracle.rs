//! Population expectations over the uniform covariate law on `[0, 1]^d`.

use crate::error::{EnnError, Result};
use crate::par::{chunked_sum, Execution};

use super::target::gen_design;

/// Points used by the default Monte Carlo oracle.
pub const DEFAULT_ORACLE_POINTS: usize = 1_000_000;
/// Romberg levels for one-dimensional integrals: `2^11 + 1 = 2049` nodes.
pub const ROMBERG_LEVELS: u32 = 11;

#[derive(Debug, Clone)]
pub enum PopulationOracle {
    /// Romberg extrapolation of the trapezoid rule on `[0, 1]`.
    Romberg { levels: u32 },
    /// Mean over a fixed uniform sample.
    MonteCarlo { points: Vec<f64>, d: usize },
}

impl PopulationOracle {
    pub fn monte_carlo(size: usize, d: usize, seed: u64) -> Result<Self> {
        if size == 0 || d == 0 {
            return Err(EnnError::config("oracle needs a positive size and dimension"));
        }
        Ok(PopulationOracle::MonteCarlo { points: gen_design(size, d, seed), d })
    }

    /// Romberg when `d == 1`, otherwise a Monte Carlo sample of `mc_size` points.
    pub fn for_dimension(d: usize, mc_size: usize, seed: u64) -> Result<Self> {
        if d == 1 {
            Ok(PopulationOracle::Romberg { levels: ROMBERG_LEVELS })
        } else {
            Self::monte_carlo(mc_size, d, seed)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PopulationOracle::Romberg { .. } => 1,
            PopulationOracle::MonteCarlo { d, .. } => *d,
        }
    }

    /// `E f(X)` for `X` uniform on `[0, 1]^d`.
    pub fn mean<F>(&self, exec: Execution, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        match self {
            PopulationOracle::Romberg { levels } => romberg_unit(*levels, |x| f(&[x])),
            PopulationOracle::MonteCarlo { points, d } => {
                let n = points.len() / d;
                chunked_sum(exec, n, |i| f(&points[i * d..(i + 1) * d])) / n as f64
            }
        }
    }
}

/// Romberg integration of `f` over `[0, 1]` using `2^levels + 1` nodes.
pub fn romberg_unit<F: Fn(f64) -> f64>(levels: u32, f: F) -> f64 {
    let n = 1usize << levels;
    let values: Vec<f64> = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels as usize + 1);
    for j in 0..=levels {
        let stride = n >> j;
        let h = 1.0 / (1usize << j) as f64;
        let interior: f64 = (1..(1usize << j)).map(|k| values[k * stride]).sum();
        let trap = h * (0.5 * (values[0] + values[n]) + interior);
        let mut row = vec![trap];
        for m in 1..=j as usize {
            let scale = 4f64.powi(m as i32) - 1.0;
            let prev = &table[j as usize - 1];
            row.push(row[m - 1] + (row[m - 1] - prev[m - 1]) / scale);
        }
        table.push(row);
    }
    *table.last().and_then(|r| r.last()).expect("nonempty table")
}
