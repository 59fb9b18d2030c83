//! Empirical risk minimisation over the sieve.
//!
//! [`fit`] runs projected gradient descent from several random feasible
//! starting points and keeps the best. Each step moves against the gradient
//! and projects back onto the sieve; a step that raises the risk is halved
//! and retried, and the step size resets after every accepted move.
//!
//! With `momentum` on, the gradient step is taken from a point extrapolated
//! along the last accepted move (Nesterov weights). An extrapolated step that
//! would raise the risk is discarded and the momentum reset, so accepted
//! iterates are feasible and their risk never increases either way.

use serde::{Deserialize, Serialize};

use crate::error::{EnnError, Result};
use crate::net::{
    forward_unchecked, project_sieve_in_place, risk_and_grad, risk_unchecked, sample_sieve, Dataset, EnnParams,
    SieveSpec, Tau,
};
use crate::par::{self, Execution};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once the norm of the projected-gradient step falls below this.
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Extrapolate along the previous step before each gradient step, dropping
    /// the extrapolation whenever it would raise the risk.
    pub momentum: bool,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            step_size: 0.5,
            max_iters: 2000,
            grad_tol: 1e-6,
            restarts: 4,
            seed: 0,
            momentum: true,
            execution: Execution::Parallel,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(EnnError::invalid(format!("step_size must be positive, got {}", self.step_size)));
        }
        if self.max_iters == 0 {
            return Err(EnnError::invalid("max_iters must be positive"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(EnnError::invalid(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if self.restarts == 0 {
            return Err(EnnError::invalid("restarts must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub params: EnnParams,
    pub risk: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
}

impl FittedModel {
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        forward_unchecked(&self.params, x)
    }
}

/// Seed of restart `k` under master seed `seed`.
pub fn restart_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, &[k as u64])
}

fn check_inputs(data: &Dataset, sieve: &SieveSpec, cfg: &TrainConfig) -> Result<()> {
    cfg.validate()?;
    if data.n() == 0 {
        return Err(EnnError::invalid("cannot fit on an empty dataset"));
    }
    if data.d() != sieve.d {
        return Err(EnnError::invalid(format!(
            "data dimension {} does not match sieve dimension {}",
            data.d(),
            sieve.d
        )));
    }
    Ok(())
}

/// Fits a network in `sieve` to `data` under the `tau`-expectile loss.
pub fn fit(data: &Dataset, tau: Tau, sieve: &SieveSpec, cfg: &TrainConfig) -> Result<FittedModel> {
    check_inputs(data, sieve, cfg)?;
    let runs = par::try_map_indexed(cfg.execution, cfg.restarts, |k| {
        let init = sample_sieve(sieve, restart_seed(cfg.seed, k));
        descend(data, tau, sieve, cfg, init, k, |_, _| {})
    })?;
    Ok(best_of(runs))
}

/// Like [`fit`], with `warm` added as an extra starting point after the random
/// restarts. `warm` is projected onto the sieve first.
pub fn fit_with_warm_start(
    data: &Dataset,
    tau: Tau,
    sieve: &SieveSpec,
    cfg: &TrainConfig,
    warm: &EnnParams,
) -> Result<FittedModel> {
    check_inputs(data, sieve, cfg)?;
    if warm.width() != sieve.r || warm.dim() != Some(sieve.d) {
        return Err(EnnError::invalid("warm start does not match the sieve shape"));
    }
    let runs = par::try_map_indexed(cfg.execution, cfg.restarts + 1, |k| {
        let init = if k < cfg.restarts { sample_sieve(sieve, restart_seed(cfg.seed, k)) } else { warm.clone() };
        descend(data, tau, sieve, cfg, init, k, |_, _| {})
    })?;
    Ok(best_of(runs))
}

fn best_of(runs: Vec<FittedModel>) -> FittedModel {
    // Strict comparison keeps the lowest restart index on ties.
    runs.into_iter().reduce(|best, m| if m.risk < best.risk { m } else { best }).expect("at least one restart")
}

/// A single projected-gradient descent from `init`. `observe` sees every
/// accepted iterate (including the projected start) with its risk.
pub fn descend<F>(
    data: &Dataset,
    tau: Tau,
    sieve: &SieveSpec,
    cfg: &TrainConfig,
    init: EnnParams,
    restart: usize,
    mut observe: F,
) -> Result<FittedModel>
where
    F: FnMut(&EnnParams, f64),
{
    check_inputs(data, sieve, cfg)?;
    let (r, d) = (sieve.r, sieve.d);
    let fail = |detail: String| EnnError::NumericalFailure { restart, detail };

    let mut params = init;
    project_sieve_in_place(&mut params, sieve);
    let (mut risk, mut grad) = risk_and_grad(tau, &params, data);
    if !risk.is_finite() {
        return Err(fail(format!("non-finite initial risk {risk}")));
    }
    observe(&params, risk);

    let mut flat = params.flat();
    let mut prev = flat.clone();
    let mut t = 1.0f64;
    let mut step = cfg.step_size;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        if stationarity(&flat, &grad.flat(), cfg.step_size, r, d, sieve)? < cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = if cfg.momentum { (t - 1.0) / t_next } else { 0.0 };
        // Gradient at the extrapolated point, or at the iterate itself.
        let (base, base_grad) = if beta > 0.0 {
            let y: Vec<f64> = flat.iter().zip(&prev).map(|(x, p)| x + beta * (x - p)).collect();
            let yp = EnnParams::from_flat(&y, r, d)?;
            let (fy, gy) = risk_and_grad(tau, &yp, data);
            if !fy.is_finite() {
                return Err(fail(format!("non-finite risk {fy} at iteration {iterations}")));
            }
            (y, gy.flat())
        } else {
            (flat.clone(), grad.flat())
        };
        let moved: Vec<f64> = base.iter().zip(&base_grad).map(|(p, gi)| p - step * gi).collect();
        let mut candidate = EnnParams::from_flat(&moved, r, d)?;
        project_sieve_in_place(&mut candidate, sieve);
        let cand_flat = candidate.flat();

        let (cand_risk, cand_grad) = risk_and_grad(tau, &candidate, data);
        if !cand_risk.is_finite() {
            return Err(fail(format!("non-finite risk {cand_risk} at iteration {iterations}")));
        }
        if cand_risk <= risk {
            prev = std::mem::replace(&mut flat, cand_flat);
            params = candidate;
            risk = cand_risk;
            grad = cand_grad;
            step = cfg.step_size;
            t = t_next;
            observe(&params, risk);
        } else if beta > 0.0 {
            // Drop the momentum and retry from the current iterate.
            t = 1.0;
            prev.clone_from(&flat);
        } else {
            step *= 0.5;
            if step < f64::MIN_POSITIVE {
                return Err(fail("step size underflow".into()));
            }
        }
    }

    Ok(FittedModel { risk: risk_unchecked(tau, &params, data), params, iterations, converged, restart_index: restart })
}

/// Norm of the projected-gradient step `(x - P(x - step * grad)) / step`.
fn stationarity(x: &[f64], grad: &[f64], step: f64, r: usize, d: usize, sieve: &SieveSpec) -> Result<f64> {
    let moved: Vec<f64> = x.iter().zip(grad).map(|(p, g)| p - step * g).collect();
    let mut projected = EnnParams::from_flat(&moved, r, d)?;
    project_sieve_in_place(&mut projected, sieve);
    let sq: f64 = x.iter().zip(projected.flat()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sq.sqrt() / step)
}

/// The `tau`-expectile of `y`: the constant minimising the mean asymmetric
/// squared loss, found by iterating the weighted-mean fixed point.
pub fn fit_constant(y: &[f64], tau: Tau) -> Result<f64> {
    if y.is_empty() {
        return Err(EnnError::invalid("expectile of an empty sample"));
    }
    let mut m = y.iter().sum::<f64>() / y.len() as f64;
    for _ in 0..10_000 {
        let (num, den) = y.iter().fold((0.0, 0.0), |(num, den), &yi| {
            let w = tau.weight(yi, m);
            (num + w * yi, den + w)
        });
        let next = num / den;
        if (next - m).abs() <= 1e-12 {
            return Ok(next);
        }
        m = next;
    }
    Ok(m)
}

/// Independent route to the expectile: bisection on the first-order condition
/// `sum_i |tau - 1{y_i < m}| (y_i - m) = 0` over `[min y, max y]`.
pub fn expectile_oracle(y: &[f64], tau: Tau) -> Result<f64> {
    if y.is_empty() {
        return Err(EnnError::invalid("expectile of an empty sample"));
    }
    let foc = |m: f64| -> f64 {
        y.iter()
            .map(|&yi| {
                let w = if yi < m { 1.0 - tau.value() } else { tau.value() };
                w * (yi - m)
            })
            .sum()
    };
    let mut lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // foc is decreasing in m, nonnegative at lo and nonpositive at hi.
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if foc(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Root mean square of `f_hat - f0` over the rows of a row-major design with
/// `d` columns.
pub fn empirical_norm<F>(f_hat: &EnnParams, f0: F, x: &[f64], d: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if d == 0 || x.is_empty() || x.len() % d != 0 {
        return Err(EnnError::invalid("design must be a nonempty n x d matrix"));
    }
    if f_hat.dim().is_some_and(|pd| pd != d) {
        return Err(EnnError::invalid("design dimension does not match the network"));
    }
    let n = x.len() / d;
    let ss: f64 = x
        .chunks_exact(d)
        .map(|row| {
            let e = forward_unchecked(f_hat, row) - f0(row);
            e * e
        })
        .sum();
    Ok((ss / n as f64).sqrt())
}
