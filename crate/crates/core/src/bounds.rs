//! Learning-theory quantities for the sieve: the covering-number bound of the
//! network class, the uniform deviation probability it implies, the growth
//! ratio that has to vanish for a uniform law of large numbers, and the
//! separation threshold that makes the expectile risk identifiable.

use serde::{Deserialize, Serialize};

use crate::error::{EnnError, Result};
use crate::net::{SieveSpec, Tau};

/// Number of free parameters of a width-`r` network on `d` inputs, `r(d+2)+1`.
pub fn param_count(r: usize, d: usize) -> f64 {
    (r * (d + 2) + 1) as f64
}

/// Natural log of the sup-norm covering number bound
///
/// ```text
/// N <= ( 12 e p (V/4)^2 / (eps (V/4 - 1)) )^p,   p = r(d+2)+1
/// ```
///
/// Only defined for `V > 4`.
pub fn log_covering_bound(eps: f64, sieve: &SieveSpec) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(EnnError::invalid(format!("eps must be positive and finite, got {eps}")));
    }
    if !(sieve.v > 4.0) {
        return Err(EnnError::Domain("covering bound undefined for V <= 4".into()));
    }
    let p = param_count(sieve.r, sieve.d);
    let quarter = sieve.v / 4.0;
    let log_inner = (12.0 * std::f64::consts::E * p).ln() + 2.0 * quarter.ln() - eps.ln() - (quarter - 1.0).ln();
    Ok(p * log_inner)
}

/// Inputs to [`deviation_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub eps: f64,
    pub n: u64,
    /// Range bound: the loss class maps into `[0, b]`.
    pub b: f64,
    pub sieve: SieveSpec,
    /// Optional `(M1, M2)` with `|y| < M1`, `|f| < M2`. When given, the loss-class
    /// cover is obtained from a network cover shrunk by [`lipschitz_transfer`].
    #[serde(default)]
    pub transfer: Option<(f64, f64)>,
}

impl BoundInputs {
    pub fn new(eps: f64, n: u64, b: f64, sieve: SieveSpec) -> Result<Self> {
        let inputs = BoundInputs { eps, n, b, sieve, transfer: None };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(EnnError::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.b > 0.0) {
            return Err(EnnError::invalid(format!("range bound B must be positive, got {}", self.b)));
        }
        if self.n == 0 {
            return Err(EnnError::invalid("sample size n must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBound {
    /// The bound clamped to `[0, 1]`.
    pub value: f64,
    /// Natural log of the unclamped bound.
    pub log_value: f64,
    /// The unclamped bound is at least one, so it carries no information.
    pub vacuous: bool,
}

/// `P(sup |empirical - expected| > eps) <= 2 N(eps/3) exp(-2 n eps^2 / (9 B^2))`,
/// combined in log space and clamped to 1.
pub fn deviation_bound(inputs: &BoundInputs) -> Result<f64> {
    deviation_bound_detail(inputs).map(|d| d.value)
}

pub fn deviation_bound_detail(inputs: &BoundInputs) -> Result<DeviationBound> {
    inputs.validate()?;
    // The covering bound is already written for radius eps/3 in terms of eps.
    let cover_eps = match inputs.transfer {
        None => inputs.eps,
        Some((m1, m2)) => {
            let l = lipschitz_transfer(m1, m2)?;
            if l <= 0.0 {
                return Err(EnnError::invalid("Lipschitz transfer factor must be positive"));
            }
            inputs.eps / l
        }
    };
    let log_cover = log_covering_bound(cover_eps, &inputs.sieve)?;
    let exponent = 2.0 * inputs.n as f64 * inputs.eps * inputs.eps / (9.0 * inputs.b * inputs.b);
    let log_value = std::f64::consts::LN_2 + log_cover - exponent;
    Ok(DeviationBound { value: log_value.min(0.0).exp(), log_value, vacuous: log_value >= 0.0 })
}

/// How the sieve width grows with the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GrowthRule {
    /// `r_n = ceil(n^exponent)`.
    Power {
        exponent: f64,
    },
    Constant {
        r: usize,
    },
    /// `r_n = n`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSchedule {
    pub rule: GrowthRule,
    pub d: usize,
}

impl GrowthSchedule {
    pub fn power(exponent: f64, d: usize) -> Self {
        GrowthSchedule { rule: GrowthRule::Power { exponent }, d }
    }

    pub fn width(&self, n: u64) -> usize {
        let r = match self.rule {
            // Round before ceil so exact powers (10000^0.25 = 10) are not bumped up.
            GrowthRule::Power { exponent } => {
                let raw = (n as f64).powf(exponent);
                let rounded = raw.round();
                if (raw - rounded).abs() < 1e-9 * rounded.max(1.0) {
                    rounded as usize
                } else {
                    raw.ceil() as usize
                }
            }
            GrowthRule::Constant { r } => r,
            GrowthRule::Linear => n as usize,
        };
        r.max(1)
    }

    /// The sieve at sample size `n` with the default budgets of [`default_budgets`].
    pub fn sieve(&self, n: u64) -> Result<SieveSpec> {
        let r = self.width(n);
        let (v, m) = default_budgets(r);
        SieveSpec::new(r, v, m, self.d)
    }
}

/// Default budgets for width `r`: `V = max(4, 2 + r)`, `M = 10 (1 + ln r)`.
pub fn default_budgets(r: usize) -> (f64, f64) {
    let r = r.max(1) as f64;
    ((2.0 + r).max(4.0), 10.0 * (1.0 + r.ln()))
}

/// `p ln p / n` with `p = r_n(d+2)+1`. The schedule supports a uniform law of
/// large numbers when this ratio tends to zero along `n`.
pub fn growth_condition_ratio(schedule: &GrowthSchedule, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(EnnError::invalid("growth ratio needs n >= 2"));
    }
    let p = param_count(schedule.width(n), schedule.d);
    Ok(p * p.ln() / n as f64)
}

/// Smallest separation radius (exclusive) for which the population expectile
/// risk strictly separates `f0` from every `f` at empirical distance `>= eps`:
/// `sqrt(sigma2 |1 - 2 tau| / min(tau, 1 - tau))`. Zero at `tau = 1/2`.
pub fn identifiability_threshold(tau: Tau, sigma2: f64) -> Result<f64> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(EnnError::invalid(format!("sigma2 must be finite and >= 0, got {sigma2}")));
    }
    let t = tau.value();
    if t == 0.5 {
        return Ok(0.0);
    }
    Ok((sigma2 * (1.0 - 2.0 * t).abs() / t.min(1.0 - t)).sqrt())
}

/// Lower bound on the population risk gap at separation `eps`:
/// `min(tau, 1-tau)(sigma2 + eps^2) - max(tau, 1-tau) sigma2`.
pub fn identifiability_gap(tau: Tau, sigma2: f64, eps: f64) -> f64 {
    let t = tau.value();
    let lo = t.min(1.0 - t);
    let hi = t.max(1.0 - t);
    lo * (sigma2 + eps * eps) - hi * sigma2
}

/// Factor `2 (M1 + M2)` turning an eps-cover of the networks into a
/// `2 (M1 + M2) eps`-cover of the one-sided squared-residual class.
pub fn lipschitz_transfer(m1: f64, m2: f64) -> Result<f64> {
    if !(m1 >= 0.0 && m2 >= 0.0) {
        return Err(EnnError::invalid(format!("M1, M2 must be >= 0, got {m1}, {m2}")));
    }
    Ok(2.0 * (m1 + m2))
}
