use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{EnnError, Result};
use crate::net::{forward_unchecked, in_sieve, Dataset, EnnParams, SieveSpec};
use crate::seed::rng_from;

/// True regression function on `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Constant {
        c: f64,
    },
    /// `a . x + b`.
    Linear {
        a: Vec<f64>,
        b: f64,
    },
    /// `amplitude * sin(2 pi frequency * mean(x))`.
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// A network that lies inside `sieve`.
    FeasibleEnn {
        params: EnnParams,
        sieve: SieveSpec,
    },
}

impl TargetSpec {
    /// Width-2 network on one input used as the default realizable target.
    pub fn reference_enn() -> Self {
        let params = EnnParams {
            alpha0: 0.5,
            alpha: vec![1.5, -1.0],
            gamma: vec![vec![3.0], vec![-2.0]],
            gamma0: vec![-1.0, 0.5],
        };
        let sieve = SieveSpec { r: 2, v: 4.0, m: 5.0, d: 1 };
        TargetSpec::FeasibleEnn { params, sieve }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(EnnError::config(format!("target {what} must be finite")))
            }
        };
        match self {
            TargetSpec::Constant { c } => finite(*c, "constant"),
            TargetSpec::Linear { a, b } => {
                if a.len() != d {
                    return Err(EnnError::config(format!("linear target has {} slopes for dimension {d}", a.len())));
                }
                a.iter().try_for_each(|v| finite(*v, "slope"))?;
                finite(*b, "intercept")
            }
            TargetSpec::Sine { amplitude, frequency } => {
                finite(*amplitude, "amplitude")?;
                finite(*frequency, "frequency")
            }
            TargetSpec::FeasibleEnn { params, sieve } => {
                params.validate().map_err(|e| EnnError::config(e.to_string()))?;
                if sieve.d != d {
                    return Err(EnnError::config(format!(
                        "network target has dimension {}, experiment uses {d}",
                        sieve.d
                    )));
                }
                if !in_sieve(params, sieve) {
                    return Err(EnnError::config("network target lies outside its declared sieve"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TargetSpec::Constant { c } => *c,
            TargetSpec::Linear { a, b } => a.iter().zip(x).fold(*b, |acc, (ai, xi)| acc + ai * xi),
            TargetSpec::Sine { amplitude, frequency } => {
                let mean = x.iter().sum::<f64>() / x.len() as f64;
                amplitude * (std::f64::consts::TAU * frequency * mean).sin()
            }
            TargetSpec::FeasibleEnn { params, .. } => forward_unchecked(params, x),
        }
    }
}

/// Mean-zero additive noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Gaussian {
        sigma2: f64,
    },
    /// Uniform on `[-a, a]`.
    Uniform {
        a: f64,
    },
    None,
}

impl NoiseSpec {
    pub fn sigma2(&self) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma2 } => sigma2,
            NoiseSpec::Uniform { a } => a * a / 3.0,
            NoiseSpec::None => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Gaussian { sigma2 } if !(sigma2 >= 0.0 && sigma2.is_finite()) => {
                Err(EnnError::config(format!("gaussian noise variance must be finite and >= 0, got {sigma2}")))
            }
            NoiseSpec::Uniform { a } if !(a >= 0.0 && a.is_finite()) => {
                Err(EnnError::config(format!("uniform noise half-width must be finite and >= 0, got {a}")))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn sampler(&self) -> Result<impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64> {
        self.validate()?;
        let spec = *self;
        let normal = Normal::new(0.0, spec.sigma2().sqrt()).map_err(|e| EnnError::config(e.to_string()))?;
        Ok(move |rng: &mut rand_chacha::ChaCha8Rng| match spec {
            NoiseSpec::Gaussian { sigma2 } if sigma2 > 0.0 => normal.sample(rng),
            NoiseSpec::Uniform { a } if a > 0.0 => rng.random_range(-a..=a),
            _ => 0.0,
        })
    }
}

/// `n` rows uniform on `[0, 1]^d` with responses `f0(x) + noise`.
pub fn gen_data(target: &TargetSpec, noise: &NoiseSpec, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if d == 0 {
        return Err(EnnError::invalid("dimension must be positive"));
    }
    target.validate(d)?;
    let draw_noise = noise.sampler()?;
    let mut rng = rng_from(seed);
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let start = x.len();
        x.extend((0..d).map(|_| rng.random::<f64>()));
        let f = target.eval(&x[start..]);
        y.push(f + draw_noise(&mut rng));
    }
    Dataset::new(x, d, y)
}

/// Draws `n` covariate rows only.
pub fn gen_design(n: usize, d: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..n * d).map(|_| rng.random::<f64>()).collect()
}
