//! One-sample Kolmogorov-Smirnov statistic.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{EnnError, Result};

/// `sup_x |F_n(x) - F(x)|` for the empirical CDF of `samples` against `cdf`,
/// via `max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)` over the order statistics.
pub fn ks_statistic<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(EnnError::invalid("KS statistic of an empty sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(EnnError::invalid("KS statistic of a sample containing NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        acc.max(above.abs()).max(below.abs())
    }))
}

/// Critical value `c / sqrt(n)`; `c = 1.63` gives the asymptotic 1% level.
pub fn ks_critical_value(n: usize, c: f64) -> f64 {
    c / (n as f64).sqrt()
}

/// CDF of `N(0, variance)`.
pub fn normal_cdf(variance: f64) -> Result<impl Fn(f64) -> f64> {
    let dist = Normal::new(0.0, variance.sqrt())
        .map_err(|e| EnnError::invalid(format!("invalid normal variance {variance}: {e}")))?;
    Ok(move |x| dist.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn single_point_at_median() {
        let phi = normal_cdf(1.0).unwrap();
        assert!((ks_statistic(&[0.0], phi).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn samples_below_support() {
        let unif = |x: f64| x.clamp(0.0, 1.0);
        assert_eq!(ks_statistic(&[-3.0, -2.0, -1.0], unif).unwrap(), 1.0);
    }

    #[test]
    fn uniform_grid_against_uniform() {
        // Midpoints (i - 1/2)/n have KS distance exactly 1/(2n).
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let v = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((v - 0.05).abs() < 1e-15);
    }

    #[test]
    fn reference_draws_pass() {
        let mut rng = rng_from(2024);
        let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v = ks_statistic(&xs, normal_cdf(1.0).unwrap()).unwrap();
        assert!(v < ks_critical_value(10_000, 1.63) && v < 0.03, "{v}");
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(ks_statistic(&[], |x| x).is_err());
        assert!(ks_statistic(&[f64::NAN], |x| x).is_err());
        assert!(normal_cdf(-1.0).is_err());
    }
}
