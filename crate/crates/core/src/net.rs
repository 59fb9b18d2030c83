//! The one-hidden-layer expectile network, its asymmetric squared loss, and
//! the L1 sieve that constrains it.
//!
//! A network of width `r` on inputs of dimension `d` computes
//!
//! ```text
//! f(x) = alpha0 + sum_j alpha[j] * sigmoid(gamma[j] . x + gamma0[j])
//! ```
//!
//! and belongs to the sieve `(r, v, m)` when `|alpha0| + sum_j |alpha[j]| <= v`
//! and every hidden row satisfies `|gamma0[j]| + sum_i |gamma[j][i]| <= m`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EnnError, Result};
use crate::seed::rng_from;

/// Expectile level, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tau(f64);

impl Tau {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Tau(value))
        } else {
            Err(EnnError::invalid(format!("tau must lie in (0, 1), got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Asymmetric weight of a residual `y - f`: `tau` when `y >= f`, else `1 - tau`.
    #[inline]
    pub fn weight(self, y: f64, f: f64) -> f64 {
        if y >= f {
            self.0
        } else {
            1.0 - self.0
        }
    }
}

impl TryFrom<f64> for Tau {
    type Error = EnnError;
    fn try_from(value: f64) -> Result<Self> {
        Tau::new(value)
    }
}

impl From<Tau> for f64 {
    fn from(t: Tau) -> f64 {
        t.0
    }
}

/// The constrained class: width `r`, output budget `v`, hidden budget `m`,
/// input dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSieve")]
pub struct SieveSpec {
    pub r: usize,
    pub v: f64,
    pub m: f64,
    pub d: usize,
}

#[derive(Deserialize)]
struct RawSieve {
    r: usize,
    v: f64,
    m: f64,
    d: usize,
}

impl TryFrom<RawSieve> for SieveSpec {
    type Error = EnnError;
    fn try_from(raw: RawSieve) -> Result<Self> {
        SieveSpec::new(raw.r, raw.v, raw.m, raw.d)
    }
}

impl SieveSpec {
    pub fn new(r: usize, v: f64, m: f64, d: usize) -> Result<Self> {
        if r == 0 {
            return Err(EnnError::invalid("sieve width r must be positive"));
        }
        if d == 0 {
            return Err(EnnError::invalid("input dimension d must be positive"));
        }
        if !(v >= 4.0) || !v.is_finite() {
            return Err(EnnError::invalid(format!("output budget V must be finite and >= 4, got {v}")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(EnnError::invalid(format!("hidden budget M must be finite and > 0, got {m}")));
        }
        Ok(SieveSpec { r, v, m, d })
    }
}

/// All trainable weights of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnnParams {
    pub alpha0: f64,
    pub alpha: Vec<f64>,
    /// Row `j` holds the input weights of hidden unit `j`.
    pub gamma: Vec<Vec<f64>>,
    pub gamma0: Vec<f64>,
}

impl EnnParams {
    pub fn new(alpha0: f64, alpha: Vec<f64>, gamma: Vec<Vec<f64>>, gamma0: Vec<f64>) -> Result<Self> {
        let p = EnnParams { alpha0, alpha, gamma, gamma0 };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(r: usize, d: usize) -> Self {
        EnnParams { alpha0: 0.0, alpha: vec![0.0; r], gamma: vec![vec![0.0; d]; r], gamma0: vec![0.0; r] }
    }

    /// Checks shape consistency and finiteness.
    pub fn validate(&self) -> Result<()> {
        let r = self.alpha.len();
        if self.gamma.len() != r || self.gamma0.len() != r {
            return Err(EnnError::invalid(format!(
                "width mismatch: alpha {}, gamma rows {}, gamma0 {}",
                r,
                self.gamma.len(),
                self.gamma0.len()
            )));
        }
        let d = self.gamma.first().map_or(0, Vec::len);
        if self.gamma.iter().any(|row| row.len() != d) {
            return Err(EnnError::invalid("gamma rows have unequal lengths"));
        }
        if !self.flat().iter().all(|v| v.is_finite()) {
            return Err(EnnError::invalid("parameters must be finite"));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.alpha.len()
    }

    /// Input dimension, or `None` for a width-zero network.
    pub fn dim(&self) -> Option<usize> {
        self.gamma.first().map(Vec::len)
    }

    pub fn n_params(&self) -> usize {
        let d = self.dim().unwrap_or(0);
        1 + self.width() * (d + 2)
    }

    /// Packs the parameters as `[alpha0, alpha.., (gamma0[j], gamma[j]..) for each j]`,
    /// i.e. one contiguous block per L1 group of the sieve.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.push(self.alpha0);
        out.extend_from_slice(&self.alpha);
        for (row, b) in self.gamma.iter().zip(&self.gamma0) {
            out.push(*b);
            out.extend_from_slice(row);
        }
        out
    }

    /// Inverse of [`EnnParams::flat`].
    pub fn from_flat(flat: &[f64], r: usize, d: usize) -> Result<Self> {
        if flat.len() != 1 + r * (d + 2) {
            return Err(EnnError::invalid(format!("flat vector of length {} does not match r={r}, d={d}", flat.len())));
        }
        let alpha0 = flat[0];
        let alpha = flat[1..=r].to_vec();
        let mut gamma = Vec::with_capacity(r);
        let mut gamma0 = Vec::with_capacity(r);
        for block in flat[1 + r..].chunks_exact(d + 1) {
            gamma0.push(block[0]);
            gamma.push(block[1..].to_vec());
        }
        Ok(EnnParams { alpha0, alpha, gamma, gamma0 })
    }

    fn check_input(&self, d: usize) -> Result<()> {
        match self.dim() {
            Some(pd) if pd != d => {
                Err(EnnError::invalid(format!("input dimension {d} does not match network dimension {pd}")))
            }
            _ => Ok(()),
        }
    }
}

/// Design matrix (row-major, `n x d`) and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    d: usize,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, d: usize, y: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(EnnError::invalid("dataset dimension must be positive"));
        }
        if x.len() != y.len() * d {
            return Err(EnnError::invalid(format!(
                "design has {} entries, expected {} rows x {} columns",
                x.len(),
                y.len(),
                d
            )));
        }
        if !x.iter().chain(&y).all(|v| v.is_finite()) {
            return Err(EnnError::invalid("dataset entries must be finite"));
        }
        Ok(Dataset { x, d, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != y.len() {
            return Err(EnnError::invalid("row count of x differs from length of y"));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(EnnError::invalid("ragged design matrix"));
        }
        Dataset::new(rows.concat(), d.max(1), y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d)
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.y.is_empty() {
            Err(EnnError::invalid("dataset is empty"))
        } else {
            Ok(())
        }
    }
}

/// Logistic sigmoid, evaluated without overflow for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn pre_activation(row: &[f64], bias: f64, x: &[f64]) -> f64 {
    row.iter().zip(x).fold(bias, |acc, (g, xi)| acc + g * xi)
}

#[inline]
pub(crate) fn forward_unchecked(params: &EnnParams, x: &[f64]) -> f64 {
    params
        .alpha
        .iter()
        .zip(params.gamma.iter().zip(&params.gamma0))
        .fold(params.alpha0, |acc, (a, (row, b))| acc + a * sigmoid(pre_activation(row, *b, x)))
}

pub fn forward(params: &EnnParams, x: &[f64]) -> Result<f64> {
    params.check_input(x.len())?;
    Ok(forward_unchecked(params, x))
}

/// Network outputs at every design row.
pub fn predict(params: &EnnParams, data: &Dataset) -> Result<Vec<f64>> {
    params.check_input(data.d())?;
    Ok(data.rows().map(|x| forward_unchecked(params, x)).collect())
}

/// Asymmetric squared loss. Non-finite input propagates as NaN.
#[inline]
pub fn loss_tau(tau: Tau, y: f64, f: f64) -> f64 {
    let r = y - f;
    tau.weight(y, f) * r * r
}

/// Derivative of [`loss_tau`] with respect to `f`.
#[inline]
pub fn loss_grad_f(tau: Tau, y: f64, f: f64) -> f64 {
    -2.0 * tau.weight(y, f) * (y - f)
}

pub fn empirical_risk(tau: Tau, params: &EnnParams, data: &Dataset) -> Result<f64> {
    data.check_nonempty()?;
    params.check_input(data.d())?;
    Ok(risk_unchecked(tau, params, data))
}

pub(crate) fn risk_unchecked(tau: Tau, params: &EnnParams, data: &Dataset) -> f64 {
    let total: f64 = data.rows().zip(data.y()).map(|(x, &y)| loss_tau(tau, y, forward_unchecked(params, x))).sum();
    total / data.n() as f64
}

/// Gradient of [`empirical_risk`], laid out as an [`EnnParams`].
pub fn grad_params(tau: Tau, params: &EnnParams, data: &Dataset) -> Result<EnnParams> {
    data.check_nonempty()?;
    params.check_input(data.d())?;
    Ok(risk_and_grad(tau, params, data).1)
}

/// Risk and gradient in one pass over the data.
pub(crate) fn risk_and_grad(tau: Tau, params: &EnnParams, data: &Dataset) -> (f64, EnnParams) {
    let r = params.width();
    let d = data.d();
    let mut grad = EnnParams::zeros(r, d);
    let mut hidden = vec![0.0; r];
    let mut risk = 0.0;
    for (x, &y) in data.rows().zip(data.y()) {
        let mut f = params.alpha0;
        for j in 0..r {
            let s = sigmoid(pre_activation(&params.gamma[j], params.gamma0[j], x));
            hidden[j] = s;
            f += params.alpha[j] * s;
        }
        risk += loss_tau(tau, y, f);
        let g = loss_grad_f(tau, y, f);
        if g == 0.0 {
            continue;
        }
        grad.alpha0 += g;
        for j in 0..r {
            let s = hidden[j];
            grad.alpha[j] += g * s;
            let back = g * params.alpha[j] * s * (1.0 - s);
            grad.gamma0[j] += back;
            for (gk, xk) in grad.gamma[j].iter_mut().zip(x) {
                *gk += back * xk;
            }
        }
    }
    let inv_n = 1.0 / data.n() as f64;
    grad.alpha0 *= inv_n;
    for j in 0..r {
        grad.alpha[j] *= inv_n;
        grad.gamma0[j] *= inv_n;
        grad.gamma[j].iter_mut().for_each(|v| *v *= inv_n);
    }
    (risk * inv_n, grad)
}

fn l1(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |acc, x| acc + x.abs())
}

/// `|alpha0| + sum_j |alpha[j]|`.
pub fn output_l1(params: &EnnParams) -> f64 {
    l1(std::iter::once(params.alpha0).chain(params.alpha.iter().copied()))
}

/// `|gamma0[j]| + sum_i |gamma[j][i]|` for hidden unit `j`.
pub fn hidden_l1(params: &EnnParams, j: usize) -> f64 {
    l1(std::iter::once(params.gamma0[j]).chain(params.gamma[j].iter().copied()))
}

pub fn in_sieve(params: &EnnParams, sieve: &SieveSpec) -> bool {
    if params.width() != sieve.r || params.dim() != Some(sieve.d) {
        return false;
    }
    output_l1(params) <= sieve.v && (0..params.width()).all(|j| hidden_l1(params, j) <= sieve.m)
}

/// Shrinks `v` towards zero until its L1 norm, summed left to right, is at
/// most `radius`. Absorbs the last-ulp overshoot of scaling and soft-thresholding.
fn enforce_l1(v: &mut [f64], radius: f64) {
    let mut norm = l1(v.iter().copied());
    if norm <= radius {
        return;
    }
    let scale = radius / norm;
    v.iter_mut().for_each(|x| *x *= scale);
    norm = l1(v.iter().copied());
    while norm > radius {
        v.iter_mut().for_each(|x| *x *= 1.0 - f64::EPSILON);
        norm = l1(v.iter().copied());
    }
}

/// Euclidean projection of `v` onto `{w : ||w||_1 <= radius}` by sorting the
/// magnitudes and soft-thresholding at the unique shift that lands on the
/// sphere. Points already inside the ball are left untouched.
pub fn project_l1_ball(v: &mut [f64], radius: f64) {
    debug_assert!(radius >= 0.0);
    if l1(v.iter().copied()) <= radius {
        return;
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - theta).max(0.0);
    }
    enforce_l1(v, radius);
}

/// Projects each L1 group of `params` onto its ball. Feasible groups are
/// returned bit-for-bit unchanged.
pub fn project_sieve(params: &EnnParams, sieve: &SieveSpec) -> EnnParams {
    let mut out = params.clone();
    project_sieve_in_place(&mut out, sieve);
    out
}

pub(crate) fn project_sieve_in_place(params: &mut EnnParams, sieve: &SieveSpec) {
    let mut head = Vec::with_capacity(params.width() + 1);
    head.push(params.alpha0);
    head.extend_from_slice(&params.alpha);
    project_l1_ball(&mut head, sieve.v);
    params.alpha0 = head[0];
    params.alpha.copy_from_slice(&head[1..]);

    let mut row = Vec::new();
    for j in 0..params.width() {
        row.clear();
        row.push(params.gamma0[j]);
        row.extend_from_slice(&params.gamma[j]);
        project_l1_ball(&mut row, sieve.m);
        params.gamma0[j] = row[0];
        params.gamma[j].copy_from_slice(&row[1..]);
    }
}

/// Draws a random member of the sieve: coordinates uniform on [-1, 1], then
/// each L1 group rescaled to a uniformly random fraction of its budget.
pub fn sample_sieve(sieve: &SieveSpec, seed: u64) -> EnnParams {
    let mut rng = rng_from(seed);
    let mut group = |len: usize, budget: f64| -> Vec<f64> {
        let mut g: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let frac: f64 = rng.random();
        let norm = l1(g.iter().copied());
        if norm > 0.0 {
            let s = frac * budget / norm;
            g.iter_mut().for_each(|x| *x *= s);
        }
        enforce_l1(&mut g, budget);
        g
    };
    let head = group(sieve.r + 1, sieve.v);
    let mut gamma = Vec::with_capacity(sieve.r);
    let mut gamma0 = Vec::with_capacity(sieve.r);
    for _ in 0..sieve.r {
        let row = group(sieve.d + 1, sieve.m);
        gamma0.push(row[0]);
        gamma.push(row[1..].to_vec());
    }
    EnnParams { alpha0: head[0], alpha: head[1..].to_vec(), gamma, gamma0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tau(v: f64) -> Tau {
        Tau::new(v).unwrap()
    }

    fn single(alpha0: f64, alpha: f64, gamma: f64, gamma0: f64) -> EnnParams {
        EnnParams::new(alpha0, vec![alpha], vec![vec![gamma]], vec![gamma0]).unwrap()
    }

    #[test]
    fn forward_examples() {
        assert_eq!(forward(&single(1.0, 2.0, 0.0, 0.0), &[0.0]).unwrap(), 2.0);
        assert_eq!(forward(&EnnParams::zeros(3, 2), &[0.4, -7.0]).unwrap(), 0.0);
        // 1 / (1 + e^-1), evaluated to 20 digits elsewhere.
        let v = forward(&single(0.0, 1.0, 1.0, 0.0), &[1.0]).unwrap();
        assert!((v - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let p = EnnParams::zeros(2, 3);
        assert!(matches!(forward(&p, &[1.0]), Err(EnnError::InvalidArgument(_))));
    }

    #[test]
    fn params_validation() {
        assert!(EnnParams::new(0.0, vec![1.0, 2.0], vec![vec![0.0]], vec![0.0]).is_err());
        assert!(EnnParams::new(f64::NAN, vec![], vec![], vec![]).is_err());
        assert!(EnnParams::new(0.0, vec![1.0], vec![vec![0.0]], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn loss_examples() {
        assert!((loss_tau(tau(0.7), 5.0, 2.0) - 6.3).abs() < 1e-12);
        assert!((loss_tau(tau(0.7), 2.0, 5.0) - 2.7).abs() < 1e-12);
        assert_eq!(loss_tau(tau(0.3), 1.5, 1.5), 0.0);
        assert!((loss_grad_f(tau(0.7), 2.0, 5.0) - 1.8).abs() < 1e-12);
        assert!((loss_grad_f(tau(0.7), 5.0, 2.0) + 4.2).abs() < 1e-12);
        assert_eq!(loss_grad_f(tau(0.7), 3.0, 3.0), 0.0);
    }

    #[test]
    fn tau_bounds() {
        assert!(Tau::new(0.0).is_err());
        assert!(Tau::new(1.0).is_err());
        assert!(Tau::new(f64::NAN).is_err());
        assert!(Tau::new(0.5).is_ok());
    }

    #[test]
    fn risk_examples() {
        let one = Dataset::new(vec![0.3], 1, vec![1.0]).unwrap();
        let z = EnnParams::zeros(1, 1);
        assert!((empirical_risk(tau(0.5), &z, &one).unwrap() - 0.5).abs() < 1e-15);
        let two = Dataset::new(vec![0.0, 1.0], 1, vec![2.0, -2.0]).unwrap();
        assert!((empirical_risk(tau(0.9), &z, &two).unwrap() - 2.0).abs() < 1e-12);

        let p = single(0.3, -1.2, 2.0, 0.5);
        let xs = vec![0.1, 0.5, 0.9];
        let ys: Vec<f64> = xs.iter().map(|x| forward(&p, &[*x]).unwrap()).collect();
        let fit = Dataset::new(xs, 1, ys).unwrap();
        assert_eq!(empirical_risk(tau(0.8), &p, &fit).unwrap(), 0.0);
        let g = grad_params(tau(0.8), &p, &fit).unwrap();
        assert!(g.flat().iter().all(|v| *v == 0.0));

        let empty = Dataset::new(vec![], 1, vec![]).unwrap();
        assert!(empirical_risk(tau(0.5), &z, &empty).is_err());
        assert!(grad_params(tau(0.5), &z, &empty).is_err());
    }

    #[test]
    fn constant_model_gradient() {
        let t = tau(0.8);
        let p = EnnParams::new(0.7, vec![0.0, 0.0], vec![vec![1.0], vec![-2.0]], vec![0.3, 0.1]).unwrap();
        let data = Dataset::new(vec![0.0, 0.2, 0.4, 0.6], 1, vec![1.5, -0.2, 0.7, 3.0]).unwrap();
        let expected = data.y().iter().map(|&y| 2.0 * t.weight(y, 0.7) * (0.7 - y)).sum::<f64>() / 4.0;
        let g = grad_params(t, &p, &data).unwrap();
        assert!((g.alpha0 - expected).abs() < 1e-14);
        assert!(g.gamma0.iter().chain(g.gamma.iter().flatten()).all(|v| *v == 0.0));
    }

    #[test]
    fn sieve_membership() {
        let sieve = SieveSpec::new(1, 4.0, 5.0, 2).unwrap();
        assert!(in_sieve(&EnnParams::zeros(1, 2), &sieve));
        let over = EnnParams::new(3.0, vec![2.0], vec![vec![0.0, 0.0]], vec![0.0]).unwrap();
        assert!(!in_sieve(&over, &sieve));
        let edge = EnnParams::new(0.0, vec![0.0], vec![vec![3.0, 2.0]], vec![0.0]).unwrap();
        assert!(in_sieve(&edge, &sieve));
        assert!(!in_sieve(&EnnParams::zeros(2, 2), &sieve));
    }

    #[test]
    fn sieve_spec_validation() {
        assert!(SieveSpec::new(1, 3.9, 1.0, 1).is_err());
        assert!(SieveSpec::new(1, 4.0, 0.0, 1).is_err());
        assert!(SieveSpec::new(0, 4.0, 1.0, 1).is_err());
        assert!(SieveSpec::new(1, 4.0, 1.0, 0).is_err());
        let parsed: std::result::Result<SieveSpec, _> = serde_json::from_str(r#"{"r":1,"v":2.0,"m":1.0,"d":1}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn projection_examples() {
        let sieve = SieveSpec::new(1, 4.0, 1.0, 1).unwrap();
        let p = single(3.0, 3.0, 0.0, 0.0);
        let q = project_sieve(&p, &sieve);
        assert_eq!((q.alpha0, q.alpha[0]), (2.0, 2.0));
        let q = project_sieve(&single(5.0, 0.0, 0.0, 0.0), &sieve);
        assert_eq!((q.alpha0, q.alpha[0]), (4.0, 0.0));
        let feasible = single(1.0, -2.5, 0.4, -0.6);
        assert_eq!(project_sieve(&feasible, &sieve), feasible);
    }

    #[test]
    fn projection_handles_mixed_signs() {
        let mut v = vec![-3.0, 1.0, 0.5];
        project_l1_ball(&mut v, 2.0);
        // theta = (3 + 1 - 2) / 2 = 1
        assert_eq!(v, vec![-2.0, 0.0, 0.0]);
        let mut zero = vec![1.0, -1.0];
        project_l1_ball(&mut zero, 0.0);
        assert!(zero.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn sampling_is_deterministic_and_feasible() {
        let sieve = SieveSpec::new(3, 6.0, 2.0, 2).unwrap();
        assert_eq!(sample_sieve(&sieve, 11), sample_sieve(&sieve, 11));
        assert_ne!(sample_sieve(&sieve, 11), sample_sieve(&sieve, 12));
        assert!(in_sieve(&sample_sieve(&sieve, 11), &sieve));
    }

    #[test]
    fn thousand_samples_respect_budgets() {
        let sieve = SieveSpec::new(5, 4.0, 10.0, 3).unwrap();
        for seed in 0..1000 {
            let p = sample_sieve(&sieve, seed);
            assert!(output_l1(&p) <= 4.0);
            assert!((0..5).all(|j| hidden_l1(&p, j) <= 10.0));
        }
    }

    #[test]
    fn flat_round_trip() {
        let sieve = SieveSpec::new(4, 5.0, 3.0, 3).unwrap();
        let p = sample_sieve(&sieve, 3);
        assert_eq!(EnnParams::from_flat(&p.flat(), 4, 3).unwrap(), p);
        assert!(EnnParams::from_flat(&[0.0; 5], 4, 3).is_err());
    }

    proptest! {
        #[test]
        fn loss_is_nonnegative_and_reflects(t in 0.01f64..0.99, y in -50.0f64..50.0, f in -50.0f64..50.0) {
            let t = tau(t);
            let l = loss_tau(t, y, f);
            prop_assert!(l >= 0.0);
            prop_assert_eq!(l == 0.0, y == f);
            let reflected = loss_tau(tau(1.0 - t.value()), 2.0 * f - y, f);
            prop_assert!((l - reflected).abs() <= 1e-9 * (1.0 + l));
            let sym = loss_tau(tau(0.5), y, f);
            prop_assert!((sym - 0.5 * (y - f) * (y - f)).abs() <= 1e-12 * (1.0 + sym));
        }

        #[test]
        fn projection_is_idempotent(v in proptest::collection::vec(-20.0f64..20.0, 1..12), radius in 0.0f64..15.0) {
            let mut once = v.clone();
            project_l1_ball(&mut once, radius);
            prop_assert!(l1(once.iter().copied()) <= radius);
            let mut twice = once.clone();
            project_l1_ball(&mut twice, radius);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn forward_bounded_on_sieve(seed in any::<u64>(), x in proptest::collection::vec(-5.0f64..5.0, 2)) {
            let sieve = SieveSpec::new(4, 7.0, 3.0, 2).unwrap();
            let p = sample_sieve(&sieve, seed);
            prop_assert!(forward(&p, &x).unwrap().abs() <= sieve.v);
        }
    }
}
