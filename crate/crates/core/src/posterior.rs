//! Combined estimator, conditional posteriors for a fixed `a0`, and the
//! analytic bias/variance/MSE profile of the combined estimator.

use serde::{Deserialize, Serialize};

use crate::data::SummaryStats;
use crate::rules::BinomialCounts;
use crate::{Error, Result};

/// `(µ̂0 + a·µ̂1)/(1 + a)`.
pub fn combine(mu0: f64, mu1: f64, a: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::InvalidWeight(a));
    }
    Ok((mu0 + a * mu1) / (1.0 + a))
}

/// A combined estimate together with the inputs it was formed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedEstimate {
    pub mu_c: f64,
    pub a: f64,
    pub internal: SummaryStats,
    pub external: SummaryStats,
}

impl CombinedEstimate {
    pub fn new(internal: SummaryStats, external: SummaryStats, a: f64) -> Result<Self> {
        Ok(Self {
            mu_c: combine(internal.mean, external.mean, a)?,
            a,
            internal,
            external,
        })
    }
}

/// Variance, bias and (η-weighted) MSE of the combined estimator at a fixed `a`.
///
/// `bias` is the unweighted bias `a·δ/(1 + a)`; `mse = variance + η²·bias²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseProfile {
    pub variance: f64,
    pub bias: f64,
    pub mse: f64,
}

pub fn mse_profile(a: f64, sigma0_sq: f64, sigma1_sq: f64, delta: f64, eta: f64) -> MseProfile {
    let w = 1.0 + a;
    let variance = (sigma0_sq + a * a * sigma1_sq) / (w * w);
    let bias = a * delta / w;
    let mse = (sigma0_sq + a * a * (sigma1_sq + eta * eta * delta * delta)) / (w * w);
    MseProfile {
        variance,
        bias,
        mse,
    }
}

/// The MSE-minimizing weight `σ0²/(σ1² + η²δ²)`.
pub fn optimal_a(sigma0_sq: f64, sigma1_sq: f64, delta: f64, eta: f64) -> Result<f64> {
    let denom = sigma1_sq + eta * eta * delta * delta;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    Ok(sigma0_sq / denom)
}

/// Bias of the combined estimator at the optimal weight (η = 1):
/// `δσ0²/(σ1² + σ0² + δ²)`. Its square peaks at `δ² = σ0² + σ1²`.
pub fn bias_at_optimum(sigma0_sq: f64, sigma1_sq: f64, delta: f64) -> f64 {
    delta * sigma0_sq / (sigma1_sq + sigma0_sq + delta * delta)
}

/// Normal posterior of the control mean under a power prior with fixed `a0`,
/// plugging in the estimated variances. Returns `(mean, variance)`.
pub fn posterior_normal(s1: &SummaryStats, s0: &SummaryStats, a0: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&a0) {
        return Err(Error::InvalidWeight(a0));
    }
    if !(s1.var_of_mean > 0.0) || !(s0.var_of_mean > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let variance = 1.0 / (a0 / s1.var_of_mean + 1.0 / s0.var_of_mean);
    let mean = variance * (a0 * s1.mean / s1.var_of_mean + s0.mean / s0.var_of_mean);
    Ok((mean, variance))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

/// Beta posterior of the internal control rate under a power prior with
/// exponent `a0` and a Beta(1, 1) initial prior.
pub fn posterior_binomial(counts: &BinomialCounts, a0: f64) -> Result<BetaParams> {
    if !(0.0..=1.0).contains(&a0) {
        return Err(Error::InvalidWeight(a0));
    }
    Ok(BetaParams {
        alpha: a0 * counts.y1 + counts.y0 + 1.0,
        beta: counts.n0 + a0 * (counts.n1 - counts.y1) - counts.y0 + 1.0,
    })
}
