//! Synthetic internal/external control samples.
//!
//! Every subject draws its `p` standard-normal covariates first, then its
//! outcome noise, so a given stream always produces the same sample.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::data::{ControlSample, Covariates, OutcomeKind, Source};
use crate::exec::{map_indexed, replicate_rng, Execution};
use crate::stats::pairwise_sum;
use crate::{Error, Result};

fn covariates<R: Rng + ?Sized>(p: usize, rng: &mut R, row: &mut Vec<f64>) -> f64 {
    row.clear();
    row.extend((0..p).map(|_| -> f64 { StandardNormal.sample(rng) }));
    row.iter().sum()
}

fn finish(
    outcomes: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    p: usize,
    kind: OutcomeKind,
    source: Source,
) -> Result<ControlSample> {
    let sample = ControlSample::new(outcomes, kind, source)?;
    if p == 0 {
        return Ok(sample);
    }
    sample.with_covariates(Covariates::from_row_major(n, p, x)?)
}

/// `Y = Xᵀβ + shift + ε` with `X ~ N(0, I_p)`, `ε ~ N(0, 1)` and a common
/// coefficient `beta` on every covariate. Pass `shift = 0` for the internal
/// sample and `shift = Δx` for the external one.
pub fn gen_normal<R: Rng + ?Sized>(
    n: usize,
    shift: f64,
    p: usize,
    beta: f64,
    source: Source,
    rng: &mut R,
) -> Result<ControlSample> {
    gen_continuous(n, shift, p, beta, source, rng, |r| StandardNormal.sample(r))
}

/// As [`gen_normal`] with Student-t noise of `df` degrees of freedom (scale 1).
pub fn gen_student_t<R: Rng + ?Sized>(
    n: usize,
    shift: f64,
    p: usize,
    beta: f64,
    df: f64,
    source: Source,
    rng: &mut R,
) -> Result<ControlSample> {
    if !(df > 2.0) {
        return Err(Error::InvalidConfig(format!(
            "Student-t df must exceed 2, got {df}"
        )));
    }
    let t = StudentT::new(df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    gen_continuous(n, shift, p, beta, source, rng, |r| t.sample(r))
}

fn gen_continuous<R: Rng + ?Sized>(
    n: usize,
    shift: f64,
    p: usize,
    beta: f64,
    source: Source,
    rng: &mut R,
    mut noise: impl FnMut(&mut R) -> f64,
) -> Result<ControlSample> {
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(p);
    for _ in 0..n {
        let xsum = covariates(p, rng, &mut row);
        x.extend_from_slice(&row);
        y.push(beta * xsum + shift + noise(rng));
    }
    finish(y, x, n, p, OutcomeKind::Continuous, source)
}

fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

/// Bernoulli outcomes with `P(Y = 1) = 1/(1 + exp(Xᵀβ − logit(p0 + shift)))`.
///
/// At `β = 0` (or `p = 0`) the success probability is exactly `p0 + shift`.
pub fn gen_binary<R: Rng + ?Sized>(
    n: usize,
    shift: f64,
    p0: f64,
    p: usize,
    beta: f64,
    source: Source,
    rng: &mut R,
) -> Result<ControlSample> {
    let q = p0 + shift;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "success probability p0 + delta = {q} must lie in (0, 1)"
        )));
    }
    let intercept = logit(q);
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(p);
    for _ in 0..n {
        let xsum = covariates(p, rng, &mut row);
        x.extend_from_slice(&row);
        let prob = 1.0 / (1.0 + (beta * xsum - intercept).exp());
        let u: f64 = rng.random();
        y.push(if u < prob { 1.0 } else { 0.0 });
    }
    finish(y, x, n, p, OutcomeKind::Binary, source)
}

/// Where a true control rate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthSource {
    Exact,
    MonteCarlo,
}

impl TruthSource {
    pub fn label(self) -> &'static str {
        match self {
            TruthSource::Exact => "exact",
            TruthSource::MonteCarlo => "monte_carlo",
        }
    }
}

/// Draws used by the Monte-Carlo oracle for the marginal binary rate.
pub const TRUTH_DRAWS: usize = 10_000_000;
const TRUTH_SEED: u64 = 0x7275_7468;
const TRUTH_CHUNK: usize = 100_000;

/// Marginal success rate `E[P(Y = 1)]` of [`gen_binary`] for the given
/// parameters.
///
/// Exact at `β = 0` or `p = 0`. Otherwise `Xᵀβ ~ N(0, pβ²)` and the rate is
/// estimated from 10⁷ draws of that linear predictor with a fixed seed; the
/// result is cached per parameter set.
pub fn true_binary_rate(p0: f64, shift: f64, p: usize, beta: f64) -> (f64, TruthSource) {
    if p == 0 || beta == 0.0 {
        return (p0 + shift, TruthSource::Exact);
    }
    static CACHE: OnceLock<Mutex<HashMap<[u64; 4], f64>>> = OnceLock::new();
    let key = [p0.to_bits(), shift.to_bits(), p as u64, beta.to_bits()];
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("truth cache poisoned").get(&key) {
        return (*v, TruthSource::MonteCarlo);
    }
    let intercept = logit(p0 + shift);
    let sd = beta * (p as f64).sqrt();
    let chunks = TRUTH_DRAWS / TRUTH_CHUNK;
    let sums = map_indexed(chunks, Execution::Parallel, |c| {
        let mut rng = replicate_rng(TRUTH_SEED, c as u64);
        let probs: Vec<f64> = (0..TRUTH_CHUNK)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                1.0 / (1.0 + (sd * z - intercept).exp())
            })
            .collect();
        pairwise_sum(&probs)
    });
    let rate = pairwise_sum(&sums) / TRUTH_DRAWS as f64;
    cache
        .lock()
        .expect("truth cache poisoned")
        .insert(key, rate);
    (rate, TruthSource::MonteCarlo)
}
