//! Propensity of belonging to the internal trial, fitted by case-weighted
//! logistic regression, and the odds weights that tilt the external sample
//! toward the internal covariate distribution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Covariates;
use crate::{Error, Result};

const MAX_ITER: usize = 50;
const TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;
const SEPARATION_EPS: f64 = 1e-10;
/// Clamp applied to fitted probabilities before forming odds weights.
pub const PROB_CLAMP: f64 = 1e-6;

/// Logistic model for `P(internal | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsModel {
    /// Intercept first, then one slope per covariate column.
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub deviance: f64,
    /// Some fitted probability hit 0 or 1 (quasi-complete separation).
    pub separated: bool,
}

impl PsModel {
    /// Fitted probability of being internal for one covariate row.
    pub fn probability(&self, x: &[f64]) -> f64 {
        let eta = self.coefficients[0]
            + self.coefficients[1..]
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>();
        logistic(eta)
    }
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn deviance(x: &DMatrix<f64>, y: &[f64], w: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let mut dev = 0.0;
    for i in 0..y.len() {
        let mu = logistic(eta[i]).clamp(1e-300, 1.0 - 1e-16);
        dev -= 2.0 * w[i] * (y[i] * mu.ln() + (1.0 - y[i]) * (1.0 - mu).ln());
    }
    dev
}

/// Fits the internal-membership propensity model by iteratively reweighted
/// least squares.
///
/// Rows of `x0` are labelled 1 (internal) and rows of `x1` 0 (external).
/// `case_weights`, when given, cover the stacked `x0` then `x1` rows. The
/// iteration starts from zero, halves a step whenever the deviance rises, and
/// stops once every coefficient moves by less than 1e-8 or after 50 steps.
pub fn fit_ps(x0: &Covariates, x1: &Covariates, case_weights: Option<&[f64]>) -> Result<PsModel> {
    let p = x0.ncols();
    if x1.ncols() != p {
        return Err(Error::InvalidInput(format!(
            "internal covariates have {p} columns, external have {}",
            x1.ncols()
        )));
    }
    let (n0, n1) = (x0.nrows(), x1.nrows());
    let n = n0 + n1;
    if n <= p + 1 {
        return Err(Error::SingularDesign);
    }
    let w: Vec<f64> = match case_weights {
        Some(w) if w.len() != n => {
            return Err(Error::InvalidInput(format!(
                "{} case weights for {n} stacked rows",
                w.len()
            )))
        }
        Some(w) if w.iter().any(|v| !v.is_finite() || *v < 0.0) => {
            return Err(Error::DegenerateWeights)
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; n],
    };
    let x = DMatrix::from_fn(n, p + 1, |i, j| match (i < n0, j) {
        (_, 0) => 1.0,
        (true, j) => x0.row(i)[j - 1],
        (false, j) => x1.row(i - n0)[j - 1],
    });
    let y: Vec<f64> = (0..n).map(|i| if i < n0 { 1.0 } else { 0.0 }).collect();

    // Constant columns are collinear with the intercept.
    let wsum: f64 = w.iter().sum();
    if !(wsum > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    for j in 1..=p {
        let m = (0..n).map(|i| w[i] * x[(i, j)]).sum::<f64>() / wsum;
        let v = (0..n).map(|i| w[i] * (x[(i, j)] - m).powi(2)).sum::<f64>() / wsum;
        if !(v > 1e-14 * (1.0 + m * m)) {
            return Err(Error::SingularDesign);
        }
    }

    let mut beta = DVector::zeros(p + 1);
    let mut dev = deviance(&x, &y, &w, &beta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let eta = &x * &beta;
        let mut xtwx = DMatrix::zeros(p + 1, p + 1);
        let mut xtwz = DVector::zeros(p + 1);
        for i in 0..n {
            let mu = logistic(eta[i]);
            let var = (mu * (1.0 - mu)).max(1e-12);
            let wi = w[i] * var;
            let z = eta[i] + (y[i] - mu) / var;
            let row = x.row(i);
            for a in 0..=p {
                xtwz[a] += wi * row[a] * z;
                for b in a..=p {
                    xtwx[(a, b)] += wi * row[a] * row[b];
                }
            }
        }
        for a in 0..=p {
            for b in 0..a {
                xtwx[(a, b)] = xtwx[(b, a)];
            }
        }
        let target = xtwx
            .cholesky()
            .ok_or(Error::SingularDesign)?
            .solve(&xtwz);
        let mut step = target - &beta;
        let mut candidate = &beta + &step;
        let mut cand_dev = deviance(&x, &y, &w, &candidate);
        let mut halvings = 0;
        while !(cand_dev <= dev) && halvings < MAX_HALVINGS {
            step *= 0.5;
            candidate = &beta + &step;
            cand_dev = deviance(&x, &y, &w, &candidate);
            halvings += 1;
        }
        let change = step.amax();
        if cand_dev <= dev {
            beta = candidate;
            dev = cand_dev;
        }
        if change < TOL {
            converged = true;
            break;
        }
        if halvings == MAX_HALVINGS {
            break;
        }
    }

    let eta = &x * &beta;
    let separated = eta.iter().any(|&e| {
        let mu = logistic(e);
        !(SEPARATION_EPS..=1.0 - SEPARATION_EPS).contains(&mu)
    });
    Ok(PsModel {
        coefficients: beta.iter().copied().collect(),
        converged: converged && beta.iter().all(|b| b.is_finite()),
        iterations,
        deviance: dev,
        separated,
    })
}

/// Odds-of-being-internal weights `ê/(1 − ê)` for the external rows,
/// rescaled to sum to `n1`. Probabilities are clamped to `[1e-6, 1 − 1e-6]`.
pub fn ipw_weights(model: &PsModel, x1: &Covariates) -> Vec<f64> {
    let probs: Vec<f64> = (0..x1.nrows()).map(|i| model.probability(x1.row(i))).collect();
    odds_weights(&probs)
}

/// Odds weights from given probabilities, normalized to sum to their count.
pub fn odds_weights(probs: &[f64]) -> Vec<f64> {
    let odds: Vec<f64> = probs
        .iter()
        .map(|e| {
            let e = e.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            e / (1.0 - e)
        })
        .collect();
    normalize_to_count(odds)
}

pub(crate) fn normalize_to_count(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    let scale = w.len() as f64 / total;
    w.iter_mut().for_each(|v| *v *= scale);
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceRow {
    pub covariate: usize,
    /// External minus internal mean.
    pub raw_diff: f64,
    /// Weighted external mean minus internal mean.
    pub weighted_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceTable {
    pub rows: Vec<BalanceRow>,
}

/// Per-covariate mean differences before and after weighting the external rows.
pub fn balance(x0: &Covariates, x1: &Covariates, weights: &[f64]) -> Result<BalanceTable> {
    if x0.ncols() != x1.ncols() {
        return Err(Error::InvalidInput(format!(
            "internal covariates have {} columns, external have {}",
            x0.ncols(),
            x1.ncols()
        )));
    }
    if weights.len() != x1.nrows() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} external rows",
            weights.len(),
            x1.nrows()
        )));
    }
    let wsum: f64 = weights.iter().sum();
    if !(wsum > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let rows = (0..x0.ncols())
        .map(|j| {
            let m0 = x0.column(j).sum::<f64>() / x0.nrows() as f64;
            let m1 = x1.column(j).sum::<f64>() / x1.nrows() as f64;
            let mw = x1.column(j).zip(weights).map(|(v, w)| v * w).sum::<f64>() / wsum;
            BalanceRow {
                covariate: j,
                raw_diff: m1 - m0,
                weighted_diff: mw - m0,
            }
        })
        .collect();
    Ok(BalanceTable { rows })
}
