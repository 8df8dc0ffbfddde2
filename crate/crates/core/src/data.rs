//! Samples, per-source summary statistics and the causal estimand.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Continuous,
    Binary,
}

/// Which population a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Control arm of the current trial (j = 0).
    Internal,
    /// External / historical controls (j = 1).
    External,
    /// Active arm of the current trial.
    Treated,
}

/// Dense row-major `n × p` covariate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Covariates {
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "covariate buffer has {} values, expected {rows} × {cols}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite covariate at row {}, column {}",
                bad / cols.max(1),
                bad % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged covariate rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.values[i * self.cols + j])
    }
}

/// Outcomes from one data source, optionally with baseline covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSample {
    outcomes: Vec<f64>,
    kind: OutcomeKind,
    covariates: Option<Covariates>,
    source: Source,
}

impl ControlSample {
    pub fn new(outcomes: Vec<f64>, kind: OutcomeKind, source: Source) -> Result<Self> {
        if outcomes.len() < 2 {
            return Err(Error::DegenerateSample { n: outcomes.len() });
        }
        if let Some(i) = outcomes.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite outcome at row {i}")));
        }
        if kind == OutcomeKind::Binary {
            if let Some(i) = outcomes.iter().position(|&y| y != 0.0 && y != 1.0) {
                return Err(Error::InvalidInput(format!(
                    "binary outcome at row {i} is {}, expected 0 or 1",
                    outcomes[i]
                )));
            }
        }
        Ok(Self {
            outcomes,
            kind,
            covariates: None,
            source,
        })
    }

    pub fn with_covariates(mut self, covariates: Covariates) -> Result<Self> {
        if covariates.nrows() != self.outcomes.len() {
            return Err(Error::InvalidInput(format!(
                "covariate matrix has {} rows but the sample has {} outcomes",
                covariates.nrows(),
                self.outcomes.len()
            )));
        }
        if covariates.ncols() == 0 {
            return Err(Error::InvalidInput(
                "covariate matrix needs at least one column".into(),
            ));
        }
        self.covariates = Some(covariates);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn covariates(&self) -> Option<&Covariates> {
        self.covariates.as_ref()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Number (or weighted number) of successes. Meaningful for binary samples.
    pub fn success_count(&self) -> f64 {
        self.outcomes.iter().sum()
    }

    /// Returns a copy with every outcome multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let outcomes = self.outcomes.iter().map(|y| y * factor).collect();
        let mut s = Self::new(outcomes, OutcomeKind::Continuous, self.source)?;
        s.covariates = self.covariates.clone();
        Ok(s)
    }
}

/// Sample size, mean estimate and variance of the mean estimator for one source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Variance of the mean estimator (outcome units squared), not of the outcome.
    pub var_of_mean: f64,
}

/// How the variance of a binary mean is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryVariance {
    /// Same (weighted) sample-variance route as continuous outcomes, ≈ p̂(1−p̂)/n.
    #[default]
    Plugin,
    /// Moments of the Beta(y+1, n−y+1) posterior.
    BetaPosterior,
}

/// Mean and variance-of-the-mean of `sample`, optionally under case weights.
///
/// Weights are rescaled to sum to `n`; the variance uses the `n − 1`
/// denominator convention (this is not an unbiasedness statement under
/// Dirichlet weights).
pub fn summarize(sample: &ControlSample, weights: Option<&[f64]>) -> Result<SummaryStats> {
    summarize_values(sample.outcomes(), weights)
}

/// [`summarize`] on a bare outcome slice.
pub fn summarize_values(outcomes: &[f64], weights: Option<&[f64]>) -> Result<SummaryStats> {
    let n = outcomes.len();
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    let nf = n as f64;
    if outcomes.iter().all(|y| *y == outcomes[0]) {
        if let Some(w) = weights {
            check_weights(w, n)?;
        }
        return Ok(SummaryStats {
            n,
            mean: outcomes[0],
            var_of_mean: 0.0,
        });
    }
    let (mean, ss) = match weights {
        None => {
            let mean = outcomes.iter().sum::<f64>() / nf;
            let ss: f64 = outcomes.iter().map(|y| (y - mean) * (y - mean)).sum();
            (mean, ss)
        }
        Some(w) => {
            let total = check_weights(w, n)?;
            let scale = nf / total;
            let mean = w.iter().zip(outcomes).map(|(w, y)| w * scale * y).sum::<f64>() / nf;
            let ss: f64 = w
                .iter()
                .zip(outcomes)
                .map(|(w, y)| w * scale * (y - mean) * (y - mean))
                .sum();
            (mean, ss)
        }
    };
    Ok(SummaryStats {
        n,
        mean,
        var_of_mean: ss / (nf - 1.0) / nf,
    })
}

fn check_weights(w: &[f64], n: usize) -> Result<f64> {
    if w.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} weights for {n} outcomes",
            w.len()
        )));
    }
    let total: f64 = w.iter().sum();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    Ok(total)
}

/// Summary of a binary sample with the requested variance route.
///
/// `BetaPosterior` works from the (possibly weighted) success count, so it
/// accepts the same weights as [`summarize`].
pub fn summarize_binary(
    outcomes: &[f64],
    weights: Option<&[f64]>,
    variance: BinaryVariance,
) -> Result<SummaryStats> {
    let plugin = summarize_values(outcomes, weights)?;
    match variance {
        BinaryVariance::Plugin => Ok(plugin),
        BinaryVariance::BetaPosterior => {
            let n = outcomes.len() as f64;
            beta_moments(plugin.mean * n, n).map(|(mean, var_of_mean)| SummaryStats {
                n: outcomes.len(),
                mean,
                var_of_mean,
            })
        }
    }
}

/// Posterior mean and variance of a binomial rate under a Beta(1, 1) prior.
pub fn binary_summary_beta(y_sum: u64, n: u64) -> Result<SummaryStats> {
    if n == 0 || y_sum > n {
        return Err(Error::InvalidCounts {
            successes: y_sum as f64,
            trials: n as f64,
        });
    }
    let (mean, var_of_mean) = beta_moments(y_sum as f64, n as f64)?;
    Ok(SummaryStats {
        n: n as usize,
        mean,
        var_of_mean,
    })
}

/// Plug-in summary `p̂ = y/n`, `var = p̂(1 − p̂)/n`.
pub fn binary_summary_plugin(y_sum: u64, n: u64) -> Result<SummaryStats> {
    if n == 0 || y_sum > n {
        return Err(Error::InvalidCounts {
            successes: y_sum as f64,
            trials: n as f64,
        });
    }
    let p = y_sum as f64 / n as f64;
    Ok(SummaryStats {
        n: n as usize,
        mean: p,
        var_of_mean: p * (1.0 - p) / n as f64,
    })
}

fn beta_moments(y: f64, n: f64) -> Result<(f64, f64)> {
    if !(n > 0.0) || !(0.0..=n).contains(&y) {
        return Err(Error::InvalidCounts {
            successes: y,
            trials: n,
        });
    }
    let mean = (y + 1.0) / (n + 2.0);
    let var = (y + 1.0) * (n - y + 1.0) / ((n + 2.0) * (n + 2.0) * (n + 3.0));
    Ok((mean, var))
}

/// Treated mean, control mean and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalEstimand {
    pub mu_t: f64,
    pub mu_c: f64,
    pub tau: f64,
}

impl CausalEstimand {
    pub fn new(mu_t: f64, mu_c: f64) -> Self {
        Self {
            mu_t,
            mu_c,
            tau: mu_t - mu_c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cont(y: &[f64]) -> ControlSample {
        ControlSample::new(y.to_vec(), OutcomeKind::Continuous, Source::Internal).unwrap()
    }

    #[test]
    fn constant_sample_has_zero_variance() {
        let s = summarize(&cont(&[1.0, 1.0, 1.0, 1.0]), None).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.var_of_mean, 0.0);
    }

    #[test]
    fn two_point_sample() {
        let s = summarize(&cont(&[0.0, 2.0]), None).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.var_of_mean, 1.0);
    }

    #[test]
    fn weight_mass_on_first_observation() {
        let s = summarize(&cont(&[1.0, 2.0, 3.0]), Some(&[3.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.var_of_mean, 0.0);
    }

    #[test]
    fn rejects_short_samples_and_bad_weights() {
        assert_eq!(
            summarize_values(&[1.0], None),
            Err(Error::DegenerateSample { n: 1 })
        );
        assert_eq!(
            summarize_values(&[1.0, 2.0], Some(&[0.0, 0.0])),
            Err(Error::DegenerateWeights)
        );
        assert_eq!(
            summarize_values(&[1.0, 2.0], Some(&[1.0, -1.0])),
            Err(Error::DegenerateWeights)
        );
        assert!(ControlSample::new(vec![0.0, 2.0], OutcomeKind::Binary, Source::External).is_err());
    }

    #[test]
    fn beta_summary_values() {
        let s = binary_summary_beta(1, 2).unwrap();
        assert_eq!(s.mean, 0.5);
        assert!((s.var_of_mean - 0.05).abs() < 1e-15);
        assert_eq!(binary_summary_beta(5, 10).unwrap().mean, 0.5);
        let top = binary_summary_beta(10, 10).unwrap();
        assert_eq!(top.mean, 11.0 / 12.0);
        assert!(binary_summary_beta(0, 0).is_err());
        assert!(binary_summary_beta(3, 2).is_err());
    }

    #[test]
    fn plugin_summary() {
        let s = binary_summary_plugin(2, 10).unwrap();
        assert!((s.var_of_mean - 0.016).abs() < 1e-15);
    }

    #[test]
    fn covariate_rows_must_match() {
        let x = Covariates::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(cont(&[1.0, 2.0]).with_covariates(x).is_err());
    }

    #[test]
    fn estimand_difference() {
        let e = CausalEstimand::new(0.7, 0.4);
        assert_eq!(e.tau, 0.7 - 0.4);
    }

    proptest! {
        #[test]
        fn weight_rescaling_is_invisible(
            y in prop::collection::vec(-10.0f64..10.0, 2..40),
            seed in prop::collection::vec(0.01f64..5.0, 40),
            c in 0.001f64..1000.0,
        ) {
            let w: Vec<f64> = seed[..y.len()].to_vec();
            let wc: Vec<f64> = w.iter().map(|x| x * c).collect();
            let a = summarize_values(&y, Some(&w)).unwrap();
            let b = summarize_values(&y, Some(&wc)).unwrap();
            prop_assert!((a.mean - b.mean).abs() <= 1e-9 * (1.0 + a.mean.abs()));
            prop_assert!((a.var_of_mean - b.var_of_mean).abs() <= 1e-9 * (1.0 + a.var_of_mean));
        }

        #[test]
        fn equal_weights_reduce_to_sample_variance(
            y in prop::collection::vec(-10.0f64..10.0, 2..40),
            w in 0.1f64..10.0,
        ) {
            let n = y.len() as f64;
            let m = y.iter().sum::<f64>() / n;
            let s2 = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
            let ws = vec![w; y.len()];
            let s = summarize_values(&y, Some(&ws)).unwrap();
            prop_assert!((s.var_of_mean - s2 / n).abs() <= 1e-10 * (1.0 + s2));
        }

        #[test]
        fn beta_mean_strictly_inside_unit_interval(n in 1u64..100_000, frac in 0.0f64..=1.0) {
            let y = ((n as f64) * frac).floor() as u64;
            let s = binary_summary_beta(y, n).unwrap();
            prop_assert!(s.mean > 0.0 && s.mean < 1.0);
        }
    }
}
