//! Borrowing rules: how much weight the external mean receives.
//!
//! All rules report the weight `a` of the external mean in the combined
//! estimator `(µ̂0 + a·µ̂1)/(1 + a)`. The maxML rules also report the
//! power-prior exponent `a0`, related by `a = a0·σ̂0²/σ̂1²` (`= a0·n1/n0` when
//! the outcome variance is common). The cap `C` always bounds `a`, i.e. the
//! external contribution as a fraction of the internal sample.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::data::SummaryStats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Empirical Bayes: maximize the marginal likelihood of `a0`.
    #[serde(alias = "maxml")]
    MaxMl,
    /// Minimize MSE with the variance-corrected squared mean difference.
    #[serde(alias = "cminmse")]
    CMinMse,
    /// Minimize (η-weighted) MSE with the raw squared mean difference.
    #[serde(alias = "minmse")]
    MinMse,
    /// Reference: ignore the external data (`a = 0`).
    NoBorrowing,
    /// Reference: `a0 = 1`, external data weighted like internal data.
    FullBorrowing,
}

impl RuleKind {
    pub fn label(self) -> &'static str {
        match self {
            RuleKind::MaxMl => "maxml",
            RuleKind::CMinMse => "cminmse",
            RuleKind::MinMse => "minmse",
            RuleKind::NoBorrowing => "none",
            RuleKind::FullBorrowing => "full",
        }
    }
}

impl std::str::FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maxml" | "max_ml" => Ok(RuleKind::MaxMl),
            "cminmse" | "c_min_mse" => Ok(RuleKind::CMinMse),
            "minmse" | "min_mse" => Ok(RuleKind::MinMse),
            "none" | "no_borrowing" => Ok(RuleKind::NoBorrowing),
            "full" | "full_borrowing" => Ok(RuleKind::FullBorrowing),
            other => Err(Error::InvalidConfig(format!("unknown rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A borrowing rule with its bias weight `eta` (minMSE only) and cap `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorrowingRule {
    pub kind: RuleKind,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_cap")]
    pub cap: f64,
}

fn default_eta() -> f64 {
    1.0
}

fn default_cap() -> f64 {
    1.0
}

impl BorrowingRule {
    pub fn new(kind: RuleKind, eta: f64, cap: f64) -> Result<Self> {
        let rule = Self { kind, eta, cap };
        rule.validate()?;
        Ok(rule)
    }

    pub fn max_ml(cap: f64) -> Result<Self> {
        Self::new(RuleKind::MaxMl, 1.0, cap)
    }

    pub fn cminmse(cap: f64) -> Result<Self> {
        Self::new(RuleKind::CMinMse, 1.0, cap)
    }

    pub fn minmse(eta: f64, cap: f64) -> Result<Self> {
        Self::new(RuleKind::MinMse, eta, cap)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "eta must be finite and >= 0, got {}",
                self.eta
            )));
        }
        if !(self.cap > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cap must be > 0, got {}",
                self.cap
            )));
        }
        Ok(())
    }

    /// Evaluates the rule on (normal-theory) summaries of the external (`s1`)
    /// and internal (`s0`) samples.
    pub fn evaluate(&self, s1: &SummaryStats, s0: &SummaryStats) -> Result<BorrowAmount> {
        match self.kind {
            RuleKind::MaxMl => maxml_normal(s1, s0, self.cap),
            RuleKind::CMinMse => cminmse(s1, s0, self.cap),
            RuleKind::MinMse => minmse(s1, s0, self.eta, self.cap),
            RuleKind::NoBorrowing => Ok(BorrowAmount {
                a: 0.0,
                a0: Some(0.0),
                capped: false,
            }),
            RuleKind::FullBorrowing => {
                check_variances(s1, s0)?;
                if s1.var_of_mean <= 0.0 {
                    return Err(Error::DegenerateVariance);
                }
                Ok(from_a0(1.0, s0.var_of_mean / s1.var_of_mean, self.cap))
            }
        }
    }
}

/// Resolved amount of borrowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorrowAmount {
    /// Weight on the external mean; always `<= cap`.
    pub a: f64,
    /// Power-prior exponent, when the rule defines one.
    pub a0: Option<f64>,
    /// Whether the cap was binding.
    pub capped: bool,
}

/// `(min(a, cap), a > cap)`.
pub fn apply_cap(a: f64, cap: f64) -> (f64, bool) {
    if a > cap {
        (cap, true)
    } else {
        (a, false)
    }
}

fn check_variances(s1: &SummaryStats, s0: &SummaryStats) -> Result<()> {
    let ok = |s: &SummaryStats| s.mean.is_finite() && s.var_of_mean.is_finite() && s.var_of_mean >= 0.0;
    if ok(s1) && ok(s0) {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "summary statistics must be finite with non-negative variance".into(),
        ))
    }
}

/// Caps on the a-scale and maps back to `a0` with `a = a0·ratio`.
fn from_a0(a0: f64, ratio: f64, cap: f64) -> BorrowAmount {
    let (a, capped) = apply_cap(a0 * ratio, cap);
    let a0 = if capped { (cap / ratio).min(1.0) } else { a0 };
    BorrowAmount {
        a,
        a0: Some(a0),
        capped,
    }
}

/// Closed-form marginal-likelihood maximizer for normal outcomes.
///
/// `â0 = σ̂1² / (max(δ̂², σ̂1² + σ̂0²) − σ̂0²)`, which is at most 1 by
/// construction.
pub fn maxml_normal(s1: &SummaryStats, s0: &SummaryStats, cap: f64) -> Result<BorrowAmount> {
    check_variances(s1, s0)?;
    let (v1, v0) = (s1.var_of_mean, s0.var_of_mean);
    if v1 <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let d2 = (s1.mean - s0.mean).powi(2);
    // Branch instead of `max(..) - v0` so that (v1 + v0) - v0 never rounds.
    let denom = if d2 > v1 + v0 { d2 - v0 } else { v1 };
    let (a, capped) = apply_cap(v0 / denom, cap);
    let a0 = if capped { cap * v1 / v0 } else { v1 / denom };
    Ok(BorrowAmount {
        a,
        a0: Some(a0.clamp(0.0, 1.0)),
        capped,
    })
}

/// Variance-corrected minMSE rule: `σ̂0² / max(δ̂² − σ̂0², σ̂1²)`.
pub fn cminmse(s1: &SummaryStats, s0: &SummaryStats, cap: f64) -> Result<BorrowAmount> {
    check_variances(s1, s0)?;
    let (v1, v0) = (s1.var_of_mean, s0.var_of_mean);
    let delta = s1.mean - s0.mean;
    let denom = (delta * delta - v0).max(v1);
    if !(denom > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let (a, capped) = apply_cap(v0 / denom, cap);
    let a0 = if v0 > 0.0 {
        Some((a * v1 / v0).min(1.0))
    } else {
        None
    };
    Ok(BorrowAmount { a, a0, capped })
}

/// Simplified minMSE rule with bias weight η: `σ̂0² / (σ̂1² + η²δ̂²)`.
pub fn minmse(s1: &SummaryStats, s0: &SummaryStats, eta: f64, cap: f64) -> Result<BorrowAmount> {
    check_variances(s1, s0)?;
    let (v1, v0) = (s1.var_of_mean, s0.var_of_mean);
    let delta = s1.mean - s0.mean;
    let denom = v1 + eta * eta * delta * delta;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    let (a, capped) = apply_cap(v0 / denom, cap);
    Ok(BorrowAmount {
        a,
        a0: None,
        capped,
    })
}

/// Grid of candidate `a0` values for the binomial marginal-likelihood search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct A0Grid(Vec<f64>);

impl A0Grid {
    pub const DEFAULT_POINTS: usize = 51;

    /// `points` equispaced values `0, 1/(points−1), …, 1`.
    pub fn equispaced(points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::InvalidGrid("grid needs at least one point".into())),
            1 => Ok(Self(vec![0.0])),
            _ => {
                let last = (points - 1) as f64;
                Ok(Self((0..points).map(|i| i as f64 / last).collect()))
            }
        }
    }

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidGrid("grid values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidGrid("grid must be sorted ascending".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for A0Grid {
    fn default() -> Self {
        Self::equispaced(Self::DEFAULT_POINTS).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for A0Grid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<A0Grid> for Vec<f64> {
    fn from(g: A0Grid) -> Self {
        g.0
    }
}

/// Success/trial counts for the external (`1`) and internal (`0`) samples.
/// Counts may be non-integer when they come from weighted data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialCounts {
    pub y1: f64,
    pub n1: f64,
    pub y0: f64,
    pub n0: f64,
}

impl BinomialCounts {
    pub fn new(y1: f64, n1: f64, y0: f64, n0: f64) -> Result<Self> {
        for (y, n) in [(y1, n1), (y0, n0)] {
            if !(n > 0.0) || !n.is_finite() || !(0.0..=n).contains(&y) {
                return Err(Error::InvalidCounts {
                    successes: y,
                    trials: n,
                });
            }
        }
        Ok(Self { y1, n1, y0, n0 })
    }
}

/// Log marginal posterior of `a0` (up to a constant) under a Beta(1, 1) prior.
pub fn log_marginal_a0(a0: f64, c: &BinomialCounts) -> f64 {
    let f1 = c.n1 - c.y1;
    let f0 = c.n0 - c.y0;
    ln_beta(a0 * c.y1 + c.y0 + 1.0, a0 * f1 + f0 + 1.0) - ln_beta(a0 * c.y1 + 1.0, a0 * f1 + 1.0)
}

/// Grid-search maxML for binomial outcomes.
///
/// Ties at the maximum go to the largest grid value, which favours more
/// borrowing under a flat likelihood. The resulting `a0` is capped at
/// `cap·n0/n1`, and `a = a0·n1/n0`.
pub fn maxml_binomial(counts: &BinomialCounts, grid: &A0Grid, cap: f64) -> Result<BorrowAmount> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for &a0 in grid.values() {
        let ll = log_marginal_a0(a0, counts);
        if ll >= best {
            best = ll;
            arg = Some(a0);
        }
    }
    let a0 = arg.ok_or_else(|| Error::InvalidGrid("grid is empty".into()))?;
    Ok(from_a0(a0, counts.n1 / counts.n0, cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ss(mean: f64, var_of_mean: f64) -> SummaryStats {
        SummaryStats {
            n: 100,
            mean,
            var_of_mean,
        }
    }

    const NO_CAP: f64 = f64::INFINITY;

    #[test]
    fn maxml_equal_means_is_full_borrowing() {
        let r = maxml_normal(&ss(0.3, 0.01), &ss(0.3, 0.02), NO_CAP).unwrap();
        assert_eq!(r.a0, Some(1.0));
        assert!((r.a - 2.0).abs() < 1e-15);
    }

    #[test]
    fn maxml_worked_example() {
        let r = maxml_normal(&ss(0.3, 0.01), &ss(0.0, 0.02), NO_CAP).unwrap();
        assert!((r.a0.unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert!((r.a - 2.0 / 7.0).abs() < 1e-12);
        assert!(!r.capped);
    }

    #[test]
    fn maxml_cap_binds_on_a_scale() {
        let r = maxml_normal(&ss(0.0, 0.01), &ss(0.0, 0.02), 0.5).unwrap();
        assert_eq!(r.a, 0.5);
        assert!(r.capped);
        assert!((r.a0.unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn maxml_zero_external_variance_is_degenerate() {
        assert_eq!(
            maxml_normal(&ss(0.0, 0.0), &ss(0.0, 0.02), 1.0),
            Err(Error::DegenerateVariance)
        );
    }

    #[test]
    fn cminmse_examples() {
        let r = cminmse(&ss(0.0, 0.01), &ss(0.0, 0.01), NO_CAP).unwrap();
        assert_eq!(r.a, 1.0);
        let r = cminmse(&ss(0.3, 0.01), &ss(0.0, 0.02), NO_CAP).unwrap();
        assert!((r.a - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(
            cminmse(&ss(0.0, 0.0), &ss(0.0, 0.0), 1.0),
            Err(Error::DegenerateVariance)
        );
    }

    #[test]
    fn minmse_examples() {
        let r = minmse(&ss(0.0, 0.01), &ss(0.0, 0.01), 1.0, NO_CAP).unwrap();
        assert_eq!(r.a, 1.0);
        let r = minmse(&ss(0.3, 0.01), &ss(0.0, 0.02), 1.0, NO_CAP).unwrap();
        assert!((r.a - 0.2).abs() < 1e-12);
        let r = minmse(&ss(0.3, 0.01), &ss(0.0, 0.02), 0.0, NO_CAP).unwrap();
        assert!((r.a - 2.0).abs() < 1e-15);
        assert_eq!(
            minmse(&ss(0.3, 0.0), &ss(0.0, 0.02), 0.0, 1.0),
            Err(Error::DegenerateVariance)
        );
    }

    #[test]
    fn cap_boundary_is_not_capped() {
        assert_eq!(apply_cap(0.4, 0.5), (0.4, false));
        assert_eq!(apply_cap(3.0, 1.0), (1.0, true));
        assert_eq!(apply_cap(1.0, 1.0), (1.0, false));
    }

    #[test]
    fn huge_mean_difference_shuts_off_borrowing() {
        let (s1, s0) = (ss(1e6, 0.01), ss(0.0, 0.02));
        assert!(maxml_normal(&s1, &s0, NO_CAP).unwrap().a < 1e-12);
        assert!(cminmse(&s1, &s0, NO_CAP).unwrap().a < 1e-12);
        assert!(minmse(&s1, &s0, 1.0, NO_CAP).unwrap().a < 1e-12);
    }

    #[test]
    fn binomial_identical_rates_borrow_fully() {
        let c = BinomialCounts::new(5.0, 10.0, 5.0, 10.0).unwrap();
        let r = maxml_binomial(&c, &A0Grid::default(), NO_CAP).unwrap();
        assert_eq!(r.a0, Some(1.0));
    }

    #[test]
    fn binomial_conflict_borrows_nothing() {
        let c = BinomialCounts::new(0.0, 50.0, 50.0, 50.0).unwrap();
        let r = maxml_binomial(&c, &A0Grid::default(), NO_CAP).unwrap();
        assert_eq!(r.a0, Some(0.0));
        assert_eq!(r.a, 0.0);
    }

    #[test]
    fn binomial_single_point_grid() {
        let c = BinomialCounts::new(5.0, 10.0, 5.0, 10.0).unwrap();
        let g = A0Grid::new(vec![0.0]).unwrap();
        assert_eq!(maxml_binomial(&c, &g, 1.0).unwrap().a0, Some(0.0));
    }

    #[test]
    fn binomial_cap_uses_sample_size_ratio() {
        // n1 = 3·n0 and identical rates: a0 = 1 → a = 3, capped at 1 → a0 = 1/3.
        let c = BinomialCounts::new(60.0, 300.0, 20.0, 100.0).unwrap();
        let r = maxml_binomial(&c, &A0Grid::default(), 1.0).unwrap();
        assert!(r.capped);
        assert_eq!(r.a, 1.0);
        assert!((r.a0.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(A0Grid::new(vec![]).is_err());
        assert!(A0Grid::new(vec![0.5, 0.2]).is_err());
        assert!(A0Grid::new(vec![0.0, 1.5]).is_err());
        assert!(A0Grid::equispaced(0).is_err());
        let g = A0Grid::default();
        assert_eq!(g.values().len(), 51);
        assert_eq!(g.values()[50], 1.0);
        assert_eq!(g.values()[25], 0.5);
    }

    #[test]
    fn rule_validation_and_parsing() {
        assert!(BorrowingRule::minmse(-1.0, 1.0).is_err());
        assert!(BorrowingRule::max_ml(0.0).is_err());
        assert_eq!("minMSE".parse::<RuleKind>().unwrap(), RuleKind::MinMse);
        assert!("bogus".parse::<RuleKind>().is_err());
    }

    fn summaries() -> impl Strategy<Value = (SummaryStats, SummaryStats)> {
        (-2.0f64..2.0, 1e-4f64..1.0, -2.0f64..2.0, 1e-4f64..1.0)
            .prop_map(|(m1, v1, m0, v0)| (ss(m1, v1), ss(m0, v0)))
    }

    proptest! {
        #[test]
        fn cminmse_equals_maxml_normal((s1, s0) in summaries()) {
            let a = cminmse(&s1, &s0, NO_CAP).unwrap().a;
            let b = maxml_normal(&s1, &s0, NO_CAP).unwrap().a;
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn minmse_monotone_in_delta_and_eta(
            (s1, s0) in summaries(),
            extra in 0.0f64..3.0,
            eta in 0.0f64..3.0,
            deta in 0.0f64..3.0,
        ) {
            let d = (s1.mean - s0.mean).abs();
            let wider = ss(s0.mean + d + extra, s1.var_of_mean);
            let base = minmse(&s1, &s0, eta, NO_CAP).unwrap().a;
            prop_assert!(minmse(&wider, &s0, eta, NO_CAP).unwrap().a <= base + 1e-15);
            prop_assert!(minmse(&s1, &s0, eta + deta, NO_CAP).unwrap().a <= base + 1e-15);
        }

        #[test]
        fn every_rule_respects_cap((s1, s0) in summaries(), cap in 0.01f64..3.0) {
            for kind in [RuleKind::MaxMl, RuleKind::CMinMse, RuleKind::MinMse, RuleKind::FullBorrowing] {
                let r = BorrowingRule::new(kind, 1.0, cap).unwrap().evaluate(&s1, &s0).unwrap();
                prop_assert!(r.a <= cap && r.a >= 0.0);
                if let Some(a0) = r.a0 {
                    prop_assert!((0.0..=1.0).contains(&a0));
                }
            }
        }
    }
}
