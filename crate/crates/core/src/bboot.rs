//! Bayesian-bootstrap posterior draws of the combined control mean.
//!
//! Each replicate reweights every source with uniform-Dirichlet weights
//! (scaled to sum to the source size), re-evaluates the borrowing rule on the
//! weighted summaries, and forms the combined mean with the replicate's own
//! weight. With IPW enabled the external weights are further multiplied by
//! the odds of being internal, from a propensity model fitted with the same
//! replicate weights.
//!
//! Draw order inside replicate `b` (stream `(seed, b)`): internal weights,
//! external weights, then treated weights.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::data::{
    summarize_binary, summarize_values, BinaryVariance, ControlSample, Covariates, OutcomeKind,
};
use crate::exec::{map_indexed, replicate_rng, Execution};
use crate::ipw::{fit_ps, ipw_weights, normalize_to_count, odds_weights};
use crate::posterior::{combine, posterior_binomial};
use crate::rules::{maxml_binomial, A0Grid, BinomialCounts, BorrowingRule, RuleKind};
use crate::stats::{mean, normal_quantile, quantile_sorted, sample_sd, sorted_copy};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub rule: BorrowingRule,
    pub use_ipw: bool,
    pub grid: A0Grid,
    pub binary_variance: BinaryVariance,
    pub execution: Execution,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64, rule: BorrowingRule) -> Self {
        Self {
            replicates,
            seed,
            rule,
            use_ipw: false,
            grid: A0Grid::default(),
            binary_variance: BinaryVariance::default(),
            execution: Execution::default(),
        }
    }

    pub fn with_ipw(mut self, use_ipw: bool) -> Self {
        self.use_ipw = use_ipw;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_grid(mut self, grid: A0Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_binary_variance(mut self, v: BinaryVariance) -> Self {
        self.binary_variance = v;
        self
    }
}

/// Uniform-Dirichlet weights scaled to sum to `n`: standard exponentials
/// divided by their mean.
pub fn dirichlet_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    if n == 1 {
        return vec![1.0];
    }
    normalize_to_count(draws)
}

/// The combined estimate produced by a rule on one (possibly weighted) pair
/// of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleFit {
    pub mu_c: f64,
    pub a: f64,
    pub a0: Option<f64>,
    pub capped: bool,
    /// The rule was undefined (zero variance) and `a = 0` was used instead.
    pub degenerate: bool,
    pub mu0: f64,
    pub mu1: f64,
}

/// Evaluates `rule` on internal (`d0`) and external (`d1`) outcomes under
/// optional case weights.
///
/// Binary outcomes with the maxML rule go through the grid search on
/// (weighted) success counts and report the Beta posterior mean; everything
/// else uses summary statistics and the linear combination.
#[allow(clippy::too_many_arguments)]
pub fn estimate(
    d0: &[f64],
    w0: Option<&[f64]>,
    d1: &[f64],
    w1: Option<&[f64]>,
    kind: OutcomeKind,
    rule: &BorrowingRule,
    grid: &A0Grid,
    binary_variance: BinaryVariance,
) -> Result<RuleFit> {
    let summary = |y: &[f64], w: Option<&[f64]>| match kind {
        OutcomeKind::Continuous => summarize_values(y, w),
        OutcomeKind::Binary => summarize_binary(y, w, binary_variance),
    };
    if kind == OutcomeKind::Binary && rule.kind == RuleKind::MaxMl {
        let raw0 = summarize_values(d0, w0)?;
        let raw1 = summarize_values(d1, w1)?;
        let (n0, n1) = (d0.len() as f64, d1.len() as f64);
        // Weighted means times n are the weighted success counts; clamp guards
        // against a last-ulp overshoot of n.
        let counts = BinomialCounts::new(
            (raw1.mean * n1).clamp(0.0, n1),
            n1,
            (raw0.mean * n0).clamp(0.0, n0),
            n0,
        )?;
        let amount = maxml_binomial(&counts, grid, rule.cap)?;
        let a0 = amount.a0.unwrap_or(0.0);
        let mu_c = posterior_binomial(&counts, a0)?.mean();
        return Ok(RuleFit {
            mu_c,
            a: amount.a,
            a0: amount.a0,
            capped: amount.capped,
            degenerate: false,
            mu0: raw0.mean,
            mu1: raw1.mean,
        });
    }
    let s0 = summary(d0, w0)?;
    let s1 = summary(d1, w1)?;
    let (mu0, mu1) = match kind {
        // The Beta route shifts the reported means; combine the raw rates.
        OutcomeKind::Binary if binary_variance == BinaryVariance::BetaPosterior => (
            summarize_values(d0, w0)?.mean,
            summarize_values(d1, w1)?.mean,
        ),
        _ => (s0.mean, s1.mean),
    };
    match rule.evaluate(&s1, &s0) {
        Ok(amount) => Ok(RuleFit {
            mu_c: combine(mu0, mu1, amount.a)?,
            a: amount.a,
            a0: amount.a0,
            capped: amount.capped,
            degenerate: false,
            mu0,
            mu1,
        }),
        Err(Error::DegenerateVariance) => Ok(RuleFit {
            mu_c: mu0,
            a: 0.0,
            a0: Some(0.0),
            capped: false,
            degenerate: true,
            mu0,
            mu1,
        }),
        Err(e) => Err(e),
    }
}

/// Covariates used to re-fit the propensity model inside each replicate.
#[derive(Debug, Clone, Copy)]
pub struct IpwContext<'a> {
    pub x0: &'a Covariates,
    pub x1: &'a Covariates,
}

impl<'a> IpwContext<'a> {
    pub fn from_samples(d0: &'a ControlSample, d1: &'a ControlSample) -> Result<Self> {
        match (d0.covariates(), d1.covariates()) {
            (Some(x0), Some(x1)) if x0.ncols() == x1.ncols() => Ok(Self { x0, x1 }),
            (Some(_), Some(_)) => Err(Error::InvalidInput(
                "internal and external covariates differ in column count".into(),
            )),
            _ => Err(Error::InvalidInput(
                "IPW requires covariates on both the internal and external samples".into(),
            )),
        }
    }
}

/// One Bayesian-bootstrap replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateDraw {
    pub mu_c: f64,
    pub a: f64,
    pub capped: bool,
    pub degenerate: bool,
    /// The propensity fit separated or failed; clamped/unadjusted weights used.
    pub ipw_trouble: bool,
    /// Largest `|Σw − n|` over the Dirichlet weight vectors drawn.
    pub weight_sum_error: f64,
}

pub fn bb_replicate<R: Rng + ?Sized>(
    d0: &ControlSample,
    d1: &ControlSample,
    rule: &BorrowingRule,
    grid: &A0Grid,
    binary_variance: BinaryVariance,
    ipw: Option<&IpwContext<'_>>,
    rng: &mut R,
) -> Result<ReplicateDraw> {
    if d0.kind() != d1.kind() {
        return Err(Error::InvalidInput(
            "internal and external outcomes are of different kinds".into(),
        ));
    }
    let w0 = dirichlet_weights(d0.n(), rng);
    let w1 = dirichlet_weights(d1.n(), rng);
    let weight_sum_error = sum_error(&w0).max(sum_error(&w1));

    let mut ipw_trouble = false;
    let ext_weights = match ipw {
        None => w1,
        Some(ctx) => {
            let case: Vec<f64> = w0.iter().chain(&w1).copied().collect();
            match fit_ps(ctx.x0, ctx.x1, Some(&case)) {
                Ok(model) => {
                    ipw_trouble = model.separated || !model.converged;
                    let probs: Vec<f64> = (0..ctx.x1.nrows())
                        .map(|i| model.probability(ctx.x1.row(i)))
                        .collect();
                    let odds = odds_weights(&probs);
                    normalize_to_count(w1.iter().zip(&odds).map(|(w, o)| w * o).collect())
                }
                Err(Error::SingularDesign) => {
                    ipw_trouble = true;
                    w1
                }
                Err(e) => return Err(e),
            }
        }
    };

    let fit = estimate(
        d0.outcomes(),
        Some(&w0),
        d1.outcomes(),
        Some(&ext_weights),
        d0.kind(),
        rule,
        grid,
        binary_variance,
    )?;
    Ok(ReplicateDraw {
        mu_c: fit.mu_c,
        a: fit.a,
        capped: fit.capped,
        degenerate: fit.degenerate,
        ipw_trouble,
        weight_sum_error,
    })
}

fn sum_error(w: &[f64]) -> f64 {
    (w.iter().sum::<f64>() - w.len() as f64).abs()
}

/// Mean, standard deviation and selected quantiles of a set of draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q025: f64,
    pub q975: f64,
}

impl DrawSummary {
    pub fn of(draws: &[f64]) -> Self {
        let sorted = sorted_copy(draws);
        Self {
            mean: mean(draws),
            sd: sample_sd(draws),
            median: quantile_sorted(&sorted, 0.5),
            q025: quantile_sorted(&sorted, 0.025),
            q975: quantile_sorted(&sorted, 0.975),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub mu_c: Vec<f64>,
    pub a_star: Vec<f64>,
    pub tau: Option<Vec<f64>>,
    /// Plug-in estimate on the unweighted data.
    pub point: f64,
    pub point_a: f64,
    pub point_a0: Option<f64>,
    pub point_tau: Option<f64>,
    pub capped_fraction: f64,
    pub degenerate_replicates: usize,
    pub ipw_trouble_replicates: usize,
    /// Largest `|Σw − n|` across every Dirichlet weight vector in the run.
    pub max_weight_sum_error: f64,
}

impl PosteriorDraws {
    pub fn mu_c_summary(&self) -> DrawSummary {
        DrawSummary::of(&self.mu_c)
    }

    pub fn a_summary(&self) -> DrawSummary {
        DrawSummary::of(&self.a_star)
    }

    pub fn tau_summary(&self) -> Option<DrawSummary> {
        self.tau.as_deref().map(DrawSummary::of)
    }

    pub fn len(&self) -> usize {
        self.mu_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_c.is_empty()
    }
}

/// Runs the Bayesian bootstrap for the control mean and, when `dt` is given,
/// the treatment effect.
pub fn run(
    d0: &ControlSample,
    d1: &ControlSample,
    dt: Option<&ControlSample>,
    cfg: &BootstrapConfig,
) -> Result<PosteriorDraws> {
    if cfg.replicates < 2 {
        return Err(Error::InvalidConfig(format!(
            "at least 2 bootstrap replicates are required, got {}",
            cfg.replicates
        )));
    }
    cfg.rule.validate()?;
    if d0.kind() != d1.kind() {
        return Err(Error::InvalidInput(
            "internal and external outcomes are of different kinds".into(),
        ));
    }
    let ipw = if cfg.use_ipw {
        Some(IpwContext::from_samples(d0, d1)?)
    } else {
        None
    };

    let point_ext_weights = match &ipw {
        Some(ctx) => Some(ipw_weights(&fit_ps(ctx.x0, ctx.x1, None)?, ctx.x1)),
        None => None,
    };
    let point = estimate(
        d0.outcomes(),
        None,
        d1.outcomes(),
        point_ext_weights.as_deref(),
        d0.kind(),
        &cfg.rule,
        &cfg.grid,
        cfg.binary_variance,
    )?;

    type Replicate = Result<(ReplicateDraw, Option<(f64, f64)>)>;
    let replicates: Vec<Replicate> =
        map_indexed(cfg.replicates, cfg.execution, |b| {
            let mut rng = replicate_rng(cfg.seed, b as u64);
            let draw = bb_replicate(
                d0,
                d1,
                &cfg.rule,
                &cfg.grid,
                cfg.binary_variance,
                ipw.as_ref(),
                &mut rng,
            )?;
            let treated = match dt {
                Some(t) => {
                    let wt = dirichlet_weights(t.n(), &mut rng);
                    let err = sum_error(&wt);
                    Some((summarize_values(t.outcomes(), Some(&wt))?.mean, err))
                }
                None => None,
            };
            Ok((draw, treated))
        });

    let mut mu_c = Vec::with_capacity(cfg.replicates);
    let mut a_star = Vec::with_capacity(cfg.replicates);
    let mut tau = dt.map(|_| Vec::with_capacity(cfg.replicates));
    let (mut capped, mut degenerate, mut trouble) = (0usize, 0usize, 0usize);
    let mut max_err = 0.0f64;
    for r in replicates {
        let (draw, treated) = r?;
        mu_c.push(draw.mu_c);
        a_star.push(draw.a);
        capped += usize::from(draw.capped);
        degenerate += usize::from(draw.degenerate);
        trouble += usize::from(draw.ipw_trouble);
        max_err = max_err.max(draw.weight_sum_error);
        if let (Some(t), Some((mu_t, err))) = (tau.as_mut(), treated) {
            t.push(mu_t - draw.mu_c);
            max_err = max_err.max(err);
        }
    }
    let point_tau = dt.map(|t| mean(t.outcomes()) - point.mu_c);
    Ok(PosteriorDraws {
        capped_fraction: capped as f64 / cfg.replicates as f64,
        mu_c,
        a_star,
        tau,
        point: point.mu_c,
        point_a: point.a,
        point_a0: point.a0,
        point_tau,
        degenerate_replicates: degenerate,
        ipw_trouble_replicates: trouble,
        max_weight_sum_error: max_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// `point ± z·sd(draws)`, centred on the plug-in estimate.
    NormalApprox,
    /// Type-7 empirical quantiles of the draws.
    Percentile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub method: IntervalMethod,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// The draws had zero spread and the interval collapsed to a point.
    pub degenerate: bool,
}

impl IntervalEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub fn interval(
    draws: &[f64],
    point: f64,
    method: IntervalMethod,
    level: f64,
) -> Result<IntervalEstimate> {
    if draws.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "an interval needs at least 2 draws, got {}",
            draws.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "interval level must lie in (0, 1), got {level}"
        )));
    }
    let sd = sample_sd(draws);
    let degenerate = !(sd > 0.0);
    let (lower, upper) = match method {
        _ if degenerate && method == IntervalMethod::NormalApprox => (point, point),
        IntervalMethod::NormalApprox => {
            let half = normal_quantile((1.0 + level) / 2.0) * sd;
            (point - half, point + half)
        }
        IntervalMethod::Percentile => {
            let sorted = sorted_copy(draws);
            (
                quantile_sorted(&sorted, (1.0 - level) / 2.0),
                quantile_sorted(&sorted, (1.0 + level) / 2.0),
            )
        }
    };
    Ok(IntervalEstimate {
        method,
        lower,
        upper,
        level,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Source;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn sample(y: Vec<f64>, source: Source) -> ControlSample {
        ControlSample::new(y, OutcomeKind::Continuous, source).unwrap()
    }

    fn normal_sample(n: usize, mu: f64, seed: u64, source: Source) -> ControlSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = (0..n)
            .map(|_| mu + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        sample(y, source)
    }

    #[test]
    fn single_weight_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(dirichlet_weights(1, &mut rng), vec![1.0]);
        }
    }

    #[test]
    fn weights_sum_to_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2, 7, 100, 5000] {
            let w = dirichlet_weights(n, &mut rng);
            assert!(w.iter().all(|v| *v > 0.0));
            assert!(sum_error(&w) < 1e-9);
        }
    }

    #[test]
    fn weight_moments_match_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = dirichlet_weights(100_000, &mut rng);
        let m = mean(&w);
        let v = crate::stats::sample_variance(&w);
        assert!((m - 1.0).abs() < 1e-12);
        assert!((v - 1.0).abs() < 0.02, "variance {v}");
    }

    #[test]
    fn identical_sources_stay_convex() {
        let d0 = normal_sample(60, 0.0, 4, Source::Internal);
        let d1 = sample(d0.outcomes().to_vec(), Source::External);
        let rule = BorrowingRule::minmse(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut below = 0;
        for _ in 0..200 {
            let mut probe = rng.clone();
            let w0 = dirichlet_weights(60, &mut probe);
            let w1 = dirichlet_weights(60, &mut probe);
            let m0 = summarize_values(d0.outcomes(), Some(&w0)).unwrap().mean;
            let m1 = summarize_values(d1.outcomes(), Some(&w1)).unwrap().mean;
            let r = bb_replicate(
                &d0,
                &d1,
                &rule,
                &A0Grid::default(),
                BinaryVariance::Plugin,
                None,
                &mut rng,
            )
            .unwrap();
            assert!(r.mu_c >= m0.min(m1) - 1e-12 && r.mu_c <= m0.max(m1) + 1e-12);
            assert!(r.a <= 1.0);
            below += usize::from(r.a < 1.0);
        }
        assert!(below > 150);
    }

    #[test]
    fn common_scaling_doubles_draws_exactly() {
        let d0 = normal_sample(40, 0.1, 6, Source::Internal);
        let d1 = normal_sample(80, 0.4, 7, Source::External);
        for kind in [RuleKind::MinMse, RuleKind::MaxMl, RuleKind::CMinMse] {
            let cfg = BootstrapConfig::new(50, 99, BorrowingRule::new(kind, 1.0, 1.0).unwrap());
            let base = run(&d0, &d1, None, &cfg).unwrap();
            let scaled = run(&d0.scaled(2.0).unwrap(), &d1.scaled(2.0).unwrap(), None, &cfg).unwrap();
            for (x, y) in base.mu_c.iter().zip(&scaled.mu_c) {
                assert_eq!(2.0 * x, *y);
            }
            assert_eq!(base.a_star, scaled.a_star);
        }
    }

    #[test]
    fn run_is_deterministic_and_thread_independent() {
        let d0 = normal_sample(30, 0.0, 8, Source::Internal);
        let d1 = normal_sample(30, 0.2, 9, Source::External);
        let dt = normal_sample(30, 0.5, 10, Source::Treated);
        let cfg = BootstrapConfig::new(2, 42, BorrowingRule::minmse(1.0, 1.0).unwrap());
        let a = run(&d0, &d1, Some(&dt), &cfg).unwrap();
        let b = run(&d0, &d1, Some(&dt), &cfg).unwrap();
        assert_eq!(a, b);
        let cfg = BootstrapConfig::new(300, 42, BorrowingRule::minmse(1.0, 1.0).unwrap());
        let par = run(&d0, &d1, Some(&dt), &cfg.clone().with_execution(Execution::Parallel)).unwrap();
        let seq = run(&d0, &d1, Some(&dt), &cfg.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn tau_is_treated_minus_control() {
        let d0 = normal_sample(30, 0.0, 11, Source::Internal);
        let d1 = normal_sample(30, 0.0, 12, Source::External);
        let dt = normal_sample(30, 1.0, 13, Source::Treated);
        let cfg = BootstrapConfig::new(100, 1, BorrowingRule::minmse(1.0, 1.0).unwrap());
        let d = run(&d0, &d1, Some(&dt), &cfg).unwrap();
        let tau = d.tau.as_ref().unwrap();
        for (b, t) in tau.iter().enumerate() {
            // Re-draw the treated weights from the replicate stream.
            let mut rng = replicate_rng(1, b as u64);
            dirichlet_weights(30, &mut rng);
            dirichlet_weights(30, &mut rng);
            let wt = dirichlet_weights(30, &mut rng);
            let mu_t = summarize_values(dt.outcomes(), Some(&wt)).unwrap().mean;
            assert_eq!(*t, mu_t - d.mu_c[b]);
        }
    }

    #[test]
    fn too_few_replicates_rejected() {
        let d0 = normal_sample(10, 0.0, 1, Source::Internal);
        let cfg = BootstrapConfig::new(1, 1, BorrowingRule::minmse(1.0, 1.0).unwrap());
        assert!(matches!(run(&d0, &d0, None, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn constant_samples_fall_back_to_no_borrowing() {
        let d0 = sample(vec![1.0; 10], Source::Internal);
        let d1 = sample(vec![1.0; 10], Source::External);
        let cfg = BootstrapConfig::new(20, 3, BorrowingRule::max_ml(1.0).unwrap());
        let d = run(&d0, &d1, None, &cfg).unwrap();
        assert_eq!(d.degenerate_replicates, 20);
        assert!(d.a_star.iter().all(|a| *a == 0.0));
        assert!(d.mu_c.iter().all(|m| (*m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn binary_maxml_uses_beta_posterior_mean() {
        let y0: Vec<f64> = (0..50).map(|i| f64::from(u8::from(i % 5 == 0))).collect();
        let y1: Vec<f64> = (0..50).map(|i| f64::from(u8::from(i % 5 == 1))).collect();
        let d0 = ControlSample::new(y0, OutcomeKind::Binary, Source::Internal).unwrap();
        let d1 = ControlSample::new(y1, OutcomeKind::Binary, Source::External).unwrap();
        let cfg = BootstrapConfig::new(10, 3, BorrowingRule::max_ml(1.0).unwrap());
        let d = run(&d0, &d1, None, &cfg).unwrap();
        // Identical rates → a0 = 1 → Beta(21, 81).
        assert_eq!(d.point_a0, Some(1.0));
        assert!((d.point - 21.0 / 102.0).abs() < 1e-12);
    }

    #[test]
    fn interval_examples() {
        let c = [0.7; 5];
        for m in [IntervalMethod::NormalApprox, IntervalMethod::Percentile] {
            let i = interval(&c, 0.7, m, 0.95).unwrap();
            assert_eq!((i.lower, i.upper), (0.7, 0.7));
        }
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let i = interval(&v, 0.0, IntervalMethod::Percentile, 0.95).unwrap();
        assert!((i.lower - 3.475).abs() < 1e-12 && (i.upper - 97.525).abs() < 1e-12);

        // Draws with unit sample sd.
        let d = [-1.0, 1.0];
        let s = sample_sd(&d);
        let d: Vec<f64> = d.iter().map(|x| x / s).collect();
        let i = interval(&d, 0.0, IntervalMethod::NormalApprox, 0.95).unwrap();
        assert!((i.upper - 1.959_964).abs() < 1e-6 && (i.lower + 1.959_964).abs() < 1e-6);
        assert!(interval(&d, 0.0, IntervalMethod::NormalApprox, 1.0).is_err());
        assert!(interval(&d[..1], 0.0, IntervalMethod::NormalApprox, 0.9).is_err());
    }
}
