//! Scenario configuration, the replicate loop and metric aggregation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generate::{gen_binary, gen_normal, gen_student_t, true_binary_rate, TruthSource};
use crate::bboot::{estimate, interval, run, BootstrapConfig, IntervalMethod};
use crate::data::{BinaryVariance, ControlSample, OutcomeKind, Source};
use crate::exec::{map_indexed, replicate_rng, Execution};
use crate::rules::{A0Grid, BorrowingRule, RuleKind};
use crate::stats::{mean, pairwise_sum, sample_sd, sample_variance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeFamily {
    Normal,
    Binary,
    StudentT,
}

impl OutcomeFamily {
    pub fn label(self) -> &'static str {
        match self {
            OutcomeFamily::Normal => "normal",
            OutcomeFamily::Binary => "binary",
            OutcomeFamily::StudentT => "student_t",
        }
    }
}

/// A rule to evaluate in a scenario; the cap comes from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub kind: RuleKind,
    #[serde(default = "one")]
    pub eta: f64,
}

impl RuleSpec {
    pub fn new(kind: RuleKind) -> Self {
        Self { kind, eta: 1.0 }
    }

    pub fn label(&self) -> String {
        if self.kind == RuleKind::MinMse && self.eta != 1.0 {
            format!("minmse(eta={})", self.eta)
        } else {
            self.kind.label().to_string()
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_p() -> usize {
    5
}
fn default_p0() -> f64 {
    0.2
}
fn default_df() -> f64 {
    3.0
}
fn default_level() -> f64 {
    0.95
}
fn default_grid_points() -> usize {
    A0Grid::DEFAULT_POINTS
}
fn default_multiplier() -> usize {
    1
}
fn default_rules() -> Vec<RuleSpec> {
    vec![RuleSpec::new(RuleKind::MaxMl), RuleSpec::new(RuleKind::MinMse)]
}

/// One simulation design point.
///
/// `nsim` replicates estimate variance and MSE of the plug-in estimates. When
/// `nboot > 0` each replicate also runs a Bayesian bootstrap of that size and
/// the interval coverage columns are filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub outcome: OutcomeFamily,
    /// Student-t degrees of freedom; ignored for other families.
    #[serde(default = "default_df")]
    pub df: f64,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Common covariate coefficient; defaults to 0.5 (continuous) or 0.2 (binary).
    #[serde(default)]
    pub beta: Option<f64>,
    pub n0: usize,
    #[serde(default = "default_multiplier")]
    pub n1_multiplier: usize,
    /// Δx (continuous) or Δp (binary): external minus internal mean.
    pub delta: f64,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default = "one")]
    pub cap: f64,
    #[serde(default = "default_rules")]
    pub rules: Vec<RuleSpec>,
    pub nsim: usize,
    #[serde(default)]
    pub nboot: usize,
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub binary_variance: BinaryVariance,
}

impl ScenarioConfig {
    /// A normal-outcome scenario with the default design (p = 5, β = 0.5).
    pub fn normal(n0: usize, delta: f64, cap: f64, nsim: usize, nboot: usize, seed: u64) -> Self {
        Self {
            id: None,
            outcome: OutcomeFamily::Normal,
            df: default_df(),
            p: default_p(),
            beta: None,
            n0,
            n1_multiplier: 1,
            delta,
            p0: default_p0(),
            cap,
            rules: default_rules(),
            nsim,
            nboot,
            seed,
            level: default_level(),
            grid_points: default_grid_points(),
            binary_variance: BinaryVariance::default(),
        }
    }

    pub fn beta_value(&self) -> f64 {
        self.beta.unwrap_or(match self.outcome {
            OutcomeFamily::Binary => 0.2,
            _ => 0.5,
        })
    }

    pub fn n1(&self) -> usize {
        self.n0 * self.n1_multiplier
    }

    /// Every problem with the configuration, as `field: message`.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bad = |field: &str, msg: String| out.push(format!("{field}: {msg}"));
        if self.n0 < 2 {
            bad("n0", format!("must be at least 2, got {}", self.n0));
        }
        if self.n1_multiplier == 0 {
            bad("n1_multiplier", "must be at least 1".into());
        }
        if self.nsim < 2 {
            bad("nsim", format!("must be at least 2, got {}", self.nsim));
        }
        if self.nboot == 1 {
            bad("nboot", "must be 0 (no coverage) or at least 2".into());
        }
        if !self.delta.is_finite() {
            bad("delta", "must be finite".into());
        }
        if !(self.cap > 0.0) {
            bad("cap", format!("must be > 0, got {}", self.cap));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            bad("level", format!("must lie in (0, 1), got {}", self.level));
        }
        if self.grid_points == 0 {
            bad("grid_points", "must be at least 1".into());
        }
        if !self.beta_value().is_finite() {
            bad("beta", "must be finite".into());
        }
        if self.rules.is_empty() {
            bad("rules", "at least one rule is required".into());
        }
        for (i, r) in self.rules.iter().enumerate() {
            if !(r.eta >= 0.0) || !r.eta.is_finite() {
                bad(&format!("rules[{i}].eta"), format!("must be >= 0, got {}", r.eta));
            }
        }
        match self.outcome {
            OutcomeFamily::Binary => {
                if !(self.p0 > 0.0 && self.p0 < 1.0) {
                    bad("p0", format!("must lie in (0, 1), got {}", self.p0));
                }
                let q = self.p0 + self.delta;
                if !(q > 0.0 && q < 1.0) {
                    bad("delta", format!("p0 + delta = {q} must lie in (0, 1)"));
                }
            }
            OutcomeFamily::StudentT => {
                if !(self.df > 2.0) {
                    bad("df", format!("must exceed 2, got {}", self.df));
                }
            }
            OutcomeFamily::Normal => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    fn generate<R: Rng + ?Sized>(
        &self,
        n: usize,
        shift: f64,
        source: Source,
        rng: &mut R,
    ) -> Result<ControlSample> {
        let beta = self.beta_value();
        match self.outcome {
            OutcomeFamily::Normal => gen_normal(n, shift, self.p, beta, source, rng),
            OutcomeFamily::StudentT => gen_student_t(n, shift, self.p, beta, self.df, source, rng),
            OutcomeFamily::Binary => gen_binary(n, shift, self.p0, self.p, beta, source, rng),
        }
    }

    /// True internal control mean and whether it is exact.
    pub fn truth(&self) -> (f64, TruthSource) {
        match self.outcome {
            OutcomeFamily::Binary => true_binary_rate(self.p0, 0.0, self.p, self.beta_value()),
            _ => (0.0, TruthSource::Exact),
        }
    }

    /// Analytic variance of the internal sample mean (no borrowing).
    pub fn no_borrowing_variance(&self) -> f64 {
        let beta = self.beta_value();
        let xvar = self.p as f64 * beta * beta;
        let yvar = match self.outcome {
            OutcomeFamily::Normal => 1.0 + xvar,
            OutcomeFamily::StudentT => self.df / (self.df - 2.0) + xvar,
            OutcomeFamily::Binary => {
                let (t, _) = self.truth();
                t * (1.0 - t)
            }
        };
        yvar / self.n0 as f64
    }
}

/// Aggregated operating characteristics of one rule in one scenario.
///
/// Every `*_se` column is a Monte-Carlo standard error. Coverage columns are
/// empty when the scenario ran without bootstrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub outcome: String,
    pub n0: usize,
    pub n1: usize,
    pub delta: f64,
    pub cap: f64,
    pub rule: String,
    pub eta: f64,
    pub nsim: usize,
    pub nboot: usize,
    pub seed: u64,
    pub truth: f64,
    pub truth_source: String,
    pub mean_estimate: f64,
    pub bias: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub mse: f64,
    pub mse_se: f64,
    pub coverage_normal: Option<f64>,
    pub coverage_normal_se: Option<f64>,
    pub coverage_percentile: Option<f64>,
    pub coverage_percentile_se: Option<f64>,
    pub mean_a: f64,
    pub capped_fraction: f64,
    pub no_borrowing_variance: f64,
    pub no_borrowing_variance_analytic: f64,
    pub failures: usize,
}

impl MetricsRow {
    pub const COLUMNS: [&'static str; 28] = [
        "scenario",
        "outcome",
        "n0",
        "n1",
        "delta",
        "cap",
        "rule",
        "eta",
        "nsim",
        "nboot",
        "seed",
        "truth",
        "truth_source",
        "mean_estimate",
        "bias",
        "variance",
        "variance_se",
        "mse",
        "mse_se",
        "coverage_normal",
        "coverage_normal_se",
        "coverage_percentile",
        "coverage_percentile_se",
        "mean_a",
        "capped_fraction",
        "no_borrowing_variance",
        "no_borrowing_variance_analytic",
        "failures",
    ];
}

/// Full result of a scenario: the metric rows plus the per-replicate values
/// they were aggregated from (useful for paired comparisons between rules).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub rows: Vec<MetricsRow>,
    /// `estimates[r][i]`: rule `r`'s plug-in estimate in successful replicate `i`.
    pub estimates: Vec<Vec<f64>>,
    /// Internal-only sample means per successful replicate.
    pub no_borrowing: Vec<f64>,
    pub truth: f64,
}

struct RuleRep {
    estimate: f64,
    a: f64,
    capped: bool,
    cover_normal: bool,
    cover_percentile: bool,
}

struct Rep {
    rules: Vec<RuleRep>,
    mu0: f64,
}

/// Monte-Carlo standard error of a mean of `x`.
fn mean_se(x: &[f64]) -> f64 {
    sample_sd(x) / (x.len() as f64).sqrt()
}

pub fn run_scenario(cfg: &ScenarioConfig, execution: Execution) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let grid = A0Grid::equispaced(cfg.grid_points)?;
    let rules: Vec<BorrowingRule> = cfg
        .rules
        .iter()
        .map(|r| BorrowingRule::new(r.kind, r.eta, cfg.cap))
        .collect::<Result<_>>()?;
    let (truth, truth_source) = cfg.truth();
    let kind = match cfg.outcome {
        OutcomeFamily::Binary => OutcomeKind::Binary,
        _ => OutcomeKind::Continuous,
    };
    let n1 = cfg.n1();

    let reps: Vec<Result<Rep>> = map_indexed(cfg.nsim, execution, |i| {
        let mut rng = replicate_rng(cfg.seed, i as u64);
        let d0 = cfg.generate(cfg.n0, 0.0, Source::Internal, &mut rng)?;
        let d1 = cfg.generate(n1, cfg.delta, Source::External, &mut rng)?;
        let boot_seed: u64 = rng.random();
        let mut out = Vec::with_capacity(rules.len());
        for rule in &rules {
            let fit = estimate(
                d0.outcomes(),
                None,
                d1.outcomes(),
                None,
                kind,
                rule,
                &grid,
                cfg.binary_variance,
            )?;
            let (mut cover_normal, mut cover_percentile) = (false, false);
            if cfg.nboot > 0 {
                let bcfg = BootstrapConfig::new(cfg.nboot, boot_seed, *rule)
                    .with_grid(grid.clone())
                    .with_binary_variance(cfg.binary_variance)
                    .with_execution(Execution::Sequential);
                let draws = run(&d0, &d1, None, &bcfg)?;
                cover_normal = interval(&draws.mu_c, fit.mu_c, IntervalMethod::NormalApprox, cfg.level)?
                    .contains(truth);
                cover_percentile = interval(&draws.mu_c, fit.mu_c, IntervalMethod::Percentile, cfg.level)?
                    .contains(truth);
            }
            out.push(RuleRep {
                estimate: fit.mu_c,
                a: fit.a,
                capped: fit.capped,
                cover_normal,
                cover_percentile,
            });
        }
        Ok(Rep {
            rules: out,
            mu0: mean(d0.outcomes()),
        })
    });

    let mut failures = 0usize;
    let mut ok = Vec::with_capacity(reps.len());
    for r in reps {
        match r {
            Ok(rep) => ok.push(rep),
            Err(_) => failures += 1,
        }
    }
    if ok.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "only {} of {} replicates succeeded",
            ok.len(),
            cfg.nsim
        )));
    }
    let valid = ok.len() as f64;
    let no_borrowing: Vec<f64> = ok.iter().map(|r| r.mu0).collect();
    let nb_var = sample_variance(&no_borrowing);
    let scenario = cfg.id.clone().unwrap_or_else(|| {
        format!(
            "{}-n{}x{}-d{}-c{}",
            cfg.outcome.label(),
            cfg.n0,
            cfg.n1_multiplier,
            cfg.delta,
            cfg.cap
        )
    });

    let mut rows = Vec::with_capacity(rules.len());
    let mut estimates = Vec::with_capacity(rules.len());
    for (k, spec) in cfg.rules.iter().enumerate() {
        let est: Vec<f64> = ok.iter().map(|r| r.rules[k].estimate).collect();
        let m = mean(&est);
        let centred_sq: Vec<f64> = est.iter().map(|e| (e - m) * (e - m)).collect();
        let err_sq: Vec<f64> = est.iter().map(|e| (e - truth) * (e - truth)).collect();
        let a: Vec<f64> = ok.iter().map(|r| r.rules[k].a).collect();
        let capped = ok.iter().filter(|r| r.rules[k].capped).count() as f64 / valid;
        let coverage = |f: fn(&RuleRep) -> bool| -> (Option<f64>, Option<f64>) {
            if cfg.nboot == 0 {
                return (None, None);
            }
            let c = ok.iter().filter(|r| f(&r.rules[k])).count() as f64 / valid;
            (Some(c), Some((c * (1.0 - c) / valid).sqrt()))
        };
        let (cn, cn_se) = coverage(|r| r.cover_normal);
        let (cp, cp_se) = coverage(|r| r.cover_percentile);
        rows.push(MetricsRow {
            scenario: scenario.clone(),
            outcome: cfg.outcome.label().into(),
            n0: cfg.n0,
            n1,
            delta: cfg.delta,
            cap: cfg.cap,
            rule: spec.label(),
            eta: spec.eta,
            nsim: cfg.nsim,
            nboot: cfg.nboot,
            seed: cfg.seed,
            truth,
            truth_source: truth_source.label().into(),
            mean_estimate: m,
            bias: m - truth,
            variance: sample_variance(&est),
            variance_se: mean_se(&centred_sq),
            mse: pairwise_sum(&err_sq) / valid,
            mse_se: mean_se(&err_sq),
            coverage_normal: cn,
            coverage_normal_se: cn_se,
            coverage_percentile: cp,
            coverage_percentile_se: cp_se,
            mean_a: mean(&a),
            capped_fraction: capped,
            no_borrowing_variance: nb_var,
            no_borrowing_variance_analytic: cfg.no_borrowing_variance(),
            failures,
        });
        estimates.push(est);
    }
    Ok(ScenarioOutcome {
        rows,
        estimates,
        no_borrowing,
        truth,
    })
}
