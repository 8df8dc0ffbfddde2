use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dynborrow::bboot::{interval, run, BootstrapConfig, IntervalMethod};
use dynborrow::data::{BinaryVariance, ControlSample, OutcomeKind, Source};
use dynborrow::exec::Execution;
use dynborrow::ipw::{balance, fit_ps, ipw_weights};
use dynborrow::rules::{A0Grid, BorrowingRule, RuleKind};
use dynborrow::stats::{mean, sample_sd};

use crate::error::{CliError, Result};
use crate::input::{extract, into_sample, read_table, settle_kind, Arm, Table};
use crate::report::{
    AnalysisReport, BalanceEntry, Estimate, InputFingerprint, Metadata, Propensity, RuleResult, SampleInfo,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Maxml,
    Cminmse,
    Minmse,
    /// Internal controls only.
    None,
}

impl From<RuleArg> for RuleKind {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Maxml => RuleKind::MaxMl,
            RuleArg::Cminmse => RuleKind::CMinMse,
            RuleArg::Minmse => RuleKind::MinMse,
            RuleArg::None => RuleKind::NoBorrowing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Auto,
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BinaryVarianceArg {
    Plugin,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV with the trial's internal controls.
    #[arg(long)]
    pub internal: Option<PathBuf>,
    /// CSV with the external controls.
    #[arg(long)]
    pub external: Option<PathBuf>,
    /// CSV with the treated arm; adds treatment-effect draws.
    #[arg(long)]
    pub treated: Option<PathBuf>,
    /// Single CSV holding every arm, split by --arm.
    #[arg(long, conflicts_with_all = ["internal", "external", "treated"], requires = "arm")]
    pub data: Option<PathBuf>,
    /// Arm column in --data.
    #[arg(long)]
    pub arm: Option<String>,
    #[arg(long, default_value = "internal")]
    pub internal_label: String,
    #[arg(long, default_value = "external")]
    pub external_label: String,
    #[arg(long, default_value = "treated")]
    pub treated_label: String,
    #[arg(long)]
    pub outcome: String,
    /// Comma-separated covariate columns (needed for --ipw).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Borrowing rule(s), comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "minmse")]
    pub rule: Vec<RuleArg>,
    /// Bias weight of the minMSE rule.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Upper bound on the borrowing weight a.
    #[arg(long, default_value_t = 1.0)]
    pub cap: f64,
    #[arg(long, default_value_t = 2000)]
    pub boots: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight external controls by the odds of internal membership.
    #[arg(long)]
    pub ipw: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Points of the a0 grid for maxML on binary outcomes.
    #[arg(long, default_value_t = A0Grid::DEFAULT_POINTS)]
    pub grid_points: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub outcome_kind: KindArg,
    #[arg(long, value_enum, default_value = "plugin")]
    pub binary_variance: BinaryVarianceArg,
    /// Credible level for both interval types.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Loaded {
    arms: Vec<Arm>,
    inputs: Vec<InputFingerprint>,
}

fn fingerprint(role: &str, t: &Table, rows: usize) -> InputFingerprint {
    InputFingerprint {
        role: role.into(),
        path: t.path.display().to_string(),
        sha256: t.sha256.clone(),
        rows,
    }
}

fn load(args: &AnalyzeArgs) -> Result<Loaded> {
    let mut arms = Vec::new();
    let mut inputs = Vec::new();
    if let Some(path) = &args.data {
        let table = read_table(path)?;
        let col = args.arm.as_deref().expect("clap enforces --arm");
        let labels = [
            (Source::Internal, &args.internal_label),
            (Source::External, &args.external_label),
            (Source::Treated, &args.treated_label),
        ];
        for (source, label) in labels {
            let arm = extract(&table, source, Some((col, label)), &args.outcome, &args.covariates)?;
            if source == Source::Treated && arm.outcomes.is_empty() {
                continue;
            }
            arms.push(arm);
        }
        inputs.push(fingerprint("data", &table, table.rows.len()));
    } else {
        let (Some(internal), Some(external)) = (&args.internal, &args.external) else {
            return Err(CliError::Input(
                "either --data with --arm, or both --internal and --external, are required".into(),
            ));
        };
        let files = [
            (Source::Internal, "internal", Some(internal)),
            (Source::External, "external", Some(external)),
            (Source::Treated, "treated", args.treated.as_ref()),
        ];
        for (source, role, path) in files {
            let Some(path) = path else { continue };
            let table = read_table(path)?;
            arms.push(extract(&table, source, None, &args.outcome, &args.covariates)?);
            inputs.push(fingerprint(role, &table, table.rows.len()));
        }
    }
    Ok(Loaded { arms, inputs })
}

fn estimate(draws: &[f64], point: f64, level: f64) -> Result<Estimate> {
    let summary = dynborrow::bboot::DrawSummary::of(draws);
    let rmse = (draws.iter().map(|d| (d - point).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
    Ok(Estimate {
        point,
        posterior_mean: summary.mean,
        posterior_median: summary.median,
        posterior_sd: summary.sd,
        root_mse: rmse,
        normal_ci: interval(draws, point, IntervalMethod::NormalApprox, level)?,
        percentile_ci: interval(draws, point, IntervalMethod::Percentile, level)?,
    })
}

fn balance_report(
    d0: &ControlSample,
    d1: &ControlSample,
    names: &[String],
) -> Result<(Propensity, Vec<BalanceEntry>)> {
    let (x0, x1) = match (d0.covariates(), d1.covariates()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(CliError::Input("--ipw needs --covariates".into())),
    };
    let model = fit_ps(x0, x1, None)?;
    let w = ipw_weights(&model, x1);
    let table = balance(x0, x1, &w)?;
    let entries = table
        .rows
        .iter()
        .map(|r| {
            let m0 = x0.column(r.covariate).sum::<f64>() / x0.nrows() as f64;
            BalanceEntry {
                covariate: names[r.covariate].clone(),
                internal_mean: m0,
                external_mean: m0 + r.raw_diff,
                weighted_external_mean: m0 + r.weighted_diff,
                raw_diff: r.raw_diff,
                weighted_diff: r.weighted_diff,
            }
        })
        .collect();
    let terms = std::iter::once("intercept".to_string()).chain(names.iter().cloned()).collect();
    Ok((Propensity { terms, model }, entries))
}

pub fn analyze(args: &AnalyzeArgs, seed: u64, execution: Execution) -> Result<AnalysisReport> {
    if args.ipw && args.covariates.is_empty() {
        return Err(CliError::Input("--ipw needs --covariates".into()));
    }
    let Loaded { arms, inputs } = load(args)?;
    let requested = match args.outcome_kind {
        KindArg::Auto => None,
        KindArg::Continuous => Some(OutcomeKind::Continuous),
        KindArg::Binary => Some(OutcomeKind::Binary),
    };
    let kind = settle_kind(requested, &arms.iter().collect::<Vec<_>>());
    let samples = arms
        .into_iter()
        .map(|a| into_sample(a, kind))
        .collect::<Result<Vec<_>>>()?;
    let d0 = &samples[0];
    let d1 = &samples[1];
    let dt = samples.get(2);

    let grid = A0Grid::equispaced(args.grid_points)?;
    let binary_variance = match args.binary_variance {
        BinaryVarianceArg::Plugin => BinaryVariance::Plugin,
        BinaryVarianceArg::Beta => BinaryVariance::BetaPosterior,
    };

    let mut results = Vec::new();
    for r in &args.rule {
        let rule = BorrowingRule::new((*r).into(), args.eta, args.cap)?;
        let cfg = BootstrapConfig::new(args.boots, seed, rule)
            .with_ipw(args.ipw)
            .with_grid(grid.clone())
            .with_binary_variance(binary_variance)
            .with_execution(execution);
        let draws = run(d0, d1, dt, &cfg)?;
        let a = draws.a_summary();
        let treatment_effect = match (&draws.tau, draws.point_tau) {
            (Some(t), Some(p)) => Some(estimate(t, p, args.level)?),
            _ => None,
        };
        results.push(RuleResult {
            rule: rule.kind,
            control_mean: estimate(&draws.mu_c, draws.point, args.level)?,
            treatment_effect,
            point_a: draws.point_a,
            point_a0: draws.point_a0,
            a_mean: a.mean,
            a_sd: a.sd,
            capped_fraction: draws.capped_fraction,
            negligible_borrowing: a.mean < 0.05,
            degenerate_replicates: draws.degenerate_replicates,
            ipw_trouble_replicates: draws.ipw_trouble_replicates,
        });
    }

    let (propensity, balance) = if args.ipw {
        let (p, b) = balance_report(d0, d1, &args.covariates)?;
        (Some(p), Some(b))
    } else {
        (None, None)
    };

    Ok(AnalysisReport {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            boots: args.boots,
            cap: args.cap,
            eta: args.eta,
            level: args.level,
            ipw: args.ipw,
            outcome: args.outcome.clone(),
            outcome_kind: kind,
            covariates: args.covariates.clone(),
            grid_points: args.grid_points,
            binary_variance,
            inputs,
        },
        samples: samples
            .iter()
            .map(|s| SampleInfo {
                source: s.source(),
                n: s.n(),
                mean: mean(s.outcomes()),
                sd: sample_sd(s.outcomes()),
            })
            .collect(),
        results,
        propensity,
        balance,
    })
}
