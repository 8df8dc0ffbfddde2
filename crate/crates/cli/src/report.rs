use std::io::Write;

use dynborrow::bboot::IntervalEstimate;
use dynborrow::data::{BinaryVariance, OutcomeKind, Source};
use dynborrow::ipw::PsModel;
use dynborrow::rules::RuleKind;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Everything `analyze` produces. The metadata block is enough to re-run the
/// analysis and get the same report back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: Metadata,
    pub samples: Vec<SampleInfo>,
    pub results: Vec<RuleResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propensity: Option<Propensity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<Vec<BalanceEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub seed: u64,
    pub boots: usize,
    pub cap: f64,
    pub eta: f64,
    pub level: f64,
    pub ipw: bool,
    pub outcome: String,
    pub outcome_kind: OutcomeKind,
    pub covariates: Vec<String>,
    pub grid_points: usize,
    pub binary_variance: BinaryVariance,
    pub inputs: Vec<InputFingerprint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFingerprint {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub source: Source,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Posterior summary of one quantity (control mean or treatment effect).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Plug-in estimate on the unweighted data.
    pub point: f64,
    pub posterior_mean: f64,
    pub posterior_median: f64,
    pub posterior_sd: f64,
    /// Root mean squared deviation of the draws from `point`.
    pub root_mse: f64,
    pub normal_ci: IntervalEstimate,
    pub percentile_ci: IntervalEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule: RuleKind,
    pub control_mean: Estimate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treatment_effect: Option<Estimate>,
    pub point_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_a0: Option<f64>,
    pub a_mean: f64,
    pub a_sd: f64,
    pub capped_fraction: f64,
    /// Mean borrowing weight below 0.05: the external data barely contribute.
    pub negligible_borrowing: bool,
    pub degenerate_replicates: usize,
    pub ipw_trouble_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propensity {
    /// `intercept` followed by the covariate names.
    pub terms: Vec<String>,
    pub model: PsModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceEntry {
    pub covariate: String,
    pub internal_mean: f64,
    pub external_mean: f64,
    pub weighted_external_mean: f64,
    pub raw_diff: f64,
    pub weighted_diff: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    rule: &'a str,
    quantity: &'a str,
    point: f64,
    posterior_mean: f64,
    posterior_median: f64,
    posterior_sd: f64,
    root_mse: f64,
    normal_lower: f64,
    normal_upper: f64,
    percentile_lower: f64,
    percentile_upper: f64,
    point_a: f64,
    a_mean: f64,
    a_sd: f64,
    capped_fraction: f64,
    negligible_borrowing: bool,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// One row per rule and quantity; metadata and balance are JSON-only.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.results {
            let quantities = std::iter::once(("control_mean", &r.control_mean))
                .chain(r.treatment_effect.as_ref().map(|t| ("treatment_effect", t)));
            for (quantity, e) in quantities {
                w.serialize(CsvRow {
                    rule: r.rule.label(),
                    quantity,
                    point: e.point,
                    posterior_mean: e.posterior_mean,
                    posterior_median: e.posterior_median,
                    posterior_sd: e.posterior_sd,
                    root_mse: e.root_mse,
                    normal_lower: e.normal_ci.lower,
                    normal_upper: e.normal_ci.upper,
                    percentile_lower: e.percentile_ci.lower,
                    percentile_upper: e.percentile_ci.upper,
                    point_a: r.point_a,
                    a_mean: r.a_mean,
                    a_sd: r.a_sd,
                    capped_fraction: r.capped_fraction,
                    negligible_borrowing: r.negligible_borrowing,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
