use dynborrow::bboot::{IntervalEstimate, IntervalMethod};
use dynborrow::data::{BinaryVariance, OutcomeKind, Source};
use dynborrow::rules::RuleKind;
use dynborrow_cli::report::{AnalysisReport, Estimate, InputFingerprint, Metadata, RuleResult, SampleInfo};
use proptest::prelude::*;

fn ci(method: IntervalMethod, lower: f64, upper: f64) -> IntervalEstimate {
    IntervalEstimate {
        method,
        lower,
        upper,
        level: 0.95,
        degenerate: false,
    }
}

fn estimate(v: &[f64]) -> Estimate {
    Estimate {
        point: v[0],
        posterior_mean: v[1],
        posterior_median: v[2],
        posterior_sd: v[3].abs(),
        root_mse: v[4].abs(),
        normal_ci: ci(IntervalMethod::NormalApprox, v[5], v[6]),
        percentile_ci: ci(IntervalMethod::Percentile, v[7], v[0]),
    }
}

fn report(v: &[f64], seed: u64, with_tau: bool) -> AnalysisReport {
    AnalysisReport {
        metadata: Metadata {
            version: "0.1.0".into(),
            seed,
            boots: 100,
            cap: v[1].abs(),
            eta: v[2].abs(),
            level: 0.95,
            ipw: false,
            outcome: "y".into(),
            outcome_kind: OutcomeKind::Continuous,
            covariates: vec![],
            grid_points: 51,
            binary_variance: BinaryVariance::Plugin,
            inputs: vec![InputFingerprint {
                role: "internal".into(),
                path: "a \"quoted\" path.csv".into(),
                sha256: "00".repeat(32),
                rows: 3,
            }],
        },
        samples: vec![SampleInfo {
            source: Source::Internal,
            n: 3,
            mean: v[3],
            sd: v[4].abs(),
        }],
        results: vec![RuleResult {
            rule: RuleKind::MinMse,
            control_mean: estimate(v),
            treatment_effect: with_tau.then(|| estimate(&v[1..])),
            point_a: v[5].abs(),
            point_a0: None,
            a_mean: v[6].abs(),
            a_sd: v[7].abs(),
            capped_fraction: 0.25,
            negligible_borrowing: false,
            degenerate_replicates: 0,
            ipw_trouble_replicates: 0,
        }],
        propensity: None,
        balance: None,
    }
}

proptest! {
    #[test]
    fn parse_of_emit_is_identity(
        v in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 9),
        seed in any::<u64>(),
        with_tau in any::<bool>(),
    ) {
        let r = report(&v, seed, with_tau);
        let back = AnalysisReport::from_json(&r.to_json()).unwrap();
        prop_assert_eq!(back, r);
    }
}
