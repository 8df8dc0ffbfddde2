use dynborrow::exec::Execution;
use dynborrow::rules::RuleKind;
use dynborrow::sim::{run_scenario, OutcomeFamily, RuleSpec, ScenarioConfig};

#[test]
fn no_borrowing_reference_matches_analytic_variance() {
    let mut cfg = ScenarioConfig::normal(100, 0.0, 1.0, 3000, 0, 77);
    cfg.rules = vec![RuleSpec::new(RuleKind::NoBorrowing)];
    let out = run_scenario(&cfg, Execution::Parallel).unwrap();
    let row = &out.rows[0];
    assert!((row.no_borrowing_variance_analytic - 0.0225).abs() < 1e-15);
    assert!(
        (row.variance - row.no_borrowing_variance_analytic).abs() < 3.0 * row.variance_se,
        "{} vs {} (se {})",
        row.variance,
        row.no_borrowing_variance_analytic,
        row.variance_se
    );
}

#[test]
fn large_shift_pushes_mse_back_to_no_borrowing() {
    let out = run_scenario(&ScenarioConfig::normal(100, 1.0, 1.0, 2000, 0, 5), Execution::Parallel).unwrap();
    for row in &out.rows {
        let rel = row.mse / row.no_borrowing_variance_analytic;
        assert!((0.85..1.25).contains(&rel), "{}: relative mse {rel}", row.rule);
        assert!(row.mean_a < 0.05);
    }
}

#[test]
fn tripled_external_sample_borrows_more() {
    let mut one = ScenarioConfig::normal(50, 0.0, 3.0, 1000, 0, 8);
    let base = run_scenario(&one, Execution::Parallel).unwrap();
    one.n1_multiplier = 3;
    let tripled = run_scenario(&one, Execution::Parallel).unwrap();
    for (a, b) in base.rows.iter().zip(&tripled.rows) {
        assert_eq!(b.n1, 150);
        assert!(b.mean_a > a.mean_a, "{}: {} vs {}", a.rule, a.mean_a, b.mean_a);
    }
}

#[test]
fn binary_scenario_with_covariates_uses_oracle_truth() {
    let mut cfg = ScenarioConfig::normal(60, 0.1, 1.0, 200, 0, 12);
    cfg.outcome = OutcomeFamily::Binary;
    cfg.beta = Some(0.2);
    let out = run_scenario(&cfg, Execution::Parallel).unwrap();
    let row = &out.rows[0];
    assert_eq!(row.truth_source, "monte_carlo");
    // Symmetric linear predictor pulls the rate toward 1/2 slightly.
    assert!(row.truth > 0.2 && row.truth < 0.23, "{}", row.truth);
    for row in &out.rows {
        assert_eq!(row.failures, 0);
        assert!(row.mse >= 0.0 && row.variance >= 0.0);
    }
}
