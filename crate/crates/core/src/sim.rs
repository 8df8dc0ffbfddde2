//! Monte-Carlo harness for the operating characteristics of the borrowing
//! rules: variance, MSE and interval coverage across scenario grids.

pub mod generate;
pub mod scenario;

pub use generate::{gen_binary, gen_normal, gen_student_t, true_binary_rate, TruthSource};
pub use scenario::{
    run_scenario, MetricsRow, OutcomeFamily, RuleSpec, ScenarioConfig, ScenarioOutcome,
};
