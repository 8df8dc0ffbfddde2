use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample has {n} observation(s); at least 2 are required")]
    DegenerateSample { n: usize },
    #[error("weights must be finite, non-negative and have a positive sum")]
    DegenerateWeights,
    #[error("invalid counts: {successes} successes out of {trials} trials")]
    InvalidCounts { successes: f64, trials: f64 },
    #[error("variance is zero or undefined; the borrowing rule cannot be evaluated")]
    DegenerateVariance,
    #[error("invalid a0 grid: {0}")]
    InvalidGrid(String),
    #[error("borrowing weight must be non-negative, got {0}")]
    InvalidWeight(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("propensity design matrix is rank deficient")]
    SingularDesign,
}
