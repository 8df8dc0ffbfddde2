use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input data or flags: missing columns, non-numeric values.
    #[error("{0}")]
    Input(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Config(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<dynborrow::Error> for CliError {
    fn from(e: dynborrow::Error) -> Self {
        use dynborrow::Error as E;
        match e {
            E::DegenerateSample { .. } | E::DegenerateVariance | E::DegenerateWeights | E::SingularDesign => {
                CliError::Degenerate(e.to_string())
            }
            E::InvalidConfig(_) | E::InvalidGrid(_) => CliError::Config(vec![e.to_string()]),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
