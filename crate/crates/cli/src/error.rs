use bandit_bonus::Error as CoreError;

/// Failures mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Solver(_) => 5,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Io(_) => CliError::Io(msg),
            CoreError::Config(_) | CoreError::Csv(_) => CliError::Config(msg),
            CoreError::Domain { .. }
            | CoreError::NegativeInput(..)
            | CoreError::Invariant(_)
            | CoreError::Assumption(_)
            | CoreError::Inconsistent(_)
            | CoreError::Welfare { .. } => CliError::Invariant(msg),
            CoreError::Range { .. }
            | CoreError::Singularity(_)
            | CoreError::StepRejected { .. }
            | CoreError::NonTermination { .. }
            | CoreError::NoRoot(_)
            | CoreError::Regime(_) => CliError::Solver(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
