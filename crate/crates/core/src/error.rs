use thiserror::Error;

/// Errors raised by the solvers, simulators and loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },
    #[error("negative input {0} (clamp negative bonuses to zero first)")]
    NegativeInput(f64),
    #[error("range error: {value} exceeds the attainable maximum {max}")]
    Range { value: f64, max: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("singular ODE coefficient at alpha = {0}")]
    Singularity(f64),
    #[error("step rejected at alpha = {alpha}: residual {residual} fell below the branch")]
    StepRejected { alpha: f64, residual: f64 },
    #[error("marcher did not terminate before alpha = {alpha}")]
    NonTermination { alpha: f64 },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("welfare ordering violated at alpha = {alpha}: {detail}")]
    Welfare { alpha: f64, detail: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Error {
    Error::Domain {
        what,
        value,
        domain: domain.into(),
    }
}
