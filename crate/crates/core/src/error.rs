use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: n={left} vs n={right}")]
    GridMismatch { left: usize, right: usize },

    #[error("expected {expected} samples (n^3), got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("lattice scan of {points} points exceeds the budget of {budget}")]
    BudgetExceeded { points: u64, budget: u64 },

    #[error("density left the positivity window ({lo}, {hi}): min rho = {min}, max rho = {max}{}", stage_suffix(.stage))]
    Positivity {
        min: f64,
        max: f64,
        lo: f64,
        hi: f64,
        stage: Option<usize>,
    },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("eigen-solver failed: {0}")]
    Eigen(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid order parameters: {0}")]
    InvalidOrders(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("i/o error at {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn stage_suffix(stage: &Option<usize>) -> String {
    match stage {
        Some(s) => format!(" (Runge-Kutta stage {s})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
