use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised by the fitting, scanning and analytics routines.
#[derive(Debug, Error)]
pub enum LpplError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("design matrix is numerically singular (condition number {0:.3e})")]
    RankDeficient(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no feasible fit: {0}")]
    NoFeasibleFit(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("{0} is not a trading day")]
    NotTradingDay(NaiveDate),

    #[error("grid of {nodes} nodes exceeds the cap of {cap}")]
    GridTooLarge { nodes: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LpplError>;
