use thiserror::Error;

use crate::mcsc::PowerAllocation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("value {value} outside the domain [{lo}, {hi}] of {what}")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure in {context}; best iterate {best:?}")]
    NonConvergence {
        context: &'static str,
        best: Box<PowerAllocation>,
    },

    #[error("trace too short for a stability verdict: {len} slots (need at least {min})")]
    InsufficientData { len: usize, min: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
