use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown product {product}")]
    UnknownProduct { product: usize },
    #[error("product {product} has no distribution {distribution}")]
    UnknownDistribution { product: usize, distribution: usize },
    #[error("no distribution of product {product} is enforced by levels {levels:?}")]
    MapNotTotal { product: usize, levels: Vec<usize> },
    #[error("first-stage decision is infeasible: {0}")]
    InfeasibleDecision(String),
    #[error("oracle needs {combinations} level assignments, budget is {budget}")]
    OracleTooLarge { combinations: String, budget: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Kernel(#[from] optkernel::KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
