use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("row {row} references undeclared variable {var}")]
    UnknownVariable { row: usize, var: usize },
    #[error("variable {name}: {reason}")]
    BadVariable { name: String, reason: String },
    #[error("row {name}: {reason}")]
    BadRow { name: String, reason: String },
}
