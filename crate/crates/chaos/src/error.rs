use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("{what} = {value} exceeds the cap of {limit}")]
    Cap { what: &'static str, value: usize, limit: usize },

    #[error("operands live over different coordinate counts ({0} vs {1})")]
    Dimension(usize, usize),

    #[error("coordinate {index} out of range for N = {n}")]
    Coordinate { index: usize, n: usize },

    #[error("operator is not antisymmetric at ({i}, {j})")]
    NotAntisymmetric { i: usize, j: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ChaosError>;
