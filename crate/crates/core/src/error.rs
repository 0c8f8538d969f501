use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of chart {chart}")]
    Domain { chart: usize, point: Vec<f64> },

    #[error("torsion tensor is not totally antisymmetric: T[{k}][{i}][{j}] vs positions ({a},{b}) differ by {gap:e}")]
    NotAntisymmetric {
        k: usize,
        i: usize,
        j: usize,
        a: usize,
        b: usize,
        gap: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("integration failed at step {step}: {reason}")]
    Integration { step: usize, reason: String },

    #[error("frame ill-conditioned at step {step} (condition estimate {condition:e})")]
    IllConditioned { step: usize, condition: f64 },

    #[error("time {t} is not a grid point of a {steps}-step grid")]
    OffGrid { t: f64, steps: usize },

    #[error("invalid identifier `{id}`: {reason}")]
    InvalidId { id: String, reason: String },

    #[error("non-orthogonal matrix at step {step} (defect {defect:e})")]
    NotOrthogonal { step: usize, defect: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
