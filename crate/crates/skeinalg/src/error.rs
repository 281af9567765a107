//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SkeinError>;

#[derive(Debug, Error)]
pub enum SkeinError {
    #[error("division by zero")]
    DivisionByZero,

    #[error("evaluation at a pole (|den(z)| = {abs:e})")]
    Pole { abs: f64 },

    #[error("evaluation at z = 0 is outside the Laurent domain")]
    EvalAtZero,

    #[error("strand count mismatch: expected {expected}, found {found}")]
    StrandMismatch { expected: usize, found: usize },

    #[error("generator index {index} out of range for {strands} strands")]
    IndexOutOfRange { index: usize, strands: usize },

    #[error("triple ({0}, {1}, {2}) is not admissible")]
    InadmissibleTriple(usize, usize, usize),

    #[error("oracle budget exceeded: {strands} strands (limit {limit})")]
    BudgetExceeded { strands: usize, limit: usize },

    #[error("shape mismatch: expected (k, i) = ({expected_k}, {expected_i}), found ({found_k}, {found_i})")]
    ShapeMismatch {
        expected_k: usize,
        expected_i: usize,
        found_k: usize,
        found_i: usize,
    },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("element is not in the image of the coloring map (nonzero residual)")]
    NotInColoredImage,

    #[error("root finding did not converge after {iterations} iterations (max residual {residual:e})")]
    RootFinding { iterations: u32, residual: f64 },

    #[error("recursive tangle has a non-monomial coefficient at {0}")]
    NonMonomialAlpha(String),

    #[error("residual denominator after clearing: {0}")]
    ResidualDenominator(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
