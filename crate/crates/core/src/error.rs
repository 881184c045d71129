use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation requires a nonzero polynomial")]
    ZeroPolynomial,
    #[error("every input polynomial is zero")]
    AllZero,
    #[error("initial value a must be nonzero")]
    ZeroInitialValue,
    #[error("Q is not a solution for the given data")]
    NotASolution,
    #[error("data is not divisible by {0}")]
    DataNotDivisible(String),
    #[error("support index {index} exceeds reversal bound {bound}")]
    IndexOverflow { index: usize, bound: usize },
    #[error("branch points {0} and {1} coincide")]
    DuplicateRoots(usize, usize),
    #[error("branch point count {0} is odd")]
    OddCount(usize),
    #[error("genus {0} is below 2")]
    GenusTooSmall(usize),
    #[error("point lies on a Weierstrass point (|f| = {0:e})")]
    AtSingularity(f64),
    #[error("finite-difference stencil at ({0}, {1}) touches a singularity")]
    SingularityInGrid(f64, f64),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
