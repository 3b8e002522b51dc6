use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid box domain: {0}")]
    InvalidDomain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("objective is not finite at the starting point")]
    NonFiniteStart,
    #[error("objective could not be evaluated at any start point")]
    Unfittable,
    #[error("covariance factorization failed even with jitter {jitter:e}")]
    FactorizationFailure { jitter: f64 },
    #[error("covariance factorization failed at iteration {iteration}")]
    FactorizationFailureAt { iteration: usize },
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("every point of the initial design failed")]
    AllInitialFailures,
    #[error("objective failed at evaluation {n} without hidden-constraint handling")]
    UnexpectedFailure { n: usize },
    #[error("no successful evaluation is available")]
    NoSuccesses,
    #[error("unknown benchmark problem `{0}`")]
    UnknownProblem(String),
    #[error("point lies outside the problem domain")]
    OutOfDomain,
}
