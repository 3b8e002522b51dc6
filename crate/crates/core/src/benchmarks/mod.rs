//! Global-optimization test problems, hidden-constraint wrappers, noise
//! injection and the grid-and-refine oracle that certifies reference optima.

pub mod functions;
mod oracle;
mod problem;

pub use oracle::{run_oracle, OracleOptions, OracleReport};
pub use problem::{
    eval_problem, log10_distance, make_constrained_problem, make_problem, BenchmarkProblem, FailureRegion,
    NoiseSpec, ProblemId, ProblemObjective, LOG10_DISTANCE_FLOOR,
};
