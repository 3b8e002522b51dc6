//! Bayesian optimization of expensive black-box functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: Gaussian pdf/cdf, Latin hypercube designs, a bounded
//!   Nelder-Mead simplex and a multi-start quasi-Newton ascent.
//! * [`gp`]: constant-mean Gaussian-process regression with ARD squared
//!   exponential and Matérn 5/2 kernels, fitted by maximum marginal likelihood.
//! * [`acquisition`]: RND, MN, LCB, PI, EI and the scaled expected improvement
//!   (EI divided by the standard deviation of the improvement), plus the
//!   success-probability weighting used under hidden constraints.
//! * [`engine`]: the sequential design loop, with and without hidden
//!   constraints.
//! * [`benchmarks`]: the global-optimization test suite and its oracle.

pub mod acquisition;
pub mod benchmarks;
pub mod engine;
mod error;
pub mod gp;
pub mod numerics;

pub use error::{Error, Result};
