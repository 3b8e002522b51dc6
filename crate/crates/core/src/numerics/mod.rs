//! Numerical building blocks shared by the surrogate, the acquisition
//! maximizer and the benchmark oracle.

mod ascent;
mod domain;
mod lhs;
mod nelder_mead;
mod normal;

pub use ascent::{gradient_ascent_multistart, AscentOptions, AscentResult};
pub use domain::BoxDomain;
pub use lhs::latin_hypercube;
pub use nelder_mead::{nelder_mead, nelder_mead_with, NelderMeadOptions, NelderMeadResult, SimplexState};
pub use normal::{
    mills_chain, pdf_first_derivative, pdf_second_derivative, std_normal_cdf, std_normal_pdf,
    INV_SQRT_2PI,
};
