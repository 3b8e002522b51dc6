use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::data::Dataset;
use super::kernel::{Hyperparams, KernelSpec};
use super::model::{log_marginal_likelihood, log_marginal_likelihood_unjittered, FittedGp};
use crate::numerics::{gradient_ascent_multistart, AscentOptions, BoxDomain};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Replaces the first random initialization (e.g. the previous
    /// iteration's optimum inside a BO loop).
    pub warm_start: Option<Hyperparams>,
    pub ascent: AscentOptions,
}

impl FitOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            warm_start: None,
            ascent: AscentOptions { max_iter: 80, grad_tol: 1e-5, value_tol: 1e-10 },
        }
    }
}

/// Output scale used for the scale-free defaults; constant data falls back
/// to 1.
fn value_scale(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let scale = if std > 1e-12 * (1.0 + mean.abs()) { std } else { 1.0 };
    (mean, scale)
}

fn input_ranges(inputs: &[Vec<f64>], dims: usize) -> Vec<f64> {
    (0..dims)
        .map(|i| {
            let (lo, hi) = inputs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[i]), hi.max(x[i])));
            let r = hi - lo;
            if r > 1e-12 {
                r
            } else {
                1.0
            }
        })
        .collect()
}

/// Fits hyperparameters by maximum marginal likelihood on raw arrays.
pub fn fit_values(spec: KernelSpec, inputs: Vec<Vec<f64>>, values: Vec<f64>, opts: &FitOptions) -> Result<FittedGp> {
    if inputs.is_empty() || inputs.len() != values.len() {
        return Err(Error::DegenerateData(format!("{} inputs for {} values", inputs.len(), values.len())));
    }
    let d = spec.dims;
    let (mean, scale) = value_scale(&values);
    let ranges = input_ranges(&inputs, d);

    let mut lower = Vec::with_capacity(d + 3);
    let mut upper = Vec::with_capacity(d + 3);
    lower.push(mean - 1e2 * scale);
    upper.push(mean + 1e2 * scale);
    for r in &ranges {
        lower.push((1e-3 * r).ln());
        upper.push((1e3 * r).ln());
    }
    lower.push((1e-3 * scale).ln());
    upper.push((1e3 * scale).ln());
    lower.push((1e-6 * scale).ln());
    upper.push(scale.ln());
    let bounds = BoxDomain::new(lower, upper)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = Vec::with_capacity(opts.restarts.max(1));
    for r in 0..opts.restarts.max(1) {
        let mut v = match (&opts.warm_start, r) {
            (Some(w), 0) if w.lengthscales.len() == d && w.is_valid() && w.noise_std > 0.0 => w.to_log_vector(),
            _ => {
                let mut v = vec![mean];
                for range in &ranges {
                    let lo = (0.05 * range).ln();
                    let hi = (2.0 * range).ln();
                    v.push(rng.gen_range(lo..hi));
                }
                v.push(scale.ln());
                v.push((1e-3 * scale).ln());
                v
            }
        };
        bounds.clip(&mut v);
        starts.push(v);
    }

    let objective = |v: &[f64]| {
        let theta = Hyperparams::from_log_vector(v);
        log_marginal_likelihood_unjittered(&spec, &theta, &inputs, &values).ok()
    };
    let best = match gradient_ascent_multistart(objective, &starts, &bounds, &opts.ascent) {
        Ok(b) => b,
        // Every start needs jitter: fall back to the escalating likelihood.
        Err(_) => gradient_ascent_multistart(
            |v: &[f64]| log_marginal_likelihood(&spec, &Hyperparams::from_log_vector(v), &inputs, &values).ok(),
            &starts,
            &bounds,
            &opts.ascent,
        )?,
    };
    FittedGp::condition(spec, Hyperparams::from_log_vector(&best.point), inputs, values)
}

/// Fits the objective surrogate on the successful observations of `data`.
pub fn fit(spec: KernelSpec, data: &Dataset, restarts: usize, seed: u64) -> Result<FittedGp> {
    let (inputs, values) = data.successes();
    if inputs.len() < 2 {
        return Err(Error::DegenerateData(format!("need at least 2 successful observations, have {}", inputs.len())));
    }
    fit_values(spec, inputs, values, &FitOptions::new(restarts, seed))
}

/// Label regression on the ±1 failure indicators of every observation.
pub fn fit_failure_gp(spec: KernelSpec, data: &Dataset, restarts: usize, seed: u64) -> Result<FittedGp> {
    fit_values(spec, data.inputs().to_vec(), data.labels(), &FitOptions::new(restarts, seed))
}
