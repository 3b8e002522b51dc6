use bo_core::engine::{Objective, RunTrace, TraceRecord};
use bo_core::gp::Outcome;
use bo_core::numerics::{latin_hypercube, nelder_mead_with, BoxDomain, NelderMeadOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

const START_STREAM: u64 = 3;
const RESTART_STREAM: u64 = 4;

/// Tolerance at which a local search is considered finished and the next
/// start is taken.
pub const NM_REL_TOL: f64 = 1e-12;

/// Nelder-Mead from `starts` Latin-hypercube points, one after another, until
/// exactly `budget` objective evaluations have been spent. Starts beyond the
/// design are uniform random.
pub fn nelder_mead_multistart<O: Objective + ?Sized>(
    domain: &BoxDomain,
    starts: usize,
    budget: usize,
    seed: u64,
    objective: &mut O,
) -> Result<RunTrace> {
    let mut design_rng = ChaCha8Rng::seed_from_u64(seed);
    design_rng.set_stream(START_STREAM);
    let mut restart_rng = ChaCha8Rng::seed_from_u64(seed);
    restart_rng.set_stream(RESTART_STREAM);
    let mut start_points = latin_hypercube(starts.max(1), domain, &mut design_rng).into_iter();

    let mut records: Vec<TraceRecord> = Vec::with_capacity(budget);
    let mut best: Option<(f64, Vec<f64>)> = None;
    while records.len() < budget {
        let x0 = start_points.next().unwrap_or_else(|| domain.sample_uniform(&mut restart_rng));
        let remaining = budget - records.len();
        let opts = NelderMeadOptions { rel_tol: NM_REL_TOL, max_evals: Some(remaining), ..Default::default() };
        let mut f = |x: &[f64]| {
            if records.len() >= budget {
                return f64::INFINITY;
            }
            let outcome = objective.evaluate(x);
            if let Outcome::Success(v) = outcome {
                if best.as_ref().map_or(true, |(b, _)| v < *b) {
                    best = Some((v, x.to_vec()));
                }
            }
            records.push(TraceRecord {
                n: records.len() + 1,
                x: x.to_vec(),
                outcome,
                f_min: best.as_ref().map(|b| b.0),
                x_min: best.as_ref().map(|b| b.1.clone()),
            });
            outcome.value().unwrap_or(f64::INFINITY)
        };
        match nelder_mead_with(&mut f, &x0, domain, &opts) {
            Ok(_) => {}
            // Start point failed; the evaluation is on record and the next start is taken.
            Err(bo_core::Error::NonFiniteStart) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(RunTrace {
        n_init: 0,
        records,
        f_min: best.as_ref().map(|b| b.0),
        x_min: best.map(|b| b.1),
        truncated: false,
    })
}
