//! The sequential optimization loop: Latin-hypercube design, per-iteration
//! surrogate refit, acquisition maximization and incumbent tracking, with an
//! optional failure GP for hidden constraints.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{surrogate_score, success_probability, AcquisitionKind};
use crate::gp::{fit_values, Dataset, FitOptions, FittedGp, Hyperparams, KernelFamily, KernelSpec, Outcome};
use crate::numerics::{latin_hypercube, nelder_mead_with, BoxDomain, NelderMeadOptions};
use crate::{Error, Result};

const DESIGN_STREAM: u64 = 1;
const CANDIDATE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub domain: BoxDomain,
    pub kind: AcquisitionKind,
    pub n_init: usize,
    /// Total objective evaluations, design included.
    pub n_max: usize,
    pub candidate_count: usize,
    pub local_starts: usize,
    pub local_rel_tol: f64,
    pub restarts: usize,
    /// Iterations between full multistart refits; in between, the GP is
    /// refit from the previous hyperparameters alone.
    pub full_refit_every: usize,
    pub kernel: KernelSpec,
    pub noisy_incumbent: bool,
    pub hidden_constraints: bool,
    pub seed: u64,
    /// Stops the loop early; the trace is then flagged as truncated.
    pub wall_clock_cap: Option<Duration>,
}

impl BoConfig {
    pub fn new(domain: BoxDomain, kind: AcquisitionKind, n_max: usize, seed: u64) -> Self {
        let d = domain.dims();
        Self {
            n_init: 10 * d,
            n_max,
            kind,
            candidate_count: 10_000,
            local_starts: 10,
            local_rel_tol: 1e-3,
            restarts: 4,
            full_refit_every: 10,
            kernel: KernelSpec::new(KernelFamily::SquaredExponential, d),
            noisy_incumbent: false,
            hidden_constraints: false,
            seed,
            wall_clock_cap: None,
            domain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_init < 2 {
            return bad(format!("n_init = {} < 2", self.n_init));
        }
        if self.n_max <= self.n_init {
            return bad(format!("n_max = {} must exceed n_init = {}", self.n_max, self.n_init));
        }
        if self.local_starts < 1 || self.candidate_count < self.local_starts {
            return bad(format!("need candidate_count ≥ local_starts ≥ 1, got {} and {}", self.candidate_count, self.local_starts));
        }
        if self.full_refit_every < 1 {
            return bad("full_refit_every must be at least 1".into());
        }
        if self.kernel.dims != self.domain.dims() {
            return bad(format!("kernel has {} dims, domain {}", self.kernel.dims, self.domain.dims()));
        }
        if !(self.local_rel_tol > 0.0) {
            return bad(format!("local_rel_tol = {}", self.local_rel_tol));
        }
        if let AcquisitionKind::Lcb { kappa } = self.kind {
            if !kappa.is_finite() || kappa < 0.0 {
                return bad(format!("kappa = {kappa}"));
            }
        }
        Ok(())
    }
}

/// An expensive black box. Evaluations may fail.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> Outcome;
}

impl<F: FnMut(&[f64]) -> Outcome> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> Outcome {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Number of evaluations so far, starting at 1.
    pub n: usize,
    pub x: Vec<f64>,
    pub outcome: Outcome,
    /// Incumbent after this evaluation; `None` until the first success.
    pub f_min: Option<f64>,
    pub x_min: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub n_init: usize,
    /// One row per evaluation, design rows first.
    pub records: Vec<TraceRecord>,
    pub f_min: Option<f64>,
    pub x_min: Option<Vec<f64>>,
    /// Set when the wall-clock cap ended the run before `n_max`.
    pub truncated: bool,
}

impl RunTrace {
    pub fn evaluations(&self) -> usize {
        self.records.len()
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_failure()).count()
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn fit_seed(seed: u64, n: usize, which: u64) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ which.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Evaluates `n_init` Latin-hypercube points.
pub fn initial_design<O: Objective + ?Sized>(config: &BoConfig, objective: &mut O) -> Result<Dataset> {
    config.validate()?;
    let mut rng = stream(config.seed, DESIGN_STREAM);
    let mut data = Dataset::new();
    for x in latin_hypercube(config.n_init, &config.domain, &mut rng) {
        let outcome = objective.evaluate(&x);
        data.push(x, outcome);
    }
    if data.success_count() == 0 && !config.hidden_constraints {
        return Err(Error::AllInitialFailures);
    }
    Ok(data)
}

/// Scores `candidate_count` uniform points, refines the best `local_starts`
/// with Nelder-Mead and returns the best refined point. Without a model the
/// base score is uniform noise. A failure model multiplies the score by the
/// success probability, after shifting LCB and MN scores to be nonnegative.
pub fn maximize_acquisition<R: Rng + ?Sized>(
    config: &BoConfig,
    model: Option<&FittedGp>,
    failure_model: Option<&FittedGp>,
    f_min: f64,
    rng: &mut R,
) -> Vec<f64> {
    let kind = if model.is_some() { config.kind } else { AcquisitionKind::Rnd };
    let candidates: Vec<Vec<f64>> = (0..config.candidate_count).map(|_| config.domain.sample_uniform(rng)).collect();
    let base: Vec<f64> = match (kind, model) {
        (AcquisitionKind::Rnd, _) | (_, None) => candidates.iter().map(|_| rng.gen::<f64>()).collect(),
        (k, Some(m)) => m.predict_batch(&candidates).into_iter().map(|p| surrogate_score(k, p, f_min)).collect(),
    };
    let shift = match failure_model {
        Some(_) if !kind.is_nonnegative() => base.iter().cloned().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min),
        _ => 0.0,
    };
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let weigh = |score: f64, x: &[f64]| match failure_model {
        Some(h) => (score - shift).max(0.0) * success_probability(h, x),
        None => score,
    };
    let scores: Vec<f64> = base
        .iter()
        .zip(&candidates)
        .map(|(s, x)| {
            let v = weigh(*s, x);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let top = &order[..config.local_starts.min(order.len())];
    let (mut best_x, mut best_v) = (candidates[top[0]].clone(), scores[top[0]]);
    let Some(m) = model.filter(|_| kind != AcquisitionKind::Rnd) else {
        return best_x;
    };
    let negated = |x: &[f64]| {
        let v = weigh(surrogate_score(kind, m.predict(x), f_min), x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let opts = NelderMeadOptions { rel_tol: config.local_rel_tol, ..NelderMeadOptions::default() };
    for &i in top {
        if let Ok(r) = nelder_mead_with(negated, &candidates[i], &config.domain, &opts) {
            if -r.f_best > best_v {
                best_v = -r.f_best;
                best_x = r.x_best;
            }
        }
    }
    config.domain.clip(&mut best_x);
    best_x
}

/// Best successful observation, or with `noisy` the smallest posterior mean
/// over successful training inputs. Ties go to the earliest observation.
pub fn incumbent(data: &Dataset, model: Option<&FittedGp>, noisy: bool) -> Result<(f64, Vec<f64>)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, (x, o)) in data.inputs().iter().zip(data.outcomes()).enumerate() {
        let Some(y) = o.value() else { continue };
        let v = match model {
            Some(m) if noisy => m.predict_mean(x),
            _ => y,
        };
        if best.map_or(true, |(b, _)| v < b) {
            best = Some((v, i));
        }
    }
    best.map(|(v, i)| (v, data.inputs()[i].clone())).ok_or(Error::NoSuccesses)
}

/// Algorithm state shared by the plain and hidden-constraint loops.
struct Surrogates {
    objective: Option<FittedGp>,
    failure: Option<FittedGp>,
    theta: Option<Hyperparams>,
    failure_theta: Option<Hyperparams>,
}

fn refit(
    config: &BoConfig,
    inputs: Vec<Vec<f64>>,
    values: Vec<f64>,
    warm: &mut Option<Hyperparams>,
    n: usize,
    which: u64,
) -> Result<FittedGp> {
    let full = warm.is_none() || n.saturating_sub(config.n_init) % config.full_refit_every == 0;
    let restarts = if full { config.restarts.max(1) } else { 1 };
    let mut opts = FitOptions::new(restarts, fit_seed(config.seed, n, which));
    opts.warm_start = warm.clone();
    let fitted = fit_values(config.kernel, inputs.clone(), values.clone(), &opts).or_else(|_| {
        opts.restarts += 1;
        opts.seed = fit_seed(config.seed, n, which + 0x100);
        fit_values(config.kernel, inputs.clone(), values.clone(), &opts)
    });
    let fitted = match (fitted, warm.as_ref()) {
        (Ok(m), _) => Ok(m),
        (Err(_), Some(prev)) => FittedGp::condition(config.kernel, prev.clone(), inputs, values),
        (Err(e), None) => Err(e),
    }
    .map_err(|_| Error::FactorizationFailureAt { iteration: n })?;
    *warm = Some(fitted.theta().clone());
    Ok(fitted)
}

impl Surrogates {
    fn update(&mut self, config: &BoConfig, data: &Dataset) -> Result<()> {
        let n = data.len();
        let need_objective = config.kind.needs_surrogate() || config.noisy_incumbent;
        self.objective = if need_objective && data.success_count() >= 2 {
            let (xs, ys) = data.successes();
            Some(refit(config, xs, ys, &mut self.theta, n, 0)?)
        } else {
            None
        };
        if config.hidden_constraints {
            self.failure = Some(refit(config, data.inputs().to_vec(), data.labels(), &mut self.failure_theta, n, 1)?);
        }
        Ok(())
    }
}

fn running_incumbent(records: &[TraceRecord]) -> (Option<f64>, Option<Vec<f64>>) {
    let mut best: Option<(f64, &Vec<f64>)> = None;
    for r in records {
        if let Some(y) = r.outcome.value() {
            if best.map_or(true, |(b, _)| y < b) {
                best = Some((y, &r.x));
            }
        }
    }
    (best.map(|b| b.0), best.map(|b| b.1.clone()))
}

fn run_loop<O: Objective + ?Sized>(config: &BoConfig, objective: &mut O) -> Result<RunTrace> {
    config.validate()?;
    let started = Instant::now();
    let hidden = config.hidden_constraints;
    let data_design = initial_design(config, objective)?;
    let mut data = Dataset::new();
    let mut records: Vec<TraceRecord> = Vec::with_capacity(config.n_max);
    for (x, o) in data_design.inputs().iter().zip(data_design.outcomes()) {
        if o.is_failure() && !hidden {
            return Err(Error::UnexpectedFailure { n: records.len() + 1 });
        }
        data.push(x.clone(), o.clone());
        records.push(TraceRecord { n: records.len() + 1, x: x.clone(), outcome: o.clone(), f_min: None, x_min: None });
        let (f, xm) = running_incumbent(&records);
        let last = records.last_mut().expect("just pushed");
        last.f_min = f;
        last.x_min = xm;
    }

    let mut surrogates = Surrogates { objective: None, failure: None, theta: None, failure_theta: None };
    let mut cand_rng = stream(config.seed, CANDIDATE_STREAM);
    let truncated;
    let noisy = config.noisy_incumbent;
    loop {
        let n = data.len();
        let over_time = config.wall_clock_cap.is_some_and(|cap| started.elapsed() >= cap);
        if n >= config.n_max || over_time {
            truncated = over_time && n < config.n_max;
            break;
        }
        surrogates.update(config, &data)?;
        if noisy && n > config.n_init {
            set_noisy_incumbent(records.last_mut(), &data, surrogates.objective.as_ref());
        }
        let f_min = match incumbent(&data, surrogates.objective.as_ref(), noisy) {
            Ok((f, _)) => f,
            Err(_) => f64::INFINITY,
        };
        let x_next = maximize_acquisition(
            config,
            surrogates.objective.as_ref(),
            surrogates.failure.as_ref(),
            f_min,
            &mut cand_rng,
        );
        let outcome = objective.evaluate(&x_next);
        if outcome.is_failure() && !hidden {
            return Err(Error::UnexpectedFailure { n: n + 1 });
        }
        data.push(x_next.clone(), outcome.clone());
        records.push(TraceRecord { n: n + 1, x: x_next, outcome, f_min: None, x_min: None });
        let (f, xm) = running_incumbent(&records);
        let last = records.last_mut().expect("just pushed");
        last.f_min = f;
        last.x_min = xm;
    }
    if data.success_count() == 0 {
        return Err(Error::NoSuccesses);
    }
    if noisy && data.len() > config.n_init {
        surrogates.update(config, &data)?;
        set_noisy_incumbent(records.last_mut(), &data, surrogates.objective.as_ref());
    }
    let last = records.last().expect("design is nonempty");
    Ok(RunTrace { n_init: config.n_init, f_min: last.f_min, x_min: last.x_min.clone(), records, truncated })
}

fn set_noisy_incumbent(record: Option<&mut TraceRecord>, data: &Dataset, model: Option<&FittedGp>) {
    if let (Some(r), Some(m)) = (record, model) {
        if let Ok((f, x)) = incumbent(data, Some(m), true) {
            r.f_min = Some(f);
            r.x_min = Some(x);
        }
    }
}

/// Plain BO. Any failed evaluation aborts the run.
pub fn run_bo<O: Objective + ?Sized>(config: &BoConfig, objective: &mut O) -> Result<RunTrace> {
    if config.hidden_constraints {
        return Err(Error::InvalidConfig("hidden_constraints is set; use run_bo_hidden_constraints".into()));
    }
    run_loop(config, objective)
}

/// BO with a label-regression failure GP weighting the acquisition. Failed
/// evaluations consume budget.
pub fn run_bo_hidden_constraints<O: Objective + ?Sized>(config: &BoConfig, objective: &mut O) -> Result<RunTrace> {
    if !config.hidden_constraints {
        return Err(Error::InvalidConfig("hidden_constraints is not set; use run_bo".into()));
    }
    run_loop(config, objective)
}

/// Dispatches on `config.hidden_constraints`.
pub fn run<O: Objective + ?Sized>(config: &BoConfig, objective: &mut O) -> Result<RunTrace> {
    run_loop(config, objective)
}
