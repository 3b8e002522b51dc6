//! Acquisition functions and the hidden-constraint weighting.
//!
//! All scores are to be maximized. The improvement-based family works on
//! `I(x) = max(f_min - f(x), 0)` with `f(x) ~ N(μ, s²)` and
//! `u = (f_min - μ) / s`:
//!
//! * `PI = Φ(u)`
//! * `EI = s (u Φ(u) + φ(u))`
//! * `V[I] = s² ((u² + 1) Φ(u) + u φ(u)) - EI²`
//! * `ScaledEI = EI / sqrt(V[I])`

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gp::{FittedGp, Prediction};
use crate::numerics::{mills_chain, std_normal_cdf, std_normal_pdf};

/// Below this `u` the moments are evaluated through the Mills-ratio chain.
const TAIL_U: f64 = -6.0;
/// `V[I]` below `VAR_FLOOR · max(s², 1)` is replaced by the floor.
const VAR_FLOOR: f64 = 1e-25;

pub const DEFAULT_KAPPA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcquisitionKind {
    /// Uniform random search.
    Rnd,
    /// Negative predictive mean.
    Mn,
    /// Lower confidence bound `-(μ - κ s)`.
    Lcb { kappa: f64 },
    Pi,
    Ei,
    ScaledEi,
}

impl AcquisitionKind {
    pub fn lcb() -> Self {
        AcquisitionKind::Lcb { kappa: DEFAULT_KAPPA }
    }

    /// PI, EI and ScaledEI never go below zero; LCB and MN can.
    pub fn is_nonnegative(&self) -> bool {
        matches!(self, AcquisitionKind::Pi | AcquisitionKind::Ei | AcquisitionKind::ScaledEi | AcquisitionKind::Rnd)
    }

    pub fn needs_surrogate(&self) -> bool {
        !matches!(self, AcquisitionKind::Rnd)
    }
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcquisitionKind::Rnd => f.write_str("RND"),
            AcquisitionKind::Mn => f.write_str("MN"),
            AcquisitionKind::Lcb { kappa } if *kappa == DEFAULT_KAPPA => f.write_str("LCB"),
            AcquisitionKind::Lcb { kappa } => write!(f, "LCB:{kappa}"),
            AcquisitionKind::Pi => f.write_str("PI"),
            AcquisitionKind::Ei => f.write_str("EI"),
            AcquisitionKind::ScaledEi => f.write_str("ScaledEI"),
        }
    }
}

impl FromStr for AcquisitionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some(k) = lower.strip_prefix("lcb:") {
            let kappa: f64 = k.parse().map_err(|_| format!("bad kappa in `{s}`"))?;
            if !(kappa >= 0.0) {
                return Err(format!("kappa must be nonnegative, got {kappa}"));
            }
            return Ok(AcquisitionKind::Lcb { kappa });
        }
        match lower.as_str() {
            "rnd" | "random" => Ok(AcquisitionKind::Rnd),
            "mn" => Ok(AcquisitionKind::Mn),
            "lcb" => Ok(AcquisitionKind::lcb()),
            "pi" => Ok(AcquisitionKind::Pi),
            "ei" => Ok(AcquisitionKind::Ei),
            "scaledei" | "scaled_ei" | "sei" => Ok(AcquisitionKind::ScaledEi),
            _ => Err(format!("unknown acquisition `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementStats {
    pub u: f64,
    pub pi: f64,
    pub ei: f64,
    pub var_improvement: f64,
    pub scaled_ei: f64,
}

fn scaled(ei: f64, var: f64, std: f64) -> f64 {
    if ei == 0.0 {
        return 0.0;
    }
    let floor = VAR_FLOOR * (std * std).max(1.0);
    ei / var.max(floor).sqrt()
}

/// `(u, PI, EI, V[I])` with `V[I]` before clamping.
fn moments(mean: f64, std: f64, f_min: f64) -> (f64, f64, f64, f64) {
    let gap = f_min - mean;
    if std <= 0.0 {
        let u = if gap > 0.0 {
            f64::INFINITY
        } else if gap < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return (u, if gap > 0.0 { 1.0 } else { 0.0 }, gap.max(0.0), 0.0);
    }
    let u = gap / std;
    let pi = std_normal_cdf(u);
    if u < TAIL_U {
        let t = -u;
        let [r0, r1, r2] = mills_chain(t);
        let ei = std * std_normal_pdf(t) * r0 * r1;
        return (u, pi, ei, ei * (2.0 * std * r2 - ei));
    }
    let phi = std_normal_pdf(u);
    let ei = std * (u * pi + phi);
    let second = std * std * ((u * u + 1.0) * pi + u * phi);
    (u, pi, ei, second - ei * ei)
}

pub fn improvement_stats(pred_mean: f64, pred_std: f64, f_min: f64) -> ImprovementStats {
    let (u, pi, ei, var) = moments(pred_mean, pred_std, f_min);
    let ei = ei.max(0.0);
    let var = var.max(0.0);
    ImprovementStats { u, pi, ei, var_improvement: var, scaled_ei: scaled(ei, var, pred_std) }
}

/// `V[I]` exactly as computed, before clamping at zero.
pub fn raw_variance_of_improvement(pred_mean: f64, pred_std: f64, f_min: f64) -> f64 {
    moments(pred_mean, pred_std, f_min).3
}

/// Score of a predictive distribution. `rng` is only drawn from for RND.
pub fn score_prediction<R: Rng + ?Sized>(kind: AcquisitionKind, pred: Prediction, f_min: f64, rng: &mut R) -> f64 {
    match kind {
        AcquisitionKind::Rnd => rng.gen::<f64>(),
        k => surrogate_score(k, pred, f_min),
    }
}

/// Score of every surrogate-based kind; RND has none and yields NaN.
pub fn surrogate_score(kind: AcquisitionKind, pred: Prediction, f_min: f64) -> f64 {
    let s = pred.std();
    match kind {
        AcquisitionKind::Rnd => f64::NAN,
        AcquisitionKind::Mn => -pred.mean,
        AcquisitionKind::Lcb { kappa } => -(pred.mean - kappa * s),
        AcquisitionKind::Pi => improvement_stats(pred.mean, s, f_min).pi,
        AcquisitionKind::Ei => improvement_stats(pred.mean, s, f_min).ei,
        AcquisitionKind::ScaledEi => improvement_stats(pred.mean, s, f_min).scaled_ei,
    }
}

pub fn eval_acquisition<R: Rng + ?Sized>(kind: AcquisitionKind, model: &FittedGp, f_min: f64, x: &[f64], rng: &mut R) -> f64 {
    if kind == AcquisitionKind::Rnd {
        return rng.gen::<f64>();
    }
    score_prediction(kind, model.predict(x), f_min, rng)
}

/// `P{h(x) = -1} = Φ((0 - ĥ) / s_h)` for a label-regression prediction.
pub fn success_probability_from(pred: Prediction) -> f64 {
    let s = pred.std();
    if s > 0.0 {
        std_normal_cdf(-pred.mean / s)
    } else if pred.mean < 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn success_probability(failure_model: &FittedGp, x: &[f64]) -> f64 {
    success_probability_from(failure_model.predict(x))
}

pub fn weighted_acquisition(base: f64, success_prob: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&success_prob));
    base * success_prob
}
