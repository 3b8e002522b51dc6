//! Bounded Nelder-Mead simplex search.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5). Every trial point is clipped to the box before evaluation.

use super::BoxDomain;
use crate::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once `f_worst - f_best ≤ rel_tol · max(|f_best|, |f_worst|)`.
    pub rel_tol: f64,
    /// Evaluation cap; `None` means `200 · d`.
    pub max_evals: Option<usize>,
    /// Initial edge length as a fraction of each axis width.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-3, max_evals: None, initial_step: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState {
    pub vertices: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub iteration: usize,
}

impl SimplexState {
    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = idx.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn spread(&self) -> (f64, f64) {
        let best = self.values[0];
        let worst = *self.values.last().unwrap();
        (worst - best, best.abs().max(worst.abs()))
    }

    fn diameter(&self) -> f64 {
        let best = &self.vertices[0];
        self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub evals: usize,
    /// True when the value-spread criterion was met before the cap.
    pub converged: bool,
}

/// Minimizes `f` from `x0` with default coefficients, the `200 · d`
/// evaluation cap and the given relative tolerance.
pub fn nelder_mead<F>(f: F, x0: &[f64], domain: &BoxDomain, rel_tol: f64) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    nelder_mead_with(f, x0, domain, &NelderMeadOptions { rel_tol, ..Default::default() })
}

pub fn nelder_mead_with<F>(
    mut f: F,
    x0: &[f64],
    domain: &BoxDomain,
    opts: &NelderMeadOptions,
) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = domain.dims();
    let cap = opts.max_evals.unwrap_or(200 * d).max(d + 1);
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut start = x0.to_vec();
    domain.clip(&mut start);
    let f0 = eval(&start, &mut evals);
    if !f0.is_finite() {
        return Err(Error::NonFiniteStart);
    }

    let mut state = SimplexState { vertices: vec![start.clone()], values: vec![f0], iteration: 0 };
    for axis in 0..d {
        let step = opts.initial_step * domain.width(axis);
        let mut v = start.clone();
        v[axis] = if v[axis] + step <= domain.upper()[axis] { v[axis] + step } else { v[axis] - step };
        let fv = eval(&v, &mut evals);
        state.vertices.push(v);
        state.values.push(fv);
    }

    let min_diameter = 1e-13 * (0..d).map(|i| domain.width(i)).fold(0.0, f64::max);
    let mut converged = false;
    loop {
        state.order();
        let (spread, scale) = state.spread();
        if spread <= opts.rel_tol * scale {
            converged = true;
            break;
        }
        if evals >= cap || state.diameter() <= min_diameter {
            break;
        }
        state.iteration += 1;

        let worst = d;
        let mut centroid = vec![0.0; d];
        for v in &state.vertices[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }
        let along = |t: f64, target: &[f64]| {
            let mut p: Vec<f64> = centroid.iter().zip(target).map(|(c, x)| c + t * (x - c)).collect();
            domain.clip(&mut p);
            p
        };

        let reflected = along(-REFLECT, &state.vertices[worst]);
        let fr = eval(&reflected, &mut evals);
        if fr < state.values[0] {
            let expanded = along(EXPAND, &reflected);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                state.vertices[worst] = expanded;
                state.values[worst] = fe;
            } else {
                state.vertices[worst] = reflected;
                state.values[worst] = fr;
            }
            continue;
        }
        if fr < state.values[d - 1] {
            state.vertices[worst] = reflected;
            state.values[worst] = fr;
            continue;
        }
        let (contracted, fc, accept) = if fr < state.values[worst] {
            let p = along(CONTRACT, &reflected);
            let fp = eval(&p, &mut evals);
            let ok = fp <= fr;
            (p, fp, ok)
        } else {
            let p = along(CONTRACT, &state.vertices[worst]);
            let fp = eval(&p, &mut evals);
            let ok = fp < state.values[worst];
            (p, fp, ok)
        };
        if accept {
            state.vertices[worst] = contracted;
            state.values[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        let best = state.vertices[0].clone();
        for i in 1..=d {
            let mut p: Vec<f64> =
                best.iter().zip(&state.vertices[i]).map(|(b, x)| b + SHRINK * (x - b)).collect();
            domain.clip(&mut p);
            state.values[i] = eval(&p, &mut evals);
            state.vertices[i] = p;
            if evals >= cap {
                break;
            }
        }
    }

    state.order();
    Ok(NelderMeadResult {
        x_best: state.vertices.swap_remove(0),
        f_best: state.values[0],
        evals,
        converged,
    })
}
