//! Multi-start projected BFGS ascent on a box.

use super::BoxDomain;
use crate::{Error, Result};

const MAX_MOVE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Stop when the projected gradient's max-norm falls below this.
    pub grad_tol: f64,
    /// Stop when one iteration improves the value by less than
    /// `value_tol · (1 + |value|)`.
    pub value_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iter: 200, grad_tol: 1e-6, value_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Index into `starts` of the run that produced `point`.
    pub start_index: usize,
}

/// Maximizes `g` (returning value and gradient) from each start and keeps the
/// best run. Starts at which `g` is not finite are skipped; if none is usable
/// the objective is reported as unfittable.
pub fn gradient_ascent_multistart<G>(
    mut g: G,
    starts: &[Vec<f64>],
    bounds: &BoxDomain,
    opts: &AscentOptions,
) -> Result<AscentResult>
where
    G: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let mut best: Option<AscentResult> = None;
    for (index, start) in starts.iter().enumerate() {
        if let Some(mut run) = ascend(&mut g, start, bounds, opts) {
            run.start_index = index;
            if best.as_ref().map_or(true, |b| run.value > b.value) {
                best = Some(run);
            }
        }
    }
    best.ok_or(Error::Unfittable)
}

fn finite_eval<G>(g: &mut G, x: &[f64]) -> Option<(f64, Vec<f64>)>
where
    G: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    g(x).filter(|(v, grad)| v.is_finite() && grad.iter().all(|c| c.is_finite()))
}

/// Gradient with components that would push through an active bound zeroed.
fn projected(x: &[f64], grad: &[f64], bounds: &BoxDomain) -> Vec<f64> {
    grad.iter()
        .enumerate()
        .map(|(i, &gi)| {
            let at_lower = x[i] <= bounds.lower()[i] && gi < 0.0;
            let at_upper = x[i] >= bounds.upper()[i] && gi > 0.0;
            if at_lower || at_upper {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c.abs()))
}

fn ascend<G>(g: &mut G, start: &[f64], bounds: &BoxDomain, opts: &AscentOptions) -> Option<AscentResult>
where
    G: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = bounds.dims();
    let mut x = start.to_vec();
    bounds.clip(&mut x);
    let (mut value, mut grad) = finite_eval(g, &x)?;
    // Inverse Hessian approximation of -g.
    let mut h = identity(n);
    let mut iterations = 0;
    let mut pg = projected(&x, &grad, bounds);

    while iterations < opts.max_iter && max_norm(&pg) > opts.grad_tol {
        iterations += 1;
        // Ascent direction d = H · ∇g restricted to free coordinates.
        let free: Vec<bool> = pg.iter().zip(&grad).map(|(p, g)| *p != 0.0 || *g == 0.0).collect();
        let mut dir = mat_vec(&h, &pg);
        for (di, &f) in dir.iter_mut().zip(&free) {
            if !f {
                *di = 0.0;
            }
        }
        if dot(&dir, &pg) <= 0.0 {
            h = identity(n);
            dir = pg.clone();
        }

        // Unit steps, shortened so no coordinate moves further than MAX_MOVE.
        let mut step = (MAX_MOVE / max_norm(&dir)).min(1.0);
        let mut accepted = None;
        let min_step = step * 1e-4;
        while step > min_step {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            bounds.clip(&mut trial);
            let moved: Vec<f64> = trial.iter().zip(&x).map(|(t, xi)| t - xi).collect();
            if let Some((tv, tg)) = finite_eval(g, &trial) {
                if tv >= value + 1e-4 * dot(&grad, &moved) && tv >= value {
                    accepted = Some((trial, tv, tg, moved));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, tv, tg, s)) = accepted else {
            break;
        };

        // BFGS update on the minimization problem -g: y = ∇(-g)_new - ∇(-g)_old.
        let y: Vec<f64> = grad.iter().zip(&tg).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            bfgs_update(&mut h, &s, &y, sy);
        }

        let gain = tv - value;
        x = trial;
        value = tv;
        grad = tg;
        pg = projected(&x, &grad, bounds);
        if gain <= opts.value_tol * (1.0 + value.abs()) {
            break;
        }
    }

    Some(AscentResult { gradient_norm: max_norm(&pg), point: x, value, iterations, start_index: 0 })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
