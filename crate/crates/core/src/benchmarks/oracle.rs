use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::problem::BenchmarkProblem;
use crate::numerics::{gradient_ascent_multistart, nelder_mead_with, AscentOptions, BoxDomain, NelderMeadOptions};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Total grid size for `d ≤ 2`, and per-axis grid size for separable problems.
    pub grid_points: usize,
    /// Uniform samples for non-separable problems with `d ≥ 3`.
    pub random_samples: usize,
    /// Best samples refined locally when `d ≥ 3`.
    pub refine_starts: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { grid_points: 1_000_000, random_samples: 100_000, refine_starts: 200, seed: 0 }
    }
}

impl OracleOptions {
    /// Cheaper settings used when a failure region forces a re-certification.
    pub fn coarse() -> Self {
        Self { grid_points: 250_000, random_samples: 20_000, refine_starts: 50, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Best refined value.
    pub f_best: f64,
    pub x_best: Vec<f64>,
    /// Smallest raw sample value before refinement.
    pub sample_min: f64,
    pub sample_count: usize,
    /// Distinct refined points attaining `f_best`.
    pub global_minima: Vec<Vec<f64>>,
    /// Distinct strict interior local minima; only filled for `d ≤ 2`.
    pub local_minima: Vec<Vec<f64>>,
    pub minima_counted: bool,
}

/// Dense sampling followed by Nelder-Mead and finite-difference BFGS
/// refinement. Points inside the failure region count as `+∞`.
pub fn run_oracle(problem: &BenchmarkProblem, opts: &OracleOptions) -> Result<OracleReport> {
    let f = |x: &[f64]| if problem.fails_at(x) { f64::INFINITY } else { problem.value(x) };
    let domain = &problem.domain;
    if let (Some(term), None) = (problem.id.separable_term(), &problem.failure_region) {
        return Ok(separable(term, domain, opts.grid_points));
    }
    let (sample_min, sample_count, starts) = if domain.dims() <= 2 {
        grid_candidates(&f, domain, opts.grid_points)
    } else {
        random_candidates(&f, domain, opts)
    };
    let mut refined: Vec<(Vec<f64>, f64)> = Vec::new();
    let tol = 1e-5 * widths(domain).iter().cloned().fold(0.0, f64::max);
    for s in &starts {
        let (x, v) = refine(&f, s, domain);
        if !v.is_finite() {
            continue;
        }
        if !refined.iter().any(|(y, _)| dist(y, &x) <= tol) {
            refined.push((x, v));
        }
    }
    let (x_best, f_best) = refined
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap_or_else(|| (domain.center(), f(&domain.center())));
    let gtol = 1e-7 * f_best.abs().max(1.0);
    let global_minima = refined.iter().filter(|(_, v)| *v - f_best <= gtol).map(|(x, _)| x.clone()).collect();
    let minima_counted = domain.dims() <= 2;
    let local_minima = if minima_counted {
        refined.iter().filter(|(x, _)| is_interior_minimum(&f, x, domain)).map(|(x, _)| x.clone()).collect()
    } else {
        Vec::new()
    };
    Ok(OracleReport { f_best, x_best, sample_min, sample_count, global_minima, local_minima, minima_counted })
}

fn widths(domain: &BoxDomain) -> Vec<f64> {
    (0..domain.dims()).map(|i| domain.width(i)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn grid_axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Grid points that are no larger than any of their (up to 8) neighbours.
fn grid_candidates<F: Fn(&[f64]) -> f64>(f: &F, domain: &BoxDomain, total: usize) -> (f64, usize, Vec<Vec<f64>>) {
    let d = domain.dims();
    let n = if d == 1 { total } else { (total as f64).sqrt().ceil() as usize }.max(3);
    let (lo, hi) = (domain.lower(), domain.upper());
    let ny = if d == 1 { 1 } else { n };
    let point = |i: usize, j: usize| -> Vec<f64> {
        let mut p = vec![grid_axis(lo[0], hi[0], n, i)];
        if d == 2 {
            p.push(grid_axis(lo[1], hi[1], n, j));
        }
        p
    };
    let mut vals = vec![0.0; n * ny];
    for i in 0..n {
        for j in 0..ny {
            vals[i * ny + j] = f(&point(i, j));
        }
    }
    let sample_min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut starts = Vec::new();
    for i in 0..n {
        for j in 0..ny {
            let v = vals[i * ny + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if (di == 0 && dj == 0) || (d == 1 && dj != 0) {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= n as i64 || b >= ny as i64 {
                        continue;
                    }
                    if vals[a as usize * ny + b as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                starts.push(point(i, j));
            }
        }
    }
    (sample_min, n * ny, starts)
}

fn random_candidates<F: Fn(&[f64]) -> f64>(f: &F, domain: &BoxDomain, opts: &OracleOptions) -> (f64, usize, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut samples: Vec<(Vec<f64>, f64)> = (0..opts.random_samples)
        .map(|_| {
            let x = domain.sample_uniform(&mut rng);
            let v = f(&x);
            (x, v)
        })
        .collect();
    samples.sort_by(|a, b| a.1.total_cmp(&b.1));
    let sample_min = samples.first().map_or(f64::INFINITY, |s| s.1);
    let starts = samples.into_iter().take(opts.refine_starts).filter(|s| s.1.is_finite()).map(|s| s.0).collect();
    (sample_min, opts.random_samples, starts)
}

fn refine<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], domain: &BoxDomain) -> (Vec<f64>, f64) {
    let d = domain.dims();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = 1e-3;
    for _ in 0..3 {
        let opts = NelderMeadOptions { rel_tol: 1e-15, max_evals: Some(2000 * d), initial_step: step };
        if let Ok(r) = nelder_mead_with(f, &x, domain, &opts) {
            if r.f_best <= fx {
                x = r.x_best;
                fx = r.f_best;
            }
        }
        step *= 0.1;
    }
    let widths = widths(domain);
    let neg = |p: &[f64]| -> Option<(f64, Vec<f64>)> {
        let v = f(p);
        if !v.is_finite() {
            return None;
        }
        let mut g = vec![0.0; d];
        let mut q = p.to_vec();
        for k in 0..d {
            let h = 1e-7 * widths[k];
            let orig = q[k];
            q[k] = (orig + h).min(domain.upper()[k]);
            let up = q[k];
            let fu = f(&q);
            q[k] = (orig - h).max(domain.lower()[k]);
            let dn = q[k];
            let fd = f(&q);
            q[k] = orig;
            if !fu.is_finite() || !fd.is_finite() {
                return None;
            }
            g[k] = -(fu - fd) / (up - dn);
        }
        Some((-v, g))
    };
    let ascent = AscentOptions { max_iter: 200, grad_tol: 1e-10, value_tol: 1e-15 };
    if let Ok(r) = gradient_ascent_multistart(neg, std::slice::from_ref(&x), domain, &ascent) {
        let v = f(&r.point);
        if v <= fx {
            x = r.point;
            fx = v;
        }
    }
    (x, fx)
}

/// Interior point with a positive-definite finite-difference Hessian.
fn is_interior_minimum<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], domain: &BoxDomain) -> bool {
    let widths = widths(domain);
    let margin = x.iter().zip(domain.lower().iter().zip(domain.upper())).zip(&widths).all(|((v, (l, u)), w)| {
        let h = 1e-6 * w;
        *v > l + h && *v < u - h
    });
    if !margin {
        return false;
    }
    let d = x.len();
    let h: Vec<f64> = widths.iter().map(|w| 1e-5 * w).collect();
    let fx = f(x);
    let at = |steps: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(k, s) in steps {
            p[k] += s * h[k];
        }
        f(&p)
    };
    let mut hess = vec![vec![0.0; d]; d];
    for i in 0..d {
        hess[i][i] = (at(&[(i, 1.0)]) - 2.0 * fx + at(&[(i, -1.0)])) / (h[i] * h[i]);
        for j in 0..i {
            let v = (at(&[(i, 1.0), (j, 1.0)]) - at(&[(i, 1.0), (j, -1.0)]) - at(&[(i, -1.0), (j, 1.0)])
                + at(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    match d {
        1 => hess[0][0] > 0.0,
        2 => hess[0][0] > 0.0 && hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0] > 0.0,
        _ => faer::Mat::from_fn(d, d, |i, j| hess[i][j]).llt(faer::Side::Lower).is_ok(),
    }
}

/// Minimizes each axis of a sum-of-terms function on its own dense grid.
fn separable(term: fn(f64) -> f64, domain: &BoxDomain, n: usize) -> OracleReport {
    let d = domain.dims();
    let mut x_best = Vec::with_capacity(d);
    let mut f_best = 0.0;
    let mut sample_min = 0.0;
    for k in 0..d {
        let (lo, hi) = (domain.lower()[k], domain.upper()[k]);
        let (mut bi, mut bv) = (0, f64::INFINITY);
        for i in 0..n {
            let v = term(grid_axis(lo, hi, n, i));
            if v < bv {
                bi = i;
                bv = v;
            }
        }
        sample_min += bv;
        let axis = BoxDomain::new(vec![lo], vec![hi]).expect("valid axis");
        let g = |p: &[f64]| term(p[0]);
        let (x, v) = refine(&g, &[grid_axis(lo, hi, n, bi)], &axis);
        x_best.push(x[0]);
        f_best += v;
    }
    OracleReport {
        f_best,
        x_best: x_best.clone(),
        sample_min,
        sample_count: n * d,
        global_minima: vec![x_best],
        local_minima: Vec::new(),
        minima_counted: false,
    }
}
