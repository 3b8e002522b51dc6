use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Side};

use super::kernel::{Hyperparams, KernelEval, KernelSpec};
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Cholesky of `a + jitter·I`, growing the jitter from `1e-10` to `max_rel`
/// times the mean diagonal by factors of ten.
fn factorize(mut a: Mat<f64>, max_rel: f64) -> Result<(faer::linalg::solvers::Llt<f64>, f64)> {
    let n = a.nrows();
    let mean_diag = (0..n).map(|i| a[(i, i)]).sum::<f64>() / n as f64;
    let mut rel = JITTER_START;
    let mut applied = 0.0;
    loop {
        let jitter = rel * mean_diag;
        for i in 0..n {
            a[(i, i)] += jitter - applied;
        }
        applied = jitter;
        if let Ok(llt) = a.llt(Side::Lower) {
            let l = llt.L();
            if (0..n).all(|i| l[(i, i)] > 0.0 && l[(i, i)].is_finite()) {
                return Ok((llt, jitter));
            }
        }
        if rel >= max_rel * 0.999 {
            return Err(Error::FactorizationFailure { jitter });
        }
        rel *= 10.0;
    }
}

fn residuals(values: &[f64], mean: f64) -> Mat<f64> {
    Mat::from_fn(values.len(), 1, |i, _| values[i] - mean)
}

/// Log marginal likelihood of `values` at `inputs` and its gradient with
/// respect to `(c, log ℓ_1..log ℓ_d, log σ_f, log σ)`.
pub fn log_marginal_likelihood(
    spec: &KernelSpec,
    theta: &Hyperparams,
    inputs: &[Vec<f64>],
    values: &[f64],
) -> Result<(f64, Vec<f64>)> {
    lml_with_jitter_cap(spec, theta, inputs, values, JITTER_MAX)
}

/// As [`log_marginal_likelihood`] but fails instead of escalating the jitter
/// past the starting level, which keeps the surface smooth for the optimizer.
pub(crate) fn log_marginal_likelihood_unjittered(
    spec: &KernelSpec,
    theta: &Hyperparams,
    inputs: &[Vec<f64>],
    values: &[f64],
) -> Result<(f64, Vec<f64>)> {
    lml_with_jitter_cap(spec, theta, inputs, values, JITTER_START)
}

fn lml_with_jitter_cap(
    spec: &KernelSpec,
    theta: &Hyperparams,
    inputs: &[Vec<f64>],
    values: &[f64],
    max_rel: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = inputs.len();
    let d = spec.dims;
    if n == 0 {
        return Err(Error::DegenerateData("no observations".into()));
    }
    let kernel = KernelEval::new(spec.family, theta);
    let noise_var = theta.noise_std * theta.noise_std;

    // Strict lower triangle of K and of each ∂K/∂log ℓ_m, packed by columns.
    let pairs = n * (n - 1) / 2;
    let mut kv = Vec::with_capacity(pairs);
    let mut dk = Vec::with_capacity(pairs * d);
    let mut a = Mat::<f64>::zeros(n, n);
    let mut buf = vec![0.0; d];
    for j in 0..n {
        a[(j, j)] = kernel.signal_var() + noise_var;
        for i in (j + 1)..n {
            let v = kernel.value_and_lengthscale_grad(&inputs[i], &inputs[j], &mut buf);
            a[(i, j)] = v;
            a[(j, i)] = v;
            kv.push(v);
            dk.extend_from_slice(&buf);
        }
    }
    let (llt, _) = factorize(a, max_rel)?;
    let resid = residuals(values, theta.mean_const);
    let alpha = llt.solve(&resid);
    let l = llt.L();
    let log_det: f64 = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
    let fit: f64 = (0..n).map(|i| resid[(i, 0)] * alpha[(i, 0)]).sum();
    let value = -0.5 * fit - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;

    // W = α αᵀ - A⁻¹; ∂L/∂η = ½ tr(W ∂A/∂η), off-diagonal pairs counted twice.
    let inv = llt.inverse();
    let w = |i: usize, j: usize| alpha[(i, 0)] * alpha[(j, 0)] - inv[(i, j)];

    let mut grad = vec![0.0; d + 3];
    grad[0] = (0..n).map(|i| alpha[(i, 0)]).sum();
    let mut g_len = vec![0.0; d];
    let mut g_sig = 0.0;
    let mut p = 0;
    for j in 0..n {
        g_sig += 0.5 * w(j, j) * kernel.signal_var();
        for i in (j + 1)..n {
            let wij = w(i, j);
            g_sig += wij * kv[p];
            for (g, dv) in g_len.iter_mut().zip(&dk[p * d..(p + 1) * d]) {
                *g += wij * dv;
            }
            p += 1;
        }
    }
    grad[1..=d].copy_from_slice(&g_len);
    grad[d + 1] = 2.0 * g_sig;
    grad[d + 2] = noise_var * (0..n).map(|i| w(i, i)).sum::<f64>();
    Ok((value, grad))
}

/// A conditioned Gaussian process, immutable once built.
#[derive(Debug, Clone)]
pub struct FittedGp {
    spec: KernelSpec,
    theta: Hyperparams,
    kernel: KernelEval,
    inputs: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Lower Cholesky factor of `K + σ²I + jitter·I`.
    chol: Mat<f64>,
    /// The same factor packed by rows, for single-point solves.
    chol_rows: Vec<f64>,
    alpha: Vec<f64>,
    jitter: f64,
    log_marginal_likelihood: f64,
}

impl FittedGp {
    /// Conditions the prior `θ` on the data.
    pub fn condition(spec: KernelSpec, theta: Hyperparams, inputs: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let n = inputs.len();
        if n == 0 || n != values.len() {
            return Err(Error::DegenerateData(format!("{} inputs for {} values", n, values.len())));
        }
        if !theta.is_valid() || theta.lengthscales.len() != spec.dims {
            return Err(Error::InvalidConfig(format!("invalid hyperparameters {theta:?}")));
        }
        let kernel = KernelEval::new(spec.family, &theta);
        let noise_var = theta.noise_std * theta.noise_std;
        let mut a = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            a[(j, j)] = kernel.signal_var() + noise_var;
            for i in (j + 1)..n {
                let v = kernel.value(&inputs[i], &inputs[j]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let (llt, jitter) = factorize(a, JITTER_MAX)?;
        let resid = residuals(&values, theta.mean_const);
        let alpha = llt.solve(&resid);
        let l = llt.L();
        let log_det: f64 = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
        let fit: f64 = (0..n).map(|i| resid[(i, 0)] * alpha[(i, 0)]).sum();
        let lml = -0.5 * fit - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;
        let chol = Mat::from_fn(n, n, |i, j| if j <= i { l[(i, j)] } else { 0.0 });
        let mut chol_rows = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                chol_rows.push(l[(i, j)]);
            }
        }
        Ok(Self {
            spec,
            theta,
            kernel,
            inputs,
            values,
            chol,
            chol_rows,
            alpha: (0..n).map(|i| alpha[(i, 0)]).collect(),
            jitter,
            log_marginal_likelihood: lml,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn theta(&self) -> &Hyperparams {
        &self.theta
    }

    pub fn train_inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn train_values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Lower-triangular Cholesky factor as a dense row-major matrix.
    pub fn chol_factor(&self) -> Vec<Vec<f64>> {
        let n = self.inputs.len();
        (0..n).map(|i| (0..n).map(|j| self.chol[(i, j)]).collect()).collect()
    }

    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        self.theta.mean_const
            + self
                .inputs
                .iter()
                .zip(&self.alpha)
                .map(|(xi, a)| a * self.kernel.value(xi, x))
                .sum::<f64>()
    }

    /// Predictive mean and variance of the latent function at `x`.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let n = self.inputs.len();
        let mut v: Vec<f64> = self.inputs.iter().map(|xi| self.kernel.value(xi, x)).collect();
        let mean = self.theta.mean_const + v.iter().zip(&self.alpha).map(|(k, a)| k * a).sum::<f64>();
        // forward substitution L v = k
        let mut offset = 0;
        let mut quad = 0.0;
        for i in 0..n {
            let row = &self.chol_rows[offset..offset + i + 1];
            let s: f64 = row[..i].iter().zip(&v[..i]).map(|(l, vj)| l * vj).sum();
            let vi = (v[i] - s) / row[i];
            v[i] = vi;
            quad += vi * vi;
            offset += i + 1;
        }
        self.finish(mean, quad)
    }

    /// [`predict`](Self::predict) for many points with one blocked solve.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Vec<Prediction> {
        let n = self.inputs.len();
        let mut kx = Mat::from_fn(n, xs.len(), |i, j| self.kernel.value(&self.inputs[i], &xs[j]));
        let means: Vec<f64> = (0..xs.len())
            .map(|j| self.theta.mean_const + (0..n).map(|i| kx[(i, j)] * self.alpha[i]).sum::<f64>())
            .collect();
        self.chol.solve_lower_triangular_in_place(kx.as_mut());
        means
            .into_iter()
            .enumerate()
            .map(|(j, mean)| {
                let quad = kx.col(j).iter().map(|v| v * v).sum::<f64>();
                self.finish(mean, quad)
            })
            .collect()
    }

    fn finish(&self, mean: f64, quad: f64) -> Prediction {
        let prior = self.kernel.signal_var();
        Prediction { mean, variance: (prior - quad).clamp(0.0, prior) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_zero_residual() {
        let spec = KernelSpec::squared_exponential(1);
        let th = Hyperparams::isotropic(2.0, 1.0, 1, 1.0, 1.0);
        let (v, _) = log_marginal_likelihood(&spec, &th, &[vec![0.0]], &[2.0]).unwrap();
        let a: f64 = 2.0 * (1.0 + 1e-10);
        let expected = -0.5 * a.ln() - 0.5 * std::f64::consts::TAU.ln();
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn shift_invariance_of_likelihood() {
        let spec = KernelSpec::matern52(2);
        let xs = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.3, -0.7]];
        let ys = [0.4, -1.2, 2.2];
        let th = Hyperparams { mean_const: 0.1, lengthscales: vec![0.8, 1.1], signal_std: 1.4, noise_std: 0.1 };
        let (v0, _) = log_marginal_likelihood(&spec, &th, &xs, &ys).unwrap();
        let delta = 17.25;
        let shifted: Vec<f64> = ys.iter().map(|y| y + delta).collect();
        let th2 = Hyperparams { mean_const: th.mean_const + delta, ..th.clone() };
        let (v1, _) = log_marginal_likelihood(&spec, &th2, &xs, &shifted).unwrap();
        assert!((v0 - v1).abs() < 1e-10);
    }

    #[test]
    fn far_field_reverts_to_prior() {
        let spec = KernelSpec::squared_exponential(1);
        let th = Hyperparams::isotropic(1.5, 0.2, 1, 0.8, 0.0);
        let gp = FittedGp::condition(spec, th, vec![vec![0.0], vec![0.3]], vec![3.0, -1.0]).unwrap();
        let p = gp.predict(&[0.3 + 20.0 * 0.2]);
        assert!((p.mean - 1.5).abs() < 1e-6);
        assert!((p.variance - 0.64).abs() < 1e-6);
    }

    #[test]
    fn noiseless_interpolation() {
        let spec = KernelSpec::matern52(2);
        let th = Hyperparams::isotropic(0.0, 0.7, 2, 1.0, 0.0);
        let xs = vec![vec![0.0, 0.0], vec![0.5, 0.1], vec![-0.3, 0.9], vec![1.0, 1.0]];
        let ys = vec![1.0, -0.5, 0.25, 2.0];
        let gp = FittedGp::condition(spec, th, xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            let p = gp.predict(x);
            assert!((p.mean - y).abs() < 1e-6);
            assert!(p.variance <= 1e-8);
            assert!((gp.predict_mean(x) - p.mean).abs() < 1e-12);
        }
        assert!(gp.chol_factor().iter().enumerate().all(|(i, r)| r[i] > 0.0));
    }

    #[test]
    fn duplicate_inputs_need_jitter() {
        let spec = KernelSpec::squared_exponential(1);
        let th = Hyperparams::isotropic(0.0, 1.0, 1, 1.0, 0.0);
        let gp = FittedGp::condition(spec, th, vec![vec![0.2], vec![0.2]], vec![1.0, 1.0]).unwrap();
        assert!(gp.jitter() > 0.0);
        assert!((gp.predict(&[0.2]).mean - 1.0).abs() < 1e-6);
    }
}
