use serde::{Deserialize, Serialize};

const SQRT_5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    #[serde(alias = "se")]
    SquaredExponential,
    #[serde(alias = "matern52")]
    Matern52,
}

impl KernelFamily {
    pub fn short_name(&self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "se",
            KernelFamily::Matern52 => "matern52",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "se" | "squared_exponential" => Ok(KernelFamily::SquaredExponential),
            "matern52" | "matern_5_2" | "matern" => Ok(KernelFamily::Matern52),
            other => Err(format!("unknown kernel `{other}` (expected se or matern52)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dims: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dims: usize) -> Self {
        assert!(dims >= 1, "kernel needs at least one input dimension");
        Self { family, dims }
    }

    pub fn squared_exponential(dims: usize) -> Self {
        Self::new(KernelFamily::SquaredExponential, dims)
    }

    pub fn matern52(dims: usize) -> Self {
        Self::new(KernelFamily::Matern52, dims)
    }
}

/// `θ = (c, ℓ_1..ℓ_d, σ_f, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub mean_const: f64,
    pub lengthscales: Vec<f64>,
    pub signal_std: f64,
    pub noise_std: f64,
}

impl Hyperparams {
    pub fn isotropic(mean_const: f64, lengthscale: f64, dims: usize, signal_std: f64, noise_std: f64) -> Self {
        Self { mean_const, lengthscales: vec![lengthscale; dims], signal_std, noise_std }
    }

    pub fn is_valid(&self) -> bool {
        self.mean_const.is_finite()
            && self.lengthscales.iter().all(|l| l.is_finite() && *l > 0.0)
            && self.signal_std.is_finite()
            && self.signal_std > 0.0
            && self.noise_std.is_finite()
            && self.noise_std >= 0.0
    }

    /// Unconstrained coordinates `(c, log ℓ_1..log ℓ_d, log σ_f, log σ)`.
    pub fn to_log_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.lengthscales.len() + 3);
        v.push(self.mean_const);
        v.extend(self.lengthscales.iter().map(|l| l.ln()));
        v.push(self.signal_std.ln());
        v.push(self.noise_std.ln());
        v
    }

    pub fn from_log_vector(v: &[f64]) -> Self {
        let d = v.len() - 3;
        Self {
            mean_const: v[0],
            lengthscales: v[1..=d].iter().map(|x| x.exp()).collect(),
            signal_std: v[d + 1].exp(),
            noise_std: v[d + 2].exp(),
        }
    }
}

/// Kernel evaluation with precomputed `1/ℓ_i²` and `σ_f²`.
#[derive(Debug, Clone)]
pub(crate) struct KernelEval {
    family: KernelFamily,
    signal_var: f64,
    inv_l2: Vec<f64>,
}

impl KernelEval {
    pub(crate) fn new(family: KernelFamily, theta: &Hyperparams) -> Self {
        Self {
            family,
            signal_var: theta.signal_std * theta.signal_std,
            inv_l2: theta.lengthscales.iter().map(|l| 1.0 / (l * l)).collect(),
        }
    }

    pub(crate) fn signal_var(&self) -> f64 {
        self.signal_var
    }

    fn scaled_sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.inv_l2)
            .map(|((a, b), w)| {
                let d = a - b;
                d * d * w
            })
            .sum()
    }

    pub(crate) fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2 = self.scaled_sq_dist(x, y);
        match self.family {
            KernelFamily::SquaredExponential => self.signal_var * (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                self.signal_var * (1.0 + SQRT_5 * r + 5.0 / 3.0 * r2) * (-SQRT_5 * r).exp()
            }
        }
    }

    /// Kernel value and `∂k/∂log ℓ_i` for every axis, written into `dlog`.
    pub(crate) fn value_and_lengthscale_grad(&self, x: &[f64], y: &[f64], dlog: &mut [f64]) -> f64 {
        let r2 = self.scaled_sq_dist(x, y);
        let (k, factor) = match self.family {
            KernelFamily::SquaredExponential => {
                let k = self.signal_var * (-0.5 * r2).exp();
                (k, k)
            }
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                let e = (-SQRT_5 * r).exp();
                let k = self.signal_var * (1.0 + SQRT_5 * r + 5.0 / 3.0 * r2) * e;
                (k, self.signal_var * 5.0 / 3.0 * (1.0 + SQRT_5 * r) * e)
            }
        };
        for ((g, (a, b)), w) in dlog.iter_mut().zip(x.iter().zip(y)).zip(&self.inv_l2) {
            let d = a - b;
            *g = factor * d * d * w;
        }
        k
    }
}

/// `k(x, x2)` for the ARD squared exponential or Matérn 5/2 family.
pub fn kernel_eval(spec: &KernelSpec, theta: &Hyperparams, x: &[f64], x2: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), spec.dims);
    KernelEval::new(spec.family, theta).value(x, x2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let th = Hyperparams::isotropic(0.0, 1.0, 1, 1.0, 0.0);
        let se = KernelSpec::squared_exponential(1);
        let m = KernelSpec::matern52(1);
        assert_eq!(kernel_eval(&se, &th, &[0.3], &[0.3]), 1.0);
        assert!((kernel_eval(&se, &th, &[0.0], &[1.0]) - 0.606_530_659_712_633_4).abs() < 1e-15);
        // (1 + √5 + 5/3) exp(-√5)
        assert!((kernel_eval(&m, &th, &[0.0], &[1.0]) - 0.523_994_108_831_820_3).abs() < 1e-14);
        let th2 = Hyperparams::isotropic(0.0, 0.7, 3, 2.5, 0.0);
        let x = [0.1, -0.4, 2.0];
        assert_eq!(kernel_eval(&KernelSpec::matern52(3), &th2, &x, &x), 6.25);
    }

    #[test]
    fn lengthscale_gradient_matches_finite_difference() {
        for family in [KernelFamily::SquaredExponential, KernelFamily::Matern52] {
            let th = Hyperparams { mean_const: 0.0, lengthscales: vec![0.6, 1.7], signal_std: 1.3, noise_std: 0.0 };
            let (x, y) = ([0.2, -0.5], [0.9, 0.4]);
            let mut g = [0.0; 2];
            KernelEval::new(family, &th).value_and_lengthscale_grad(&x, &y, &mut g);
            for i in 0..2 {
                let h = 1e-6;
                let mut up = th.clone();
                let mut dn = th.clone();
                up.lengthscales[i] *= f64::exp(h);
                dn.lengthscales[i] *= f64::exp(-h);
                let fd = (KernelEval::new(family, &up).value(&x, &y) - KernelEval::new(family, &dn).value(&x, &y)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-8, "{family:?} axis {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn log_vector_round_trip() {
        let th = Hyperparams { mean_const: -1.5, lengthscales: vec![0.3, 4.0], signal_std: 2.0, noise_std: 1e-3 };
        let back = Hyperparams::from_log_vector(&th.to_log_vector());
        assert!((back.noise_std - th.noise_std).abs() < 1e-18);
        assert!((back.lengthscales[1] - 4.0).abs() < 1e-14);
    }
}
