use bo_core::benchmarks::functions::branin;
use bo_core::gp::{log_marginal_likelihood, Hyperparams, KernelSpec};
use bo_core::numerics::{
    gradient_ascent_multistart, nelder_mead, pdf_first_derivative, pdf_second_derivative, std_normal_cdf,
    std_normal_pdf, AscentOptions, BoxDomain,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn pdf_derivatives_match_finite_differences_on_dense_grid() {
    let h = 1e-5;
    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for i in 0..10_000 {
        let z = -8.0 + 16.0 * i as f64 / 9_999.0;
        let fd1 = (std_normal_pdf(z + h) - std_normal_pdf(z - h)) / (2.0 * h);
        let fd2 = (pdf_first_derivative(z + h) - pdf_first_derivative(z - h)) / (2.0 * h);
        worst1 = worst1.max((pdf_first_derivative(z) - fd1).abs());
        worst2 = worst2.max((pdf_second_derivative(z) - fd2).abs());
    }
    assert!(worst1 <= 1e-6, "{worst1}");
    assert!(worst2 <= 1e-6, "{worst2}");
}

#[test]
fn derivative_examples() {
    assert_eq!(pdf_first_derivative(0.0), 0.0);
    assert!((pdf_first_derivative(1.0) + 0.241_970_7).abs() < 1e-7);
    assert!((pdf_first_derivative(-2.0) - 0.107_981_9).abs() < 1e-7);
    assert_eq!(pdf_second_derivative(1.0), 0.0);
    assert!((pdf_second_derivative(0.0) + 0.398_942_3).abs() < 1e-7);
    assert!((pdf_second_derivative(2.0) - 0.161_972_9).abs() < 1e-7);
}

/// Φ(z) by composite Simpson integration of the density from 0.
fn cdf_by_quadrature(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let mut s = std_normal_pdf(0.0) + std_normal_pdf(z);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * std_normal_pdf(k as f64 * h);
    }
    0.5 + s * h / 3.0
}

#[test]
fn cdf_matches_quadrature_reference() {
    for i in 0..=64 {
        let z = -8.0 + 0.25 * i as f64;
        let q = cdf_by_quadrature(z);
        assert!((std_normal_cdf(z) - q).abs() <= 1e-12, "z={z}: {} vs {q}", std_normal_cdf(z));
    }
    assert!((std_normal_cdf(1.0) - 0.841_344_7).abs() < 1e-7);
    let tail = std_normal_cdf(-8.0);
    assert!(tail > 0.0 && (tail - 6.22e-16).abs() < 1e-18);
}

proptest! {
    #[test]
    fn cdf_reflection(z in -12.0f64..12.0) {
        prop_assert!((std_normal_cdf(-z) - (1.0 - std_normal_cdf(z))).abs() <= 1e-12);
    }

    #[test]
    fn cdf_monotone(a in -10.0f64..10.0, d in 0.0f64..5.0) {
        prop_assert!(std_normal_cdf(a + d) >= std_normal_cdf(a));
    }
}

#[test]
fn nelder_mead_solves_positive_definite_quadratics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [1usize, 2, 3, 5] {
        let domain = BoxDomain::cube(-5.0, 5.0, d).unwrap();
        // H = Q diag(λ) Qᵀ from a random rotation built by Gram-Schmidt.
        let mut q: Vec<Vec<f64>> = Vec::new();
        while q.len() < d {
            let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for u in &q {
                let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
            }
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-3 {
                q.push(v.into_iter().map(|a| a / n).collect());
            }
        }
        let lambda: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..5.0)).collect();
        let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f_star = 1.0;
        let f = |x: &[f64]| {
            let mut s = f_star;
            for (u, l) in q.iter().zip(&lambda) {
                let p: f64 = u.iter().zip(x.iter().zip(&center)).map(|(a, (xi, ci))| a * (xi - ci)).sum();
                s += 0.5 * l * p * p;
            }
            s
        };
        for _ in 0..10 {
            let x0 = domain.sample_uniform(&mut rng);
            let r = nelder_mead(f, &x0, &domain, 1e-12).unwrap();
            assert!(r.f_best - f_star <= 1e-6, "d={d}: {}", r.f_best - f_star);
            assert!(domain.contains(&r.x_best));
            assert_eq!(r.f_best, f(&r.x_best));
        }
    }
}

/// Steepest walk over a 1e-3 grid from the nearest grid node.
fn grid_descent<F: Fn(&[f64]) -> f64>(f: F, start: [f64; 2], h: f64) -> f64 {
    let mut p = [(start[0] / h).round(), (start[1] / h).round()];
    let at = |p: [f64; 2]| f(&[p[0] * h, p[1] * h]);
    loop {
        let mut best = (at(p), p);
        for di in -1..=1 {
            for dj in -1..=1 {
                let q = [p[0] + di as f64, p[1] + dj as f64];
                let v = at(q);
                if v < best.0 {
                    best = (v, q);
                }
            }
        }
        if best.1 == p {
            return best.0;
        }
        p = best.1;
    }
}

#[test]
fn nelder_mead_on_branin_reaches_the_local_minimum() {
    let domain = BoxDomain::new(vec![-5.0, 0.0], vec![10.0, 15.0]).unwrap();
    let r = nelder_mead(branin, &[3.0, 3.0], &domain, 1e-10).unwrap();
    let oracle = grid_descent(branin, [3.0, 3.0], 1e-3);
    assert!((r.f_best - oracle).abs() <= 1e-3, "{} vs {oracle}", r.f_best);
}

#[test]
fn multistart_likelihood_beats_every_start() {
    let spec = KernelSpec::squared_exponential(1);
    let xs: Vec<Vec<f64>> = [0.0, 0.7, 1.3, 2.2, 3.0].iter().map(|v| vec![*v]).collect();
    let ys = [0.3, -0.4, 1.1, 0.2, -0.9];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let starts: Vec<Vec<f64>> = (0..4)
        .map(|_| vec![0.0, rng.gen_range(-2.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-5.0..-1.0)])
        .collect();
    let bounds = BoxDomain::new(vec![-5.0, -4.0, -4.0, -9.0], vec![5.0, 4.0, 4.0, 0.0]).unwrap();
    let g = |v: &[f64]| log_marginal_likelihood(&spec, &Hyperparams::from_log_vector(v), &xs, &ys).ok();
    let best = gradient_ascent_multistart(g, &starts, &bounds, &AscentOptions::default()).unwrap();
    for s in &starts {
        let v0 = log_marginal_likelihood(&spec, &Hyperparams::from_log_vector(s), &xs, &ys).unwrap().0;
        assert!(best.value >= v0);
    }
}
