use bo_core::acquisition::AcquisitionKind;
use bo_core::benchmarks::{log10_distance, make_problem};
use bo_core::engine::{initial_design, maximize_acquisition, run_bo, run_bo_hidden_constraints, BoConfig, RunTrace};
use bo_core::gp::{FittedGp, Hyperparams, KernelSpec, Outcome};
use bo_core::numerics::BoxDomain;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_config(kind: AcquisitionKind, n_max: usize, seed: u64) -> BoConfig {
    BoConfig::new(BoxDomain::cube(0.0, 1.0, 1).unwrap(), kind, n_max, seed)
}

fn check_invariants(trace: &RunTrace, domain: &BoxDomain, n_max: usize) {
    assert_eq!(trace.evaluations(), n_max);
    let mut prev = f64::INFINITY;
    for (k, r) in trace.records.iter().enumerate() {
        assert_eq!(r.n, k + 1);
        assert!(domain.contains(&r.x), "{:?}", r.x);
        let f = r.f_min.unwrap_or(f64::INFINITY);
        assert!(f <= prev, "incumbent rose at n={}", r.n);
        prev = f;
    }
}

#[test]
fn initial_design_examples() {
    let p = make_problem("BRA").unwrap();
    let config = BoConfig::new(p.domain.clone(), AcquisitionKind::ScaledEi, 40, 9);
    let mut obj = p.objective(None);
    assert_eq!(initial_design(&config, &mut obj).unwrap().len(), 20);

    let csf = make_problem("CSF").unwrap();
    let config = BoConfig::new(csf.domain.clone(), AcquisitionKind::Ei, 20, 4);
    let a = initial_design(&config, &mut csf.objective(None)).unwrap();
    let b = initial_design(&config, &mut csf.objective(None)).unwrap();
    assert_eq!(a, b);

    let mut half = unit_config(AcquisitionKind::Ei, 20, 1);
    half.hidden_constraints = true;
    let mut obj = |x: &[f64]| if x[0] < 0.5 { Outcome::Failure } else { Outcome::Success(x[0]) };
    let data = initial_design(&half, &mut obj).unwrap();
    let fails = data.outcomes().iter().filter(|o| o.is_failure()).count();
    assert!(fails > 0 && fails < data.len());
    let trace = run_bo_hidden_constraints(&half, &mut obj).unwrap();
    assert_eq!(trace.evaluations(), 20);
}

fn symmetric_posterior() -> FittedGp {
    let xs: Vec<Vec<f64>> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|v| vec![*v]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (x[0] - 0.5f64).powi(2)).collect();
    let theta = Hyperparams::isotropic(0.1, 0.15, 1, 0.2, 1e-3);
    FittedGp::condition(KernelSpec::squared_exponential(1), theta, xs, ys).unwrap()
}

#[test]
fn mean_minimizer_is_found() {
    let xs: Vec<Vec<f64>> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|v| vec![*v]).collect();
    let ys = vec![1.0, 0.2, -0.8, 0.1, 0.9];
    let theta = Hyperparams::isotropic(0.0, 0.15, 1, 1.0, 1e-3);
    let gp = FittedGp::condition(KernelSpec::squared_exponential(1), theta, xs, ys).unwrap();
    let (mut best, mut arg) = (f64::INFINITY, 0.0);
    for i in 0..=100_000 {
        let x = i as f64 / 100_000.0;
        let m = gp.predict_mean(&[x]);
        if m < best {
            best = m;
            arg = x;
        }
    }
    let config = unit_config(AcquisitionKind::Mn, 20, 0);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = maximize_acquisition(&config, Some(&gp), None, 0.0, &mut rng);
        assert!((x[0] - arg).abs() <= 1e-2, "{} vs {arg}", x[0]);
    }
}

#[test]
fn random_proposals_are_uniform() {
    let config = unit_config(AcquisitionKind::Rnd, 20, 0);
    let gp = symmetric_posterior();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bins = [0usize; 10];
    for _ in 0..1000 {
        let x = maximize_acquisition(&config, Some(&gp), None, 0.0, &mut rng);
        bins[((x[0] * 10.0) as usize).min(9)] += 1;
    }
    let chi2: f64 = bins.iter().map(|&c| (c as f64 - 100.0).powi(2) / 100.0).sum();
    // Upper 0.1% point of chi-square with 9 degrees of freedom.
    assert!(chi2 < 27.877, "chi2 = {chi2}, bins {bins:?}");
}

#[test]
fn failure_weighting_pushes_proposals_to_the_safe_half() {
    let base = symmetric_posterior();
    let xs: Vec<Vec<f64>> = (0..=20).map(|i| vec![i as f64 / 20.0]).collect();
    let labels: Vec<f64> = xs.iter().map(|x| if x[0] < 0.5 { 1.0 } else { -1.0 }).collect();
    let theta = Hyperparams::isotropic(0.0, 0.1, 1, 1.0, 0.05);
    let failure = FittedGp::condition(KernelSpec::squared_exponential(1), theta, xs, labels).unwrap();
    let config = unit_config(AcquisitionKind::Ei, 20, 0);
    let mut right = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = maximize_acquisition(&config, Some(&base), Some(&failure), 0.0, &mut rng);
        if x[0] > 0.5 {
            right += 1;
        }
    }
    assert!(right >= 95, "{right}/100");
}

#[test]
fn csf_scaled_ei_beats_random_search() {
    let p = make_problem("CSF").unwrap();
    let mut dist = |kind| {
        (0..5)
            .map(|seed| {
                let config = BoConfig::new(p.domain.clone(), kind, 120, seed);
                let trace = run_bo(&config, &mut p.objective(None)).unwrap();
                check_invariants(&trace, &p.domain, 120);
                log10_distance(trace.f_min.unwrap(), p.f_glob)
            })
            .sum::<f64>()
            / 5.0
    };
    let scaled = dist(AcquisitionKind::ScaledEi);
    let rnd = dist(AcquisitionKind::Rnd);
    assert!(scaled < rnd, "ScaledEI {scaled} vs RND {rnd}");
}

#[test]
fn runs_respect_budget_domain_monotonicity_and_determinism() {
    let kinds = [
        AcquisitionKind::Rnd,
        AcquisitionKind::Mn,
        AcquisitionKind::lcb(),
        AcquisitionKind::Pi,
        AcquisitionKind::Ei,
        AcquisitionKind::ScaledEi,
    ];
    for name in ["CSF", "BRA"] {
        let p = make_problem(name).unwrap();
        for kind in kinds {
            let mut config = BoConfig::new(p.domain.clone(), kind, p.dims * 10 + 12, 17);
            config.candidate_count = 2000;
            let mut calls = 0usize;
            let f = p.clone();
            let mut obj = |x: &[f64]| {
                calls += 1;
                Outcome::Success(f.value(x))
            };
            let a = run_bo(&config, &mut obj).unwrap();
            assert_eq!(calls, config.n_max);
            check_invariants(&a, &p.domain, config.n_max);
            let b = run_bo(&config, &mut p.objective(None)).unwrap();
            assert_eq!(a, b, "{name} {kind}");
        }
    }
}

#[test]
fn hidden_constraints_avoid_the_failure_interval() {
    let objective = |x: &[f64]| if x[0] <= 0.3 { Outcome::Failure } else { Outcome::Success((x[0] - 0.7).powi(2)) };
    for seed in 0..5 {
        let mut config = unit_config(AcquisitionKind::ScaledEi, 45, seed);
        config.hidden_constraints = true;
        let trace = run_bo_hidden_constraints(&config, &mut objective.clone()).unwrap();
        check_invariants(&trace, &config.domain, 45);
        assert!(trace.x_min.as_ref().unwrap()[0] > 0.3);
        let third = |k: usize| {
            let rows = &trace.records[k * 15..(k + 1) * 15];
            rows.iter().filter(|r| r.outcome.is_failure()).count()
        };
        assert!(third(2) < third(0), "seed {seed}: {} vs {}", third(2), third(0));
    }
}

#[test]
fn empty_failure_region_matches_plain_bo() {
    let p = make_problem("CSF").unwrap();
    for seed in 0..3 {
        let config = BoConfig::new(p.domain.clone(), AcquisitionKind::ScaledEi, 30, seed);
        let plain = run_bo(&config, &mut p.objective(None)).unwrap();
        let mut hidden_cfg = config.clone();
        hidden_cfg.hidden_constraints = true;
        let hidden = run_bo_hidden_constraints(&hidden_cfg, &mut p.objective(None)).unwrap();
        for (a, b) in plain.records.iter().zip(&hidden.records) {
            assert!((a.x[0] - b.x[0]).abs() < 1e-3, "seed {seed} n={}: {} vs {}", a.n, a.x[0], b.x[0]);
        }
    }
}

#[test]
fn noisy_incumbent_uses_posterior_mean() {
    let p = make_problem("CSF").unwrap();
    let mut config = BoConfig::new(p.domain.clone(), AcquisitionKind::Ei, 16, 2);
    config.noisy_incumbent = true;
    let noise = bo_core::benchmarks::NoiseSpec::new(&p, 10.0, 5);
    let trace = run_bo(&config, &mut p.objective(Some(noise))).unwrap();
    let last = trace.records.last().unwrap();
    let observed_min = trace.records.iter().filter_map(|r| r.outcome.value()).fold(f64::INFINITY, f64::min);
    assert!(last.f_min.unwrap() != observed_min);
    assert_eq!(trace.evaluations(), 16);
}
