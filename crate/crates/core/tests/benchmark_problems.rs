use bo_core::acquisition::success_probability;
use bo_core::benchmarks::{eval_problem, make_constrained_problem, make_problem, FailureRegion, NoiseSpec, ProblemId};
use bo_core::gp::{fit_failure_gp, Dataset, KernelSpec, Outcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let gpr = make_problem("GPR").unwrap();
    assert_eq!(eval_problem(&gpr, &[0.0, -1.0], None, &mut rng).unwrap(), Outcome::Success(3.0));
    let bra = make_problem("BRA").unwrap();
    assert_eq!(bra.global_argmins.len(), 3);
    assert!((bra.f_glob - 0.397_887).abs() < 1e-6);
    assert!(bra.global_argmins.iter().any(|x| (x[0] - std::f64::consts::PI).abs() < 1e-9 && (x[1] - 2.275).abs() < 1e-9));
    let table: Vec<(u64, u64)> = ProblemId::ALL.iter().map(|id| {
        let p = make_problem(id.abbreviation()).unwrap();
        (p.n_local, p.n_global)
    }).collect();
    assert_eq!(
        table,
        vec![(8, 1), (1, 1), (3, 3), (4, 1), (6, 2), (760, 18), (4, 1), (5, 1), (7, 1), (10, 1), (4, 1), (11u64.pow(10), 1)]
    );
}

#[test]
fn noise_matches_requested_snr() {
    for name in ["BRA", "HM3", "CSF"] {
        let p = make_problem(name).unwrap();
        let noise = NoiseSpec::new(&p, 10.0, 42);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut sample_rng = ChaCha8Rng::seed_from_u64(44);
        let mut signal = Vec::new();
        let mut resid = Vec::new();
        for _ in 0..10_000 {
            let x = p.domain.sample_uniform(&mut sample_rng);
            let clean = p.value(&x);
            let noisy = eval_problem(&p, &x, Some(&noise), &mut rng).unwrap().value().unwrap();
            signal.push(clean);
            resid.push(noisy - clean);
        }
        let rms = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        let snr = 20.0 * (rms(&signal) / rms(&resid)).log10();
        assert!((snr - 10.0).abs() <= 0.5, "{name}: {snr} dB");
    }
}

#[test]
fn learned_success_probability_for_interior_disc() {
    let region = FailureRegion::Disc { center: vec![2.5, 7.5], radius: 3.0 };
    let p = make_constrained_problem("BRA", region).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut data = Dataset::new();
    for _ in 0..100 {
        let x = p.domain.sample_uniform(&mut rng);
        let o = eval_problem(&p, &x, None, &mut rng).unwrap();
        data.push(x, o);
    }
    assert!(data.outcomes().iter().any(|o| o.is_failure()));
    let gp = fit_failure_gp(KernelSpec::squared_exponential(2), &data, 4, 7).unwrap();
    assert!(success_probability(&gp, &[2.5, 7.5]) < 0.5);
}
