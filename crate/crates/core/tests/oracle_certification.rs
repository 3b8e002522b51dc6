use bo_core::benchmarks::{make_constrained_problem, make_problem, run_oracle, FailureRegion, OracleOptions, ProblemId};

#[test]
fn every_problem_recovers_its_reference_minimum() {
    for id in ProblemId::ALL {
        let p = make_problem(id.abbreviation()).unwrap();
        let t = std::time::Instant::now();
        let r = run_oracle(&p, &OracleOptions::default()).unwrap();
        println!(
            "{id}: f_best={:.15} sample_min={:.6} globals={} locals={} ({:.1?})",
            r.f_best,
            r.sample_min,
            r.global_minima.len(),
            r.local_minima.len(),
            t.elapsed()
        );
        assert!((r.f_best - p.f_glob).abs() <= 1e-6, "{id}: {} vs {}", r.f_best, p.f_glob);
        assert!(r.sample_min >= p.f_glob - 1e-4, "{id}");
        if p.dims <= 2 {
            assert!(r.sample_count >= 1_000_000, "{id}");
        }
    }
}

#[test]
fn two_dimensional_minima_counts() {
    let expect = [("BRA", 3, 3), ("CAM", 6, 2), ("GPR", 4, 1), ("ROS", 1, 1), ("CSF", 8, 1)];
    for (name, local, global) in expect {
        let p = make_problem(name).unwrap();
        let r = run_oracle(&p, &OracleOptions::default()).unwrap();
        assert_eq!(r.local_minima.len(), local, "{name} local");
        assert_eq!(r.global_minima.len(), global, "{name} global");
    }
}

#[test]
fn shubert_has_eighteen_global_minima() {
    let p = make_problem("SHU").unwrap();
    let r = run_oracle(&p, &OracleOptions::default()).unwrap();
    assert_eq!(r.global_minima.len(), 18);
    for g in &r.global_minima {
        assert!(p.global_argmins.iter().any(|a| a.iter().zip(g).all(|(u, v)| (u - v).abs() < 1e-5)));
    }
    // Every strict interior minimum, counted once.
    assert_eq!(r.local_minima.len(), 722);
}

#[test]
fn branin_disc_over_one_argmin_keeps_reference_value() {
    let region = FailureRegion::Disc { center: vec![std::f64::consts::PI, 2.275], radius: 1.0 };
    let p = make_constrained_problem("BRA", region).unwrap();
    assert!(!p.region_covers_optimum);
    assert_eq!(p.global_argmins.len(), 2);
    let r = run_oracle(&p, &OracleOptions::coarse()).unwrap();
    assert!((r.f_best - 0.397_887_357_729_738_2).abs() <= 1e-6);
    assert_eq!(r.global_minima.len(), 2);
}

#[test]
fn csf_region_over_optimum_switches_target() {
    let region = FailureRegion::Interval { axis: 0, lo: 4.0, hi: 5.0 };
    let p = make_constrained_problem("CSF", region).unwrap();
    assert!(p.region_covers_optimum);
    let scan = (0..=1_000_000)
        .map(|i| i as f64 * 1e-5)
        .filter(|x| !(4.0..=5.0).contains(x))
        .map(|x| (5.0 * x).cos() + 2.0 * x.sin())
        .fold(f64::INFINITY, f64::min);
    assert!(p.f_glob <= scan && p.f_glob >= scan - 1e-6, "{} vs {scan}", p.f_glob);
    assert!(p.global_argmins.iter().all(|x| !(4.0..=5.0).contains(&x[0])));
}
