use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scavenger_hunt::bench::{
    build_report, ci95, generate_environment, line_fixture, read_results, robot_fixture, run_experiment, welch_t,
    write_results, ExperimentSpec, HuntCost, MAX_LOCATIONS_PER_OBJECT,
};
use scavenger_hunt::envfile::{load_environment, save_environment};
use scavenger_hunt::graph::NodeId;
use scavenger_hunt::planners::PlannerKind;
use scavenger_hunt::ObjectId;

/// Two-sided tail of Student's t by Simpson integration of the density.
fn t_tail_by_quadrature(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let steps = 200_000;
    let h = t.abs() / steps as f64;
    let mut s = pdf(0.0) + pdf(t.abs());
    for i in 1..steps {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

/// Stirling series with upward recurrence.
fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

fn small_rows(seed: u64) -> Vec<scavenger_hunt::bench::TrialResult> {
    run_experiment(&ExperimentSpec::new(vec![3, 4], 2, 5, PlannerKind::CLASSICAL.to_vec(), seed), 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn report_ignores_row_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let rows = small_rows(seed % 50);
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(build_report(&rows).unwrap(), build_report(&shuffled).unwrap());
    }

    #[test]
    fn summary_is_affine(xs in proptest::collection::vec(-1e3f64..1e3, 2..40), a in -10.0f64..10.0, b in -100.0f64..100.0) {
        let s = ci95(&xs).unwrap();
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let t = ci95(&ys).unwrap();
        let tol = 1e-9 * (1.0 + s.mean.abs() * a.abs() + b.abs() + s.se * a.abs());
        prop_assert!((t.mean - (a * s.mean + b)).abs() <= tol);
        prop_assert!((t.se - a.abs() * s.se).abs() <= tol);
        prop_assert!((t.ci95 - 1.96 * t.se).abs() <= 1e-12 * t.ci95.max(1.0));
    }

    #[test]
    fn welch_p_matches_quadrature(
        a in proptest::collection::vec(0.0f64..10.0, 3..20),
        b in proptest::collection::vec(0.0f64..10.0, 3..20),
    ) {
        let test = welch_t(&a, &b).unwrap();
        prop_assume!(test.t.is_finite());
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (a.len() - 1) as f64 / a.len() as f64;
        let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / (b.len() - 1) as f64 / b.len() as f64;
        let t = (ma - mb) / (va + vb).sqrt();
        let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
        prop_assert!((test.t - t).abs() <= 1e-9 * t.abs().max(1.0));
        prop_assert!((test.df - df).abs() <= 1e-9 * df);
        prop_assert!((test.p - t_tail_by_quadrature(t, df)).abs() <= 1e-6);
    }

    #[test]
    fn generated_priors_are_well_formed(n in 3usize..=12, seed in any::<u64>(), env_id in 0u64..100) {
        let env = generate_environment(n, 4, seed, env_id).unwrap();
        prop_assert_eq!(env.graph.node_count(), n);
        prop_assert!(env.start.0 < n);
        for o in 0..4 {
            let row: Vec<f64> = (0..n).map(|i| env.prior.prob(ObjectId(o), NodeId(i))).collect();
            let support = row.iter().filter(|&&p| p > 0.0).count();
            prop_assert!((1..=MAX_LOCATIONS_PER_OBJECT).contains(&support));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(generate_environment(n, 4, seed, env_id).unwrap(), env);
    }
}

#[test]
fn optimal_only_ratios_are_one() {
    let rows = run_experiment(&ExperimentSpec::new(vec![4], 3, 5, vec![PlannerKind::OfflineOptimal], 1), 1).unwrap();
    let report = build_report(&rows).unwrap();
    let mut csv = csv::Reader::from_reader(report.ratio_by_env.as_bytes());
    let headers = csv.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "ratio").unwrap();
    let mut seen = 0;
    for rec in csv.records() {
        assert_eq!(rec.unwrap()[col].parse::<f64>().unwrap(), 1.0);
        seen += 1;
    }
    assert_eq!(seen, 3);
}

#[test]
fn adding_node_counts_keeps_existing_rows() {
    let planners = PlannerKind::CLASSICAL.to_vec();
    let a = run_experiment(&ExperimentSpec::new(vec![5], 2, 4, planners.clone(), 3), 2).unwrap();
    let b = run_experiment(&ExperimentSpec::new(vec![3, 5, 6], 2, 4, planners, 3), 3).unwrap();
    let b5: Vec<_> = b.into_iter().filter(|r| r.env_id == 5).collect();
    assert_eq!(a, b5);
}

#[test]
fn results_round_trip_through_a_file() {
    let rows = small_rows(7);
    assert!(rows.iter().all(|r| matches!(r.cost, HuntCost::Completed(_))));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results(std::fs::File::create(&path).unwrap(), &rows).unwrap();
    assert_eq!(read_results(std::fs::File::open(&path).unwrap()).unwrap(), rows);
}

#[test]
fn environment_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, env) in [robot_fixture(), line_fixture(), generate_environment(8, 4, 2, 0).unwrap()].into_iter().enumerate()
    {
        let path = dir.path().join(format!("env{i}.json"));
        save_environment(&path, &env).unwrap();
        let back = load_environment(&path).unwrap();
        assert_eq!(back.prior, env.prior);
        assert_eq!(back.start, env.start);
        assert_eq!(back.object_names, env.object_names);
        assert_eq!(back.graph.to_matrix(), env.graph.to_matrix());
    }
}

#[test]
fn robot_fixture_rows() {
    let env = robot_fixture();
    let expect: [&[(usize, f64)]; 4] = [
        &[(2, 0.1), (3, 0.8), (7, 0.1)],
        &[(1, 0.2), (3, 0.5), (7, 0.3)],
        &[(1, 0.2), (2, 0.3), (4, 0.2), (5, 0.3)],
        &[(4, 0.5), (5, 0.5)],
    ];
    for (o, row) in expect.iter().enumerate() {
        let mut want = [0.0; 7];
        for &(label, p) in row.iter() {
            want[label - 1] = p;
        }
        for (i, w) in want.iter().enumerate() {
            assert_eq!(env.prior.prob(ObjectId(o), NodeId(i)), *w);
        }
    }
    assert_eq!(env.start, NodeId(5));
}
