use amm_core::calibrate::DEFAULT_SEED;
use amm_core::io::{read_report, report_to_json, write_report};
use amm_core::synth::{meaningful_set, mixture_set, MeaningfulSpec, MixtureSpec};
use amm_core::{evaluate_meaningfulness, AttributeMatrix, MetricConfig, SolverOptions};

fn instance(seed: u64) -> (AttributeMatrix, AttributeMatrix) {
    let s = meaningful_set(120, 16, &MeaningfulSpec::default(), seed).unwrap();
    let spec = MixtureSpec { meaningful_fraction: 0.5, k: 8, flip_rate: 0.1, seed };
    let d = mixture_set(&s, &spec).unwrap().0;
    (s, d)
}

fn small_config() -> MetricConfig {
    MetricConfig { grid: Some(vec![0, 1, 2, 4, 8, 16, 32]), trials: 3, ..MetricConfig::default() }
}

#[test]
fn report_invariants() {
    let (s, d) = instance(1);
    let r = evaluate_meaningfulness(&s, &d, &small_config()).unwrap();
    assert_eq!(r.gamma_tilde, (r.gamma_cvx + r.gamma_jp) / 2.0);
    for c in [&r.curves.cvx, &r.curves.jp] {
        assert_eq!(c.grid, [0, 1, 2, 4, 8, 16, 32]);
        assert!(c.isotonic_delta.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(c.isotonic_delta[0], c.mean_delta[0]);
    }
    assert_eq!(r.config.seed, DEFAULT_SEED);
    assert_eq!(r.config.n_meaningful, 16);
    assert_eq!(r.config.n_discovered, 8);
    assert_eq!(r.split.s1_columns.len() + r.split.s2_columns.len(), 16);
    assert_eq!(r.g_star_mode, "interpolated");
    assert!(r.delta_full.is_none());
    assert!(!r.degraded);
}

#[test]
fn starved_solver_marks_report_degraded() {
    let (s, d) = instance(2);
    let config = MetricConfig { solver: SolverOptions { tol: 1e-12, max_iter: 1 }, ..small_config() };
    let r = evaluate_meaningfulness(&s, &d, &config).unwrap();
    assert!(r.nonconverged_cvx * 10 > r.solves_cvx);
    assert!(r.degraded);
}

#[test]
fn full_distance_is_reported_on_request() {
    let (s, d) = instance(3);
    let config = MetricConfig { full_distance: true, ..small_config() };
    let r = evaluate_meaningfulness(&s, &d, &config).unwrap();
    let full = r.delta_full.unwrap();
    // The whole set contains the reference half, so it reconstructs at least as well.
    assert!(full.cvx <= r.delta_d_cvx + 1e-6);
}

#[test]
fn report_json_round_trips() {
    let (s, d) = instance(4);
    let r = evaluate_meaningfulness(&s, &d, &small_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&r, &path).unwrap();
    let back = read_report(&path).unwrap();
    assert_eq!(back, r);
    assert_eq!(report_to_json(&back).unwrap(), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn results_do_not_depend_on_pool_size() {
    let (s, d) = instance(5);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| report_to_json(&evaluate_meaningfulness(&s, &d, &small_config()).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(run(3), one);
    assert_eq!(run(8), one);
}

#[test]
fn seeds_change_results_and_repeat_exactly() {
    let (s, d) = instance(6);
    let a = evaluate_meaningfulness(&s, &d, &small_config()).unwrap();
    let b = evaluate_meaningfulness(&s, &d, &small_config()).unwrap();
    assert_eq!(a, b);
    let other = MetricConfig { seed: 99, ..small_config() };
    let c = evaluate_meaningfulness(&s, &d, &other).unwrap();
    assert_ne!(a.curves.cvx.mean_delta, c.curves.cvx.mean_delta);
}
