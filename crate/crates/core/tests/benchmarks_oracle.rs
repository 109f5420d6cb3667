//! Test functions against dense-grid searches, sampled objectives and
//! suite aggregation.

use gpest::acquisition::AcquisitionKind;
use gpest::bandit::{run_with_values, RunConfig};
use gpest::benchmarks::{
    branin, hartmann3, make_gp_objective, run_suite, AcquisitionStats, FunctionFamily, GpObjectiveSpec, SuiteSpec,
    Trace, BRANIN_BOUNDS,
};
use gpest::gp::MeanSpec;
use gpest::rng::stream;
use gpest::stats::{lower_median, mean};
use rand::Rng;
use std::f64::consts::PI;

fn dense_max(f: impl Fn(&[f64]) -> f64, axes: &[(f64, f64)], n: usize) -> (f64, Vec<f64>) {
    let d = axes.len();
    let mut best = (f64::NEG_INFINITY, vec![]);
    let total = n.pow(d as u32);
    let mut x = vec![0.0; d];
    for k in 0..total {
        let mut r = k;
        for (j, (lo, hi)) in axes.iter().enumerate() {
            x[j] = lo + (hi - lo) * (r % n) as f64 / (n - 1) as f64;
            r /= n;
        }
        let v = f(&x);
        if v > best.0 {
            best = (v, x.clone());
        }
    }
    best
}

#[test]
fn hartmann_optimum_matches_dense_grid() {
    let (max, at) = dense_max(|x| hartmann3(x).unwrap(), &[(0.0, 1.0); 3], 101);
    let canonical = [0.114614, 0.555649, 0.852547];
    let value = hartmann3(&canonical).unwrap();
    // the grid cannot beat the continuous optimum, and with spacing 0.01 it
    // gets within a few 1e-3
    assert!(value >= max - 1e-12);
    assert!(value - max < 5e-3, "{value} vs {max}");
    for (a, c) in at.iter().zip(canonical) {
        assert!((a - c).abs() <= 0.01 + 1e-9);
    }
}

#[test]
fn branin_optima_match_dense_grid() {
    let (max, _) = dense_max(|x| branin(x).unwrap(), &BRANIN_BOUNDS, 1001);
    for x in [[-PI, 12.275], [PI, 2.275], [3.0 * PI, 2.475]] {
        let v = branin(&x).unwrap();
        assert!(v >= max - 1e-12);
        assert!(v - max < 1e-3, "{v} vs {max}");
    }
}

#[test]
fn test_functions_are_finite_and_pure() {
    let mut rng = stream(51, 0);
    for _ in 0..10_000 {
        let u: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=1.0)).collect();
        let h = hartmann3(&u).unwrap();
        assert!(h.is_finite());
        assert_eq!(h, hartmann3(&u).unwrap());
        let b = [-5.0 + 15.0 * u[0], 15.0 * u[1]];
        assert!(branin(&b).unwrap().is_finite());
        assert_eq!(branin(&b).unwrap(), branin(&b).unwrap());
    }
}

#[test]
fn degenerate_prior_gives_the_linear_mean_and_est_finds_its_corner() {
    let spec = GpObjectiveSpec { signal_std: 1e-12, resolution: 20, ..GpObjectiveSpec::new(2) };
    let o = make_gp_objective(2, 61, &spec).unwrap();
    let MeanSpec::Linear { slope, .. } = &o.model.mean else { panic!("linear mean expected") };
    for (x, v) in o.grid.points().iter().zip(&o.values) {
        assert!((v - o.model.mean.eval(x)).abs() < 1e-6);
    }
    let corner: Vec<f64> = slope.iter().map(|s| if *s > 0.0 { 1.0 } else { 0.0 }).collect();
    let best = o.values.iter().position(|v| *v == o.f_max).unwrap();
    assert_eq!(o.grid.point(best), corner.as_slice());
    let result = run_with_values(&RunConfig::new(o.model.clone(), o.grid.clone(), AcquisitionKind::EstNumeric, 3), &o.values).unwrap();
    assert!(result.r_min < 1e-9);
    assert!(result.t_min <= 3);
}

#[test]
fn sampled_objectives_are_deterministic_and_record_their_max() {
    let spec = GpObjectiveSpec::new(1);
    let a = make_gp_objective(1, 62, &spec).unwrap();
    assert_eq!(a, make_gp_objective(1, 62, &spec).unwrap());
    assert_eq!(a.f_max, a.values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    assert_ne!(a.values, make_gp_objective(1, 63, &spec).unwrap().values);
}

#[test]
fn sampled_maxima_exceed_the_mean_function() {
    let spec = GpObjectiveSpec::new(1);
    let mut maxima = Vec::new();
    let mut above = 0;
    for seed in 0..200 {
        let o = make_gp_objective(1, 7000 + seed, &spec).unwrap();
        let mean_max = o.grid.points().iter().map(|x| o.model.mean.eval(x)).fold(f64::NEG_INFINITY, f64::max);
        if o.f_max > mean_max {
            above += 1;
        }
        maxima.push(o.f_max);
    }
    assert!(mean(&maxima) > 0.0);
    assert!(above > 100, "{above}/200");
}

fn small_suite(acquisitions: Vec<AcquisitionKind>) -> SuiteSpec {
    let mut spec = SuiteSpec::new(FunctionFamily::GpSample1D, 3, 12, acquisitions);
    spec.resolution = Some(60);
    spec.base_seed = 5;
    spec.warm_start = 2;
    spec
}

#[test]
fn suite_is_deterministic_and_matched() {
    let spec = small_suite(vec![AcquisitionKind::Random { seed: 2 }, AcquisitionKind::Random { seed: 2 }]);
    let a = run_suite(&spec).unwrap();
    let b = run_suite(&spec).unwrap();
    assert_eq!(a, b);
    assert!(a.failures.is_empty());
    let (first, second) = (&a.stats[0], &a.stats[1]);
    assert_eq!(first.label, "Rand");
    assert_eq!(second.label, "Rand#2");
    assert_eq!(first.simple_regret, second.simple_regret);
    assert_eq!(first.r_min_mean, second.r_min_mean);

    let one = SuiteSpec { n_functions: 1, ..spec.clone() };
    assert_eq!(run_suite(&one).unwrap().stats, run_suite(&one).unwrap().stats);
}

#[test]
fn acquisitions_see_identical_objectives_and_warm_starts() {
    let spec = small_suite(vec![AcquisitionKind::EstNumeric, AcquisitionKind::ucb(), AcquisitionKind::pi()]);
    let outcome = run_suite(&spec).unwrap();
    for i in 0..spec.n_functions {
        let o = spec.objective(i).unwrap();
        assert_eq!(o.f_max, outcome.f_max[i]);
        let warm: Vec<Vec<usize>> = spec
            .acquisitions
            .iter()
            .map(|a| spec.run_config(&o, a, i).unwrap().warm_start)
            .collect();
        assert!(warm.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(warm[0].len(), 2);
        for run in outcome.runs.iter().filter(|r| r.function_id == i) {
            assert_eq!(run.result.f_max, o.f_max);
        }
    }
}

#[test]
fn suite_stats_recompute_from_runs() {
    let spec = small_suite(vec![AcquisitionKind::EstNumeric, AcquisitionKind::ei()]);
    let outcome = run_suite(&spec).unwrap();
    for stats in &outcome.stats {
        let runs: Vec<_> = outcome.runs.iter().filter(|r| r.label == stats.label).collect();
        assert_eq!(runs.len(), spec.n_functions);
        let r: Vec<f64> = runs.iter().map(|r| r.result.r_min).collect();
        let t: Vec<f64> = runs.iter().map(|r| r.result.t_min as f64).collect();
        assert!((stats.r_min_mean - mean(&r)).abs() <= 1e-12);
        assert!((stats.t_min_mean - mean(&t)).abs() <= 1e-12);
        assert_eq!(stats.r_min_median, lower_median(&r));
        assert_eq!(stats.t_min_median, lower_median(&t));
        let traces: Vec<Trace> = runs.iter().map(|r| Trace::from(&r.result)).collect();
        assert_eq!(&AcquisitionStats::from_traces(stats.label.clone(), &traces), stats);
        for (k, m) in stats.cumulative_regret.mean.iter().enumerate() {
            let direct = mean(&runs.iter().map(|r| r.result.records[k].cumulative_regret).collect::<Vec<_>>());
            assert!((m - direct).abs() <= 1e-12);
        }
    }
}

#[test]
fn fixed_function_families_run() {
    for family in [FunctionFamily::Branin, FunctionFamily::Hartmann3] {
        let mut spec = SuiteSpec::new(family, 1, 5, vec![AcquisitionKind::EstLaplace, AcquisitionKind::ucb()]);
        spec.resolution = Some(8);
        let outcome = run_suite(&spec).unwrap();
        assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
        assert_eq!(outcome.runs.len(), 2);
    }
}

#[test]
fn suite_spec_validation() {
    let mut spec = small_suite(vec![AcquisitionKind::ucb()]);
    spec.n_functions = 0;
    assert!(run_suite(&spec).is_err());
    let mut spec = small_suite(vec![]);
    spec.n_functions = 1;
    assert!(run_suite(&spec).is_err());
}
