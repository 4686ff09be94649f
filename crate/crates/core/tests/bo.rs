use cirbo::benchmarks::objective;
use cirbo::bo::{believed_best, fit_surrogate, initial_kernel, run, ExperimentConfig, Standardizer};
use cirbo::gp::{Dataset, ExactGp, SparseModel};
use cirbo::placement::PlacementConfig;
use cirbo::points::Points;

fn config(objective: &str, strategy: &str, m: usize, total: usize, b: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(objective, total, b, PlacementConfig::new(strategy, m));
    c.hyper_budget = 20;
    c.features = 50;
    c
}

#[test]
fn every_budgeted_evaluation_is_spent_once() {
    for (total, b) in [(6, 2), (12, 3), (40, 10)] {
        let r = run(&config("log_goldstein_price", "cir", 5, total, b), 1).unwrap();
        assert!(r.error.is_none(), "{:?}", r.error);
        assert_eq!(r.queries.len(), total);
        let ns: Vec<usize> = r.steps.iter().map(|s| s.n).collect();
        assert_eq!(ns, (1..=total / b).map(|k| k * b).collect::<Vec<_>>());
        for (k, q) in r.queries.iter().enumerate() {
            assert_eq!(q.step, k / b);
        }
        assert!(r.steps.iter().all(|s| s.simple_regret >= -1e-6));
    }
}

#[test]
fn runs_repeat_exactly() {
    for strategy in ["cir", "cvr", "kmeans", "uniform", "exact"] {
        let c = config("shekel4", strategy, 8, 30, 10);
        let a = run(&c, 42).unwrap();
        let b = run(&c, 42).unwrap();
        assert_eq!(a.queries, b.queries, "{strategy}");
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!((x.step, x.n), (y.step, y.n));
            assert_eq!(x.believed_best_value.to_bits(), y.believed_best_value.to_bits(), "{strategy}");
            assert_eq!(x.simple_regret.to_bits(), y.simple_regret.to_bits(), "{strategy}");
        }
        let c = run(&c, 43).unwrap();
        assert_ne!(a.queries, c.queries);
    }
}

#[test]
fn oversized_inducing_budget_uses_all_points_throughout() {
    for strategy in ["cir", "cvr", "kmeans", "uniform"] {
        let r = run(&config("toy1d", strategy, 50, 20, 4), 3).unwrap();
        assert!(r.error.is_none());
        for (s, d) in r.steps.iter().zip(&r.details) {
            assert!(d.used_all, "{strategy}");
            assert_eq!(d.inducing, s.n);
        }
    }
}

#[test]
fn sparse_with_all_inputs_matches_exact_baseline() {
    let c = config("log_goldstein_price", "exact", 1, 120, 20);
    let r = run(&c, 5).unwrap();
    assert!(r.error.is_none());
    let obj = objective("log_goldstein_price").unwrap();
    let bounds = &obj.spec().bounds;
    for (s, step) in r.steps.iter().enumerate() {
        let rows: Vec<Vec<f64>> = r.queries[..step.n].iter().map(|q| bounds.to_unit(&q.x)).collect();
        let x = Points::from_rows(&rows).unwrap();
        let raw: Vec<f64> = r.queries[..step.n].iter().map(|q| q.y).collect();
        let st = Standardizer::fit(&raw);
        let data = Dataset::new(x.clone(), st.apply(&raw)).unwrap();
        let kernel = &r.details[s].kernel;

        let exact = believed_best(&ExactGp::fit(&data, kernel).unwrap(), &x).unwrap();
        let sparse = believed_best(&SparseModel::fit(&data, &x, kernel).unwrap(), &x).unwrap();
        assert!((st.invert(exact.1) - step.believed_best_value).abs() < 1e-9);
        assert!((st.invert(sparse.1) - step.believed_best_value).abs() < 1e-4, "step {s}");

        // the sparse path refits its own hyperparameters from the same warm start
        let init = if s == 0 { initial_kernel(c.kernel, 2) } else { r.details[s - 1].kernel.clone() };
        let (model, _) = fit_surrogate(&data, &x, &init, c.hyper_budget, false).unwrap();
        let refit = believed_best(model.as_ref(), &x).unwrap();
        assert!((st.invert(refit.1) - step.believed_best_value).abs() < 1e-4, "refit step {s}");
    }
}

#[test]
fn hartmann_desk_run_stays_within_range() {
    let mut c = config("hartmann6", "cir", 32, 200, 50);
    c.features = 100;
    let r = run(&c, 0).unwrap();
    assert!(r.error.is_none());
    let last = r.final_regret().unwrap();
    assert!((-1e-6..3.33).contains(&last), "regret {last}");
}
