mod common;

use cirbo::benchmarks::objective;
use cirbo::gp::{Dataset, ExactGp, KernelFamily, KernelSpec, Posterior, SparseModel};
use cirbo::maxvalue::{fit_gumbel, gumbel_sample_maxima, ig_of_gamma, moment_match, pointwise_ig};
use cirbo::points::{Bounds, Points};
use cirbo::stats::{mean, sample_sd};
use cirbo::thompson::{draw_sample, maximize_sample, propose_batch, FourierBasis};
use common::random_points;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, Normal, StandardNormal};
use std::time::Instant;

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn toy_posterior(d: usize, lengthscale: f64) -> (ExactGp, Points) {
    let k = KernelSpec::isotropic(KernelFamily::SquaredExponential, d, lengthscale, 1.0, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_points(8, d, &mut rng);
    let y: Vec<f64> = x.rows().map(|r| (5.0 * r[0]).sin()).collect();
    let gp = ExactGp::fit(&Dataset::new(x, y).unwrap(), &k).unwrap();
    (gp, random_points(50, d, &mut rng))
}

/// Gumbel samples and brute-force joint maxima on the grid.
fn maxima_pair(d: usize, lengthscale: f64) -> (Vec<f64>, Vec<f64>) {
    let (gp, grid) = toy_posterior(d, lengthscale);
    let (mu, cov) = gp.predict_covariance(&grid).unwrap();
    let sds: Vec<f64> = (0..50).map(|i| cov[(i, i)].max(1e-12).sqrt()).collect();
    let l = (cov + DMatrix::identity(50, 50) * 1e-9).cholesky().unwrap().l();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let brute: Vec<f64> = (0..2000)
        .map(|_| {
            let z = nalgebra::DVector::from_iterator(50, (0..50).map(|_| StandardNormal.sample(&mut rng)));
            let f = &l * z;
            (0..50).map(|i| mu[i] + f[i]).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (gumbel_sample_maxima(&mu, &sds, 2000, 2).unwrap(), brute)
}

#[test]
fn gumbel_matches_brute_force_maxima_on_a_weakly_correlated_grid() {
    let (gumbel, brute) = maxima_pair(2, 0.05);
    let d = ks_distance(gumbel, brute);
    assert!(d <= 0.15, "KS distance {d}");
}

#[test]
fn gumbel_overstates_maxima_of_a_strongly_correlated_grid() {
    let (gumbel, brute) = maxima_pair(1, 0.15);
    let d = ks_distance(gumbel.clone(), brute.clone());
    println!("strongly correlated grid: KS distance {d:.3}");
    assert!(cirbo::stats::median(&gumbel) > cirbo::stats::median(&brute));
}

#[test]
fn gumbel_fit_is_exact_at_the_median_anchor() {
    for (d, l) in [(1, 0.05), (1, 0.3), (2, 0.1)] {
        let (gp, grid) = toy_posterior(d, l);
        let p = gp.predict(&grid).unwrap();
        let fit = fit_gumbel(&p.mean, &p.sd()).unwrap();
        assert!((fit.cdf(fit.anchors[1]) - 0.5).abs() < 1e-6);
        // two parameters cannot pass through all three anchors
        assert!((fit.cdf(fit.anchors[0]) - 0.25).abs() < 0.05);
        assert!((fit.cdf(fit.anchors[2]) - 0.75).abs() < 0.05);
    }
}

#[test]
fn gumbel_moments_by_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Gumbel::new(0.0, 1.0).unwrap();
    let draws: Vec<f64> = (0..100_000).map(|_| g.sample(&mut rng)).collect();
    let m = moment_match(&draws, 1e-6).unwrap();
    assert!((m.mu_star - 0.5772).abs() < 0.02, "{}", m.mu_star);
    assert!((m.sigma_star - 1.2825).abs() < 0.02, "{}", m.sigma_star);
}

#[test]
fn dominant_marginal_sets_the_maximum() {
    let mut means = vec![0.0; 20];
    means[0] = 100.0;
    let s = gumbel_sample_maxima(&means, &[1.0; 20], 1000, 3).unwrap();
    assert!((mean(&s) - 100.0).abs() < 0.5);
}

#[test]
fn moment_matched_information_tracks_sample_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let samples: Vec<f64> = Normal::new(1.0, 0.1).unwrap().sample_iter(&mut rng).take(2000).collect();
    let m = moment_match(&samples, 1e-6).unwrap();
    let mu = m.mu_star;
    let skew = samples.iter().map(|s| ((s - mu) / m.sigma_star).powi(3)).sum::<f64>() / samples.len() as f64;
    assert!(skew.abs() < 0.2);
    for mean_z in [-0.5, 0.0, 0.5, 0.9, 1.2] {
        for sd_z in [0.5, 1.0, 2.0] {
            let moment = pointwise_ig(mean_z, sd_z, &m).unwrap();
            let average = samples.iter().map(|f| ig_of_gamma((f - mean_z) / sd_z)).sum::<f64>() / samples.len() as f64;
            assert!((moment - average).abs() <= (0.1 * average).max(2e-3), "mean {mean_z} sd {sd_z}: {moment} vs {average}");
        }
    }
}

#[test]
fn prior_samples_have_prior_moments() {
    let k = KernelSpec::isotropic(KernelFamily::Matern52, 2, 0.3, 1.5, 0.1).unwrap();
    let model = SparseModel::from_prior(&Points::from_rows(&[[0.5, 0.5], [0.2, 0.9]]).unwrap(), &k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = [0.31, 0.77];
    let vals: Vec<f64> = (0..2000)
        .map(|_| {
            let basis = FourierBasis::sample(&k, 100, &mut rng).unwrap();
            draw_sample(&model, basis, &mut rng).unwrap().value(&x)
        })
        .collect();
    assert!(mean(&vals).abs() < 0.1, "mean {}", mean(&vals));
    let var = sample_sd(&vals).powi(2);
    assert!((var / k.signal_variance - 1.0).abs() < 0.1, "variance {var}");
}

#[test]
fn samples_interpolate_a_confident_posterior() {
    let k = KernelSpec::isotropic(KernelFamily::SquaredExponential, 1, 0.2, 1.0, 1e-4).unwrap();
    let z = Points::from_rows(&[[0.1], [0.3], [0.5], [0.7], [0.9]]).unwrap();
    let mut x = Points::new(1);
    let mut y = Vec::new();
    for _ in 0..10 {
        for (i, r) in z.rows().enumerate() {
            x.push(r).unwrap();
            y.push((i as f64 - 2.0) * 0.4);
        }
    }
    let model = SparseModel::fit(&Dataset::new(x, y).unwrap(), &z, &k).unwrap();
    let p = model.predict(&z).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let s = draw_sample(&model, FourierBasis::sample(&k, 100, &mut rng).unwrap(), &mut rng).unwrap();
        for (i, r) in z.rows().enumerate() {
            let sd = p.variance[i].sqrt();
            assert!((s.value(r) - p.mean[i]).abs() <= 3.0 * sd, "point {i}: {} vs {} (sd {sd})", s.value(r), p.mean[i]);
        }
    }
}

#[test]
fn sample_covariance_matches_predictive_covariance() {
    let k = KernelSpec::isotropic(KernelFamily::SquaredExponential, 1, 0.3, 1.0, 0.05).unwrap();
    let x = Points::from_rows(&[[0.05], [0.15], [0.25], [0.35]]).unwrap();
    let model = SparseModel::fit(&Dataset::new(x.clone(), vec![0.5, 0.8, 0.3, -0.1]).unwrap(), &x, &k).unwrap();
    let q = Points::from_rows(&[[0.6], [0.65], [0.7], [0.75], [0.8]]).unwrap();
    let (_, cov) = model.predict_covariance(&q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let draws: Vec<Vec<f64>> = (0..5000)
        .map(|_| draw_sample(&model, FourierBasis::sample(&k, 100, &mut rng).unwrap(), &mut rng).unwrap().values(&q))
        .collect();
    let means: Vec<f64> = (0..5).map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / 5000.0).collect();
    for i in 0..5 {
        for j in 0..5 {
            let emp = draws.iter().map(|d| (d[i] - means[i]) * (d[j] - means[j])).sum::<f64>() / 4999.0;
            let want = cov[(i, j)];
            assert!((emp - want).abs() <= 0.15 * want.abs().max(1e-3), "({i},{j}): {emp} vs {want}");
        }
    }
}

#[test]
fn maximisation_never_loses_to_probes() {
    let k = KernelSpec::isotropic(KernelFamily::Matern52, 3, 0.2, 1.0, 0.01).unwrap();
    let model = SparseModel::from_prior(&Points::from_rows(&[[0.5; 3]]).unwrap(), &k).unwrap();
    let bounds = Bounds::unit(3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..10 {
        let s = draw_sample(&model, FourierBasis::sample(&k, 100, &mut rng).unwrap(), &mut rng).unwrap();
        let (x, v) = maximize_sample(&s, &bounds, seed);
        assert!(bounds.contains(&x));
        let mut probe_rng = ChaCha8Rng::seed_from_u64(seed);
        let probe_best = (0..1000).map(|_| s.value(&bounds.sample(&mut probe_rng))).fold(f64::NEG_INFINITY, f64::max);
        assert!(v >= probe_best - 1e-12, "{v} < {probe_best}");
        assert!((s.value(&x) - v).abs() < 1e-12);
    }
}

#[test]
fn hartmann_batch_of_one_hundred() {
    let h = objective("hartmann6").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random_points(500, 6, &mut rng);
    let y: Vec<f64> = x.rows().map(|r| h.value(r)).collect();
    let k = KernelSpec::isotropic(KernelFamily::Matern52, 6, 0.3, 1.0, 0.1).unwrap();
    let z = x.select(&(0..250).map(|i| 2 * i).collect::<Vec<_>>());
    let model = SparseModel::fit(&Dataset::new(x, y).unwrap(), &z, &k).unwrap();
    let bounds = Bounds::unit(6);
    let start = Instant::now();
    let batch = propose_batch(&model, &bounds, 100, 100, 9).unwrap();
    println!("B=100, F=100, M=250 batch in {:.2?}", start.elapsed());
    assert_eq!(batch.len(), 100);
    assert!(batch.rows().all(|r| bounds.contains(r)));
}
