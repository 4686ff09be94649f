mod common;

use cirbo::gp::{Dataset, KernelFamily, KernelSpec, Posterior, SparseModel};
use cirbo::stats::median;
use common::random_points;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn predict_ms(q: usize, m: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(q as u64 * 31 + m as u64);
    let k = KernelSpec::isotropic(KernelFamily::Matern52, 4, 0.3, 1.0, 0.1).unwrap();
    let x = random_points(600, 4, &mut rng);
    let y: Vec<f64> = x.rows().map(|r| r.iter().sum::<f64>().sin()).collect();
    let z = x.select(&(0..m).collect::<Vec<_>>());
    let model = SparseModel::fit(&Dataset::new(x, y).unwrap(), &z, &k).unwrap();
    let queries = random_points(q, 4, &mut rng);
    let times: Vec<f64> = (0..5)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(model.predict(&queries).unwrap());
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    median(&times)
}

#[test]
fn prediction_cost_scales_with_queries_and_inducing_squared() {
    let q_ratio = predict_ms(4000, 150) / predict_ms(2000, 150);
    let m_ratio = predict_ms(2000, 300) / predict_ms(2000, 150);
    println!("doubling Q: x{q_ratio:.2}, doubling M: x{m_ratio:.2}");
    assert!((2.0 / 1.6..=2.0 * 1.6).contains(&q_ratio), "Q ratio {q_ratio}");
    assert!((4.0 / 1.6..=4.0 * 1.6).contains(&m_ratio), "M ratio {m_ratio}");
}
