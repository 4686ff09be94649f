#![allow(dead_code)]

use cirbo::dpp::{conditional_variance, QualityWeights};
use cirbo::gp::{KernelFamily, KernelSpec};
use cirbo::points::{Bounds, Points};
use nalgebra::DMatrix;
use rand::Rng;

pub fn random_points<R: Rng>(n: usize, d: usize, rng: &mut R) -> Points {
    Bounds::unit(d).sample_points(n, rng)
}

pub fn random_kernel<R: Rng>(d: usize, rng: &mut R) -> KernelSpec {
    let family = if rng.random::<bool>() { KernelFamily::SquaredExponential } else { KernelFamily::Matern52 };
    let lengthscales = (0..d).map(|_| 0.1 + 0.6 * rng.random::<f64>()).collect();
    KernelSpec::new(family, lengthscales, 0.5 + 2.0 * rng.random::<f64>(), 0.0).unwrap()
}

pub fn random_quality<R: Rng>(n: usize, rng: &mut R) -> QualityWeights {
    QualityWeights::new((0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap()
}

/// Sequential argmax of the noise-free conditional variance, recomputed
/// from scratch at every step. Ties go to the lowest index.
pub fn sequential_variance_oracle(kernel: &KernelSpec, cands: &Points, m: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..m {
        let sel = cands.select(&chosen);
        let mut best: Option<(usize, f64)> = None;
        for i in 0..cands.len() {
            if chosen.contains(&i) {
                continue;
            }
            let v = conditional_variance(kernel, &sel, cands.row(i)).unwrap();
            let g = 0.5 * v.ln();
            if best.is_none_or(|(_, b)| g > b + 1e-12) {
                best = Some((i, g));
            }
        }
        chosen.push(best.unwrap().0);
    }
    chosen
}

/// `log det` of a symmetric positive-definite matrix via LU.
pub fn dense_log_det(a: &DMatrix<f64>) -> f64 {
    let lu = a.clone().lu();
    lu.u().diagonal().iter().map(|v| v.abs().ln()).sum()
}

pub fn weighted_gram(kernel: &KernelSpec, cands: &Points, subset: &[usize], log_q: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(subset.len(), subset.len(), |a, b| {
        let (i, j) = (subset[a], subset[b]);
        (log_q[i] + log_q[j]).exp() * kernel.eval(cands.row(i), cands.row(j))
    })
}
