use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Placement, PlacementContext, PlacementStrategy};
use crate::error::Result;
use crate::points::Points;

/// Centroids of Lloyd's k-means on inputs rescaled to the unit box.
#[derive(Debug, Clone, Copy)]
pub struct KMeans {
    pub max_iter: usize,
}

impl Default for KMeans {
    fn default() -> Self {
        KMeans { max_iter: 50 }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding. Returns `k` centroids.
pub fn kmeans<R: Rng + ?Sized>(data: &Points, k: usize, max_iter: usize, rng: &mut R) -> Points {
    let n = data.len();
    let d = data.dim();
    let k = k.min(n);

    let mut centroids = Points::new(d);
    centroids.push(data.row(rng.random_range(0..n))).expect("same dim");
    let mut nearest: Vec<f64> = data.rows().map(|r| sq_dist(r, centroids.row(0))).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in nearest.iter().enumerate() {
                if t < *w {
                    chosen = i;
                    break;
                }
                t -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.push(data.row(pick)).expect("same dim");
        let c = centroids.len() - 1;
        for (i, r) in data.rows().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(r, centroids.row(c)));
        }
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, r) in data.rows().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(r, centroids.row(a)).total_cmp(&sq_dist(r, centroids.row(b))))
                .expect("k >= 1");
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, r) in data.rows().enumerate() {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i] * d..(assign[i] + 1) * d].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            // empty clusters keep their previous centroid
            if counts[c] > 0 {
                for (t, s) in centroids.row_mut(c).iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                    *t = s / counts[c] as f64;
                }
            }
        }
    }
    centroids
}

impl PlacementStrategy for KMeans {
    fn name(&self) -> &'static str {
        "kmeans"
    }

    fn place(&self, ctx: &PlacementContext, m: usize, rng: &mut ChaCha8Rng) -> Result<Placement> {
        let mut unit = Points::new(ctx.inputs.dim());
        for r in ctx.inputs.rows() {
            unit.push(&ctx.bounds.to_unit(r))?;
        }
        let centroids = kmeans(&unit, m, self.max_iter, rng);
        let mut inducing = Points::new(ctx.inputs.dim());
        for c in centroids.rows() {
            inducing.push(&ctx.bounds.from_unit(c))?;
        }
        Ok(Placement { inducing, indices: None, used_all: false, warnings: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn separated_clusters_are_found() {
        let mut rows = Vec::new();
        for c in [[0.1, 0.1], [0.9, 0.9], [0.1, 0.9]] {
            for i in 0..10 {
                let e = i as f64 * 0.002;
                rows.push([c[0] + e, c[1] - e]);
            }
        }
        let data = Points::from_rows(&rows).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cs = kmeans(&data, 3, 50, &mut rng);
        let mut xs: Vec<(f64, f64)> = cs.rows().map(|r| (r[0], r[1])).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((xs[0].0 - 0.109).abs() < 1e-9 && (xs[0].1 - 0.091).abs() < 1e-9);
        assert!((xs[2].0 - 0.909).abs() < 1e-9);
    }
}
