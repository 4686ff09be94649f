//! Greedy MAP inference for quality-weighted determinantal point processes.
//!
//! The L-ensemble is `L = diag(q) K diag(q)`. Each greedy step adds the
//! candidate maximizing `1/2 log s2(z) + log q(z)`, where `s2(z)` is the
//! noise-free posterior variance of `z` given the points already chosen.
//! One Cholesky row per candidate is extended per step, giving `O(M^2 N)`
//! total work without refactorizing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gp::linalg::jittered_cholesky;
use crate::gp::KernelSpec;
use crate::points::Points;

/// Gains closer than this are ties; the lower index wins.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Conditional variances below this are treated as exhausted.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;
/// Enumeration limit for [`exhaustive_map`].
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Per-candidate log quality weights `log q_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityWeights {
    log_q: Vec<f64>,
}

impl QualityWeights {
    pub fn new(log_q: Vec<f64>) -> Result<Self> {
        if !log_q.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("quality weights"));
        }
        Ok(QualityWeights { log_q })
    }

    pub fn unit(n: usize) -> Self {
        QualityWeights { log_q: vec![0.0; n] }
    }

    pub fn log_q(&self) -> &[f64] {
        &self.log_q
    }

    pub fn len(&self) -> usize {
        self.log_q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_q.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected candidate indices in greedy order.
    pub indices: Vec<usize>,
    /// Marginal gain of each step.
    pub gains: Vec<f64>,
    /// `1/2 log |L_Z|`, the sum of `gains`.
    pub half_log_det: f64,
    /// Set when selection stopped early because every remaining candidate
    /// had vanishing conditional variance.
    pub degenerate: bool,
}

impl SelectionResult {
    pub fn log_det(&self) -> f64 {
        2.0 * self.half_log_det
    }
}

/// Greedy MAP of the (quality-weighted) DPP over `candidates`.
///
/// `quality = None` means unit quality, i.e. conditional variance reduction.
pub fn greedy_map(
    kernel: &KernelSpec,
    candidates: &Points,
    m: usize,
    quality: Option<&QualityWeights>,
) -> Result<SelectionResult> {
    let n = candidates.len();
    if candidates.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), got: candidates.dim() });
    }
    if m == 0 || m > n {
        return Err(Error::Precondition(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    if let Some(q) = quality {
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
    }
    if !candidates.all_finite() {
        return Err(Error::NonFinite("candidates"));
    }
    let log_q = |i: usize| quality.map_or(0.0, |q| q.log_q[i]);

    // Candidates are ranked by cond_var * q^2, which orders like the gain
    // 1/2 log cond_var + log q without a logarithm per candidate. Quality
    // spreads too wide for that product fall back to comparing gains.
    let max_lq = quality.map_or(0.0, |q| q.log_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let q2: Option<Vec<f64>> = quality.map(|q| q.log_q.iter().map(|l| (2.0 * (l - max_lq)).exp()).collect());
    let use_product = q2.as_ref().is_none_or(|v| v.iter().all(|x| *x > 1e-250));
    let tie_ratio = (2.0 * TIE_TOLERANCE).exp();

    let d = candidates.dim();
    let scaled = kernel.prescale(candidates);
    let point = |i: usize| &scaled[i * d..(i + 1) * d];

    let better = |i: usize, v: f64, best: Option<(usize, f64)>| -> Option<(usize, f64)> {
        if v < DEGENERATE_VARIANCE {
            return best;
        }
        if use_product {
            let s = v * q2.as_ref().map_or(1.0, |q| q[i]);
            match best {
                Some((_, bs)) if s <= bs * tie_ratio => best,
                _ => Some((i, s)),
            }
        } else {
            let g = 0.5 * v.ln() + log_q(i);
            match best {
                Some((_, bg)) if g <= bg + TIE_TOLERANCE => best,
                _ => Some((i, g)),
            }
        }
    };

    // rows[i * m .. i * m + step] is candidate i's row of the incremental factor
    let mut rows = vec![0.0; n * m];
    let mut cond_var: Vec<f64> = (0..n).map(|i| kernel.eval_prescaled(point(i), point(i))).collect();
    let mut chosen = vec![false; n];
    let mut indices = Vec::with_capacity(m);
    let mut gains = Vec::with_capacity(m);
    let mut degenerate = false;
    let mut row_j = vec![0.0; m];

    // the scan for the next pick is fused into each update sweep
    let mut best = (0..n).fold(None, |b, i| better(i, cond_var[i], b));
    for step in 0..m {
        let Some((j, _)) = best else {
            degenerate = true;
            break;
        };
        chosen[j] = true;
        indices.push(j);
        gains.push(0.5 * cond_var[j].ln() + log_q(j));
        if step + 1 == m {
            break;
        }

        let inv_e = 1.0 / cond_var[j].sqrt();
        let zj = point(j);
        row_j[..step].copy_from_slice(&rows[j * m..j * m + step]);
        let rj = &row_j[..step];
        best = None;
        for (i, row_i) in rows.chunks_exact_mut(m).enumerate() {
            if chosen[i] {
                continue;
            }
            let dot: f64 = rj.iter().zip(&row_i[..step]).map(|(a, b)| a * b).sum();
            let v = (kernel.eval_prescaled(zj, point(i)) - dot) * inv_e;
            row_i[step] = v;
            let c = (cond_var[i] - v * v).max(0.0);
            cond_var[i] = c;
            best = better(i, c, best);
        }
    }

    let half_log_det = gains.iter().sum();
    Ok(SelectionResult { indices, gains, half_log_det, degenerate })
}

/// Noise-free posterior variance of `z` given observations at `selected`,
/// clamped at zero.
pub fn conditional_variance(kernel: &KernelSpec, selected: &Points, z: &[f64]) -> Result<f64> {
    if z.len() != kernel.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), got: z.len() });
    }
    let prior = kernel.eval(z, z);
    if selected.is_empty() {
        return Ok(prior);
    }
    let kss = kernel.gram_sym(selected)?;
    let (ch, _) = jittered_cholesky(&kss, kernel.signal_variance)?;
    let ksz = DMatrix::from_vec(selected.len(), 1, kernel.cross(selected, z));
    let v = ch.l().solve_lower_triangular(&ksz).expect("non-zero diagonal");
    Ok((prior - v.norm_squared()).max(0.0))
}

/// `log |L_Z|` for `L = diag(q) K diag(q)` restricted to `subset`.
pub fn subset_log_det(
    kernel: &KernelSpec,
    candidates: &Points,
    subset: &[usize],
    quality: Option<&QualityWeights>,
) -> Option<f64> {
    let q = |i: usize| quality.map_or(0.0, |w| w.log_q[i]).exp();
    let l = DMatrix::from_fn(subset.len(), subset.len(), |a, b| {
        let (i, j) = (subset[a], subset[b]);
        q(i) * kernel.eval(candidates.row(i), candidates.row(j)) * q(j)
    });
    let ch = l.cholesky()?;
    Some(2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact MAP by enumeration of all size-`m` subsets. Ties keep the
/// lexicographically first subset. Singular subsets are skipped.
pub fn exhaustive_map(
    kernel: &KernelSpec,
    candidates: &Points,
    m: usize,
    quality: Option<&QualityWeights>,
) -> Result<(Vec<usize>, f64)> {
    let n = candidates.len();
    if m == 0 || m > n {
        return Err(Error::Precondition(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    let subsets = binomial(n, m);
    if subsets > EXHAUSTIVE_LIMIT {
        return Err(Error::BudgetExceeded { subsets, limit: EXHAUSTIVE_LIMIT });
    }
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        if let Some(v) = subset_log_det(kernel, candidates, &idx, quality) {
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((idx.clone(), v));
            }
        }
        // next combination in lexicographic order
        let mut k = m;
        loop {
            if k == 0 {
                return best.ok_or(Error::SingularModel { jitter: 0.0 });
            }
            k -= 1;
            if idx[k] < n - m + k {
                idx[k] += 1;
                for t in k + 1..m {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn far_apart(n: usize) -> Points {
        let rows: Vec<[f64; 1]> = (0..n).map(|i| [i as f64 * 50.0]).collect();
        Points::from_rows(&rows).unwrap()
    }

    fn se(dim: usize, l: f64) -> KernelSpec {
        KernelSpec::isotropic(KernelFamily::SquaredExponential, dim, l, 1.0, 0.0).unwrap()
    }

    #[test]
    fn independent_candidates_tie_break_to_lowest_index() {
        let r = greedy_map(&se(1, 1.0), &far_apart(5), 2, None).unwrap();
        assert_eq!(r.indices, vec![0, 1]);
        assert!(!r.degenerate);
    }

    #[test]
    fn quality_dominates_under_independence() {
        let q = QualityWeights::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = greedy_map(&se(1, 1.0), &far_apart(4), 1, Some(&q)).unwrap();
        assert_eq!(r.indices, vec![1]);
        assert!((r.gains[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_greater_than_n_is_rejected() {
        assert!(greedy_map(&se(1, 1.0), &far_apart(3), 4, None).is_err());
    }

    #[test]
    fn duplicates_stop_early_with_flag() {
        let pts = Points::from_rows(&[[0.5], [0.5], [0.5]]).unwrap();
        let r = greedy_map(&se(1, 1.0), &pts, 3, None).unwrap();
        assert_eq!(r.indices, vec![0]);
        assert!(r.degenerate);
    }

    #[test]
    fn gains_telescope_and_decrease() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<[f64; 2]> = (0..30).map(|_| [rng.random(), rng.random()]).collect();
        let pts = Points::from_rows(&rows).unwrap();
        let k = se(2, 0.3);
        let r = greedy_map(&k, &pts, 8, None).unwrap();
        for w in r.gains.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let direct = subset_log_det(&k, &pts, &r.indices, None).unwrap();
        assert!((r.log_det() - direct).abs() < 1e-8);
    }

    #[test]
    fn conditional_variance_edge_cases() {
        let k = se(1, 0.5);
        assert_eq!(conditional_variance(&k, &Points::new(1), &[0.2]).unwrap(), 1.0);
        let s = Points::from_rows(&[[0.2], [0.9]]).unwrap();
        assert!(conditional_variance(&k, &s, &[0.2]).unwrap() <= 1e-8);
    }

    #[test]
    fn exhaustive_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<[f64; 2]> = (0..5).map(|_| [rng.random(), rng.random()]).collect();
        let pts = Points::from_rows(&rows).unwrap();
        let k = se(2, 0.4);
        let q = QualityWeights::new((0..5).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap();

        let (idx, v) = exhaustive_map(&k, &pts, 5, Some(&q)).unwrap();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert!((v - subset_log_det(&k, &pts, &idx, Some(&q)).unwrap()).abs() < 1e-12);

        let (idx, _) = exhaustive_map(&k, &pts, 1, Some(&q)).unwrap();
        let arg = (0..5)
            .max_by(|&a, &b| (2.0 * q.log_q()[a]).total_cmp(&(2.0 * q.log_q()[b])))
            .unwrap();
        assert_eq!(idx, vec![arg]);
    }

    #[test]
    fn exhaustive_budget() {
        let rows: Vec<[f64; 1]> = (0..40).map(|i| [i as f64]).collect();
        let pts = Points::from_rows(&rows).unwrap();
        assert!(matches!(
            exhaustive_map(&se(1, 1.0), &pts, 20, None),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
