//! Max-value sampling and the per-point information gain it induces.
//!
//! The maximum of the surrogate on a finite grid is approximated by the
//! product of marginal CDFs; a Gumbel distribution is fitted through its
//! quartiles and sampled. The samples are then moment-matched to a Gaussian,
//! which gives a closed-form information gain for each candidate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dpp::QualityWeights;
use crate::error::{Error, Result};
use crate::stats::{log_norm_cdf, mean, sample_sd, LN_SQRT_2PI};

const QUANTILE_TOLERANCE: f64 = 1e-6;

/// Gaussian summary of sampled maximum values.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxValueMoments {
    pub mu_star: f64,
    pub sigma_star: f64,
    pub raw_samples: Vec<f64>,
}

/// Which standardization enters the information gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaConvention {
    /// `(mu_star - mean_z) / sd_z`: high predicted means carry more information.
    #[default]
    MaxValue,
    /// `(mean_z - mu_star) / sigma_star`, kept for ablations.
    Literal,
}

/// Gumbel distribution fitted through three quantiles of the max-value CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelFit {
    pub location: f64,
    pub scale: f64,
    /// Quantiles of the product-of-marginals CDF at 0.25, 0.5 and 0.75.
    pub anchors: [f64; 3],
}

impl GumbelFit {
    pub fn cdf(&self, y: f64) -> f64 {
        (-(-(y - self.location) / self.scale).exp()).exp()
    }

    pub fn quantile(&self, r: f64) -> f64 {
        self.location - self.scale * (-r.ln()).ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> Vec<f64> {
        (0..s)
            .map(|_| {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                self.quantile(u)
            })
            .collect()
    }
}

fn log_max_cdf(y: f64, means: &[f64], sds: &[f64]) -> f64 {
    means.iter().zip(sds).map(|(m, s)| log_norm_cdf((y - m) / s)).sum()
}

fn bisect_quantile(r: f64, means: &[f64], sds: &[f64], mut lo: f64, mut hi: f64) -> Result<f64> {
    let target = r.ln();
    let bracketed = |lo: f64, hi: f64| {
        log_max_cdf(lo, means, sds) <= target && log_max_cdf(hi, means, sds) >= target
    };
    if !bracketed(lo, hi) {
        let span = hi - lo;
        lo -= span;
        hi += span;
        if !bracketed(lo, hi) {
            return Err(Error::Bracket { level: r });
        }
    }
    for _ in 0..200 {
        if hi - lo <= QUANTILE_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if log_max_cdf(mid, means, sds) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fits the Gumbel approximation to `max_i f_i` for independent
/// `f_i ~ N(means_i, sds_i^2)`.
pub fn fit_gumbel(means: &[f64], sds: &[f64]) -> Result<GumbelFit> {
    if means.len() < 2 || means.len() != sds.len() {
        return Err(Error::Precondition("need at least two marginals with matching sds".into()));
    }
    if !sds.iter().all(|s| s.is_finite() && *s > 0.0) || !means.iter().all(|m| m.is_finite()) {
        return Err(Error::Precondition("marginal sds must be positive and means finite".into()));
    }
    let max_sd = sds.iter().cloned().fold(0.0, f64::max);
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min) - 5.0 * max_sd;
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 5.0 * max_sd;
    let y25 = bisect_quantile(0.25, means, sds, lo, hi)?;
    let y50 = bisect_quantile(0.5, means, sds, lo, hi)?;
    let y75 = bisect_quantile(0.75, means, sds, lo, hi)?;
    let ll = |r: f64| (-r.ln()).ln();
    let scale = ((y75 - y25) / (ll(0.25) - ll(0.75))).max(f64::MIN_POSITIVE);
    let location = y50 + scale * ll(0.5);
    Ok(GumbelFit { location, scale, anchors: [y25, y50, y75] })
}

/// Draws `s` approximate samples of the maximum value.
pub fn gumbel_sample_maxima(means: &[f64], sds: &[f64], s: usize, seed: u64) -> Result<Vec<f64>> {
    let fit = fit_gumbel(means, sds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(fit.sample(s, &mut rng))
}

/// Gaussian moments of max-value samples; `sd_floor` bounds the spread below.
pub fn moment_match(samples: &[f64], sd_floor: f64) -> Result<MaxValueMoments> {
    if samples.len() < 2 {
        return Err(Error::Precondition("moment matching needs at least two samples".into()));
    }
    let sigma = sample_sd(samples);
    Ok(MaxValueMoments {
        mu_star: mean(samples),
        sigma_star: if sigma.is_finite() { sigma.max(sd_floor) } else { sd_floor },
        raw_samples: samples.to_vec(),
    })
}

/// `g(gamma) = gamma phi(gamma) / (2 Phi(gamma)) - log Phi(gamma)`.
pub fn ig_of_gamma(gamma: f64) -> f64 {
    let log_cdf = log_norm_cdf(gamma);
    let ratio = (-0.5 * gamma * gamma - LN_SQRT_2PI - log_cdf).exp();
    let g = 0.5 * gamma * ratio - log_cdf;
    if gamma == f64::INFINITY {
        return 0.0;
    }
    g.max(0.0)
}

pub fn gamma_of(mean_z: f64, sd_z: f64, moments: &MaxValueMoments, convention: GammaConvention) -> f64 {
    match convention {
        GammaConvention::MaxValue => (moments.mu_star - mean_z) / sd_z,
        GammaConvention::Literal => (mean_z - moments.mu_star) / moments.sigma_star,
    }
}

/// Moment-matched information gain of an observation at `z` about `f*`.
pub fn pointwise_ig(mean_z: f64, sd_z: f64, moments: &MaxValueMoments) -> Result<f64> {
    pointwise_ig_with(mean_z, sd_z, moments, GammaConvention::MaxValue)
}

pub fn pointwise_ig_with(
    mean_z: f64,
    sd_z: f64,
    moments: &MaxValueMoments,
    convention: GammaConvention,
) -> Result<f64> {
    if sd_z.is_nan() || sd_z <= 0.0 {
        return Err(Error::Precondition("predictive sd must be positive".into()));
    }
    Ok(ig_of_gamma(gamma_of(mean_z, sd_z, moments, convention)))
}

/// Quality weights `log q_z = alpha IG_z / (2 M (1 - alpha)) - 1/2 log k(z,z)`.
pub fn quality_weights(
    means: &[f64],
    sds: &[f64],
    k_diag: &[f64],
    moments: &MaxValueMoments,
    alpha: f64,
    m: usize,
    convention: GammaConvention,
) -> Result<QualityWeights> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if m == 0 {
        return Err(Error::Precondition("inducing count must be positive".into()));
    }
    let n = means.len();
    if sds.len() != n || k_diag.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sds.len().min(k_diag.len()) });
    }
    if !k_diag.iter().all(|k| *k > 0.0) {
        return Err(Error::Precondition("prior variances must be positive".into()));
    }
    let weight = alpha / (2.0 * m as f64 * (1.0 - alpha));
    let log_q = (0..n)
        .map(|i| {
            let ig = pointwise_ig_with(means[i], sds[i], moments, convention)?;
            Ok(weight * ig - 0.5 * k_diag[i].ln())
        })
        .collect::<Result<Vec<_>>>()?;
    QualityWeights::new(log_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::norm_cdf;

    fn moments_at(mu: f64) -> MaxValueMoments {
        MaxValueMoments { mu_star: mu, sigma_star: 1.0, raw_samples: vec![] }
    }

    #[test]
    fn ig_at_zero_is_ln2() {
        let g = pointwise_ig(1.3, 0.7, &moments_at(1.3)).unwrap();
        assert!((g - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn ig_vanishes_far_below_max() {
        assert!(ig_of_gamma(6.0) < 1e-6);
        assert!(ig_of_gamma(-1.0) > ig_of_gamma(0.0));
        assert!(ig_of_gamma(-50.0).is_finite());
    }

    #[test]
    fn moment_match_cases() {
        let m = moment_match(&[1.0; 4], 1e-6).unwrap();
        assert_eq!(m.mu_star, 1.0);
        assert_eq!(m.sigma_star, 1e-6);
        let m = moment_match(&[0.0, 2.0], 1e-6).unwrap();
        assert_eq!(m.mu_star, 1.0);
        assert!((m.sigma_star - 2f64.sqrt()).abs() < 1e-15);
        assert!(moment_match(&[1.0], 1e-6).is_err());
    }

    #[test]
    fn two_identical_marginals_median() {
        // oracle: solve Phi(y)^2 = 0.5 by bisection directly
        let (mut lo, mut hi) = (-5.0f64, 5.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_cdf(mid).powi(2) < 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let fit = fit_gumbel(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((fit.anchors[1] - lo).abs() < 1e-6);
        assert!((lo - 0.5449).abs() < 1e-4);
    }

    #[test]
    fn gumbel_fit_through_quartiles() {
        let means = [0.1, 0.5, -0.3, 0.9, 0.2];
        let sds = [0.3, 0.1, 0.6, 0.2, 0.4];
        let fit = fit_gumbel(&means, &sds).unwrap();
        // two parameters pin the median exactly and the quartile spread
        assert!((fit.cdf(fit.anchors[1]) - 0.5).abs() < 1e-6);
        let spread = fit.quantile(0.75) - fit.quantile(0.25);
        assert!((spread - (fit.anchors[2] - fit.anchors[0])).abs() < 1e-9);
        for (r, y) in [0.25, 0.75].iter().zip([fit.anchors[0], fit.anchors[2]]) {
            assert!((fit.cdf(y) - r).abs() < 0.03, "{} vs {r}", fit.cdf(y));
        }
    }

    #[test]
    fn dominant_marginal() {
        let mut means = vec![0.0; 20];
        means[0] = 100.0;
        let samples = gumbel_sample_maxima(&means, &[1.0; 20], 1000, 7).unwrap();
        let m = mean(&samples);
        assert!((m - 100.0).abs() < 0.5, "{m}");
    }

    #[test]
    fn quality_weight_formula() {
        let mom = moments_at(0.0);
        // IG = 0 (gamma very large), unit prior variance
        let q = quality_weights(&[-100.0], &[1.0], &[1.0], &mom, 0.5, 10, GammaConvention::MaxValue).unwrap();
        assert!(q.log_q()[0].abs() < 1e-12);
        // IG = ln 2
        let q = quality_weights(&[0.0], &[1.0], &[1.0], &mom, 0.5, 10, GammaConvention::MaxValue).unwrap();
        assert!((q.log_q()[0] - std::f64::consts::LN_2 / 20.0).abs() < 1e-12);
        assert!((q.log_q()[0] - 0.034657).abs() < 1e-6);
        let q = quality_weights(&[-100.0], &[1.0], &[4.0], &mom, 0.5, 10, GammaConvention::MaxValue).unwrap();
        assert!((q.log_q()[0] + 0.5 * 4f64.ln()).abs() < 1e-12);
        assert!(quality_weights(&[0.0], &[1.0], &[1.0], &mom, 1.0, 10, GammaConvention::MaxValue).is_err());
        assert!(quality_weights(&[0.0], &[1.0], &[1.0], &mom, 0.0, 10, GammaConvention::MaxValue).is_err());
    }
}
