//! Stationary covariance functions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::Points;

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    SquaredExponential,
    #[serde(rename = "matern-5/2")]
    Matern52,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "squared-exponential",
            KernelFamily::Matern52 => "matern-5/2",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared-exponential" | "se" | "rbf" => Ok(KernelFamily::SquaredExponential),
            "matern-5/2" | "matern52" => Ok(KernelFamily::Matern52),
            other => Err(Error::Unknown { kind: "kernel family", name: other.to_string() }),
        }
    }
}

/// Kernel hyperparameters: ARD lengthscales, signal variance and the
/// Gaussian observation-noise variance of the likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn new(
        family: KernelFamily,
        lengthscales: Vec<f64>,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let k = KernelSpec { family, lengthscales, signal_variance, noise_variance };
        k.validate()?;
        Ok(k)
    }

    /// Isotropic kernel with the same lengthscale in every dimension.
    pub fn isotropic(
        family: KernelFamily,
        dim: usize,
        lengthscale: f64,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        Self::new(family, vec![lengthscale; dim], signal_variance, noise_variance)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(Error::Precondition("kernel needs at least one lengthscale".into()));
        }
        if !self.lengthscales.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::Precondition("lengthscales must be positive and finite".into()));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(Error::Precondition("signal variance must be positive".into()));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::Precondition("noise variance must be non-negative".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    #[inline]
    fn scaled_sq_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| {
                let t = (x - y) / l;
                t * t
            })
            .sum()
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2 = self.scaled_sq_dist(a, b);
        self.signal_variance * self.profile(r2)
    }

    /// Correlation as a function of the squared scaled distance.
    #[inline]
    fn profile(&self, r2: f64) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * (-SQRT5 * r).exp()
            }
        }
    }

    /// Row-major copy of `p` with every coordinate divided by its lengthscale.
    pub(crate) fn prescale(&self, p: &Points) -> Vec<f64> {
        p.rows()
            .flat_map(|r| r.iter().zip(&self.lengthscales).map(|(x, l)| x / l))
            .collect()
    }

    /// Kernel value between two points produced by [`KernelSpec::prescale`].
    #[inline]
    pub(crate) fn eval_prescaled(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.signal_variance * self.profile(r2)
    }

    /// Adds `scale * d k(x, z) / dx` into `grad`.
    pub fn accumulate_grad_x(&self, x: &[f64], z: &[f64], scale: f64, grad: &mut [f64]) {
        let r2 = self.scaled_sq_dist(x, z);
        // common factor c such that dk/dx_k = c * (x_k - z_k) / l_k^2
        let c = match self.family {
            KernelFamily::SquaredExponential => -self.signal_variance * (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                -self.signal_variance * 5.0 / 3.0 * (1.0 + SQRT5 * r) * (-SQRT5 * r).exp()
            }
        };
        for k in 0..x.len() {
            let l = self.lengthscales[k];
            grad[k] += scale * c * (x[k] - z[k]) / (l * l);
        }
    }

    /// Prior variance `k(x, x)`; constant for stationary kernels.
    #[inline]
    pub fn diag(&self) -> f64 {
        self.signal_variance
    }

    fn check_points(&self, p: &Points) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        if !p.all_finite() {
            return Err(Error::NonFinite("kernel input"));
        }
        Ok(())
    }

    /// Cross-covariance matrix `[k(a_i, b_j)]`.
    pub fn gram(&self, a: &Points, b: &Points) -> Result<DMatrix<f64>> {
        self.check_points(a)?;
        self.check_points(b)?;
        Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval(a.row(i), b.row(j))))
    }

    /// Symmetric Gram matrix of one point set.
    pub fn gram_sym(&self, a: &Points) -> Result<DMatrix<f64>> {
        self.check_points(a)?;
        let n = a.len();
        let mut k = DMatrix::zeros(n, n);
        for j in 0..n {
            k[(j, j)] = self.signal_variance;
            for i in (j + 1)..n {
                let v = self.eval(a.row(i), a.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Vector `[k(z_i, x)]`.
    pub fn cross(&self, z: &Points, x: &[f64]) -> Vec<f64> {
        z.rows().map(|r| self.eval(r, x)).collect()
    }

    /// Log-space parameter vector `[log l_1..d, log s2, log noise]`.
    pub fn to_log_params(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lengthscales.iter().map(|l| l.ln()).collect();
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.max(f64::MIN_POSITIVE).ln());
        v
    }

    pub fn from_log_params(&self, p: &[f64]) -> KernelSpec {
        let d = self.dim();
        KernelSpec {
            family: self.family,
            lengthscales: p[..d].iter().map(|v| v.exp()).collect(),
            signal_variance: p[d].exp(),
            noise_variance: p[d + 1].exp(),
        }
    }
}
