//! Collapsed variational sparse GP regression.
//!
//! With `Kuu = L L^T`, `A = L^{-1} Kuf / s` and `B = I + A A^T = LB LB^T`,
//! the optimal `q(u)` and the collapsed evidence lower bound have closed
//! forms. Fitting costs `O(M^2 N)` and prediction `O(M^2)` per query point.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use super::linalg::{jittered_cholesky, solve_lower, solve_lower_vec, solve_upper_t_vec};
use super::{standard_normals, Dataset, KernelSpec, Posterior, Prediction};
use crate::error::{Error, Result};
use crate::points::Points;

/// Smallest noise variance used by the sparse bound, relative to the signal
/// variance. The bound is undefined at zero noise.
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SparseModel {
    kernel: KernelSpec,
    inducing: Points,
    /// Cholesky factor of `Kuu + jitter I`.
    l_uu: DMatrix<f64>,
    /// Cholesky factor of `B`.
    l_b: DMatrix<f64>,
    /// `LB^{-1} A y / s`.
    c: DVector<f64>,
    jitter: f64,
    noise: f64,
    elbo: f64,
}

impl SparseModel {
    /// Fits the optimal variational posterior for fixed inducing inputs.
    pub fn fit(data: &Dataset, inducing: &Points, kernel: &KernelSpec) -> Result<Self> {
        kernel.validate()?;
        if inducing.is_empty() {
            return Err(Error::Precondition("at least one inducing point is required".into()));
        }
        if data.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch { expected: kernel.dim(), got: data.dim() });
        }
        Self::build(Some(data), inducing, kernel)
    }

    /// A model carrying no data: `q(u)` equals the prior `p(u)`.
    pub fn from_prior(inducing: &Points, kernel: &KernelSpec) -> Result<Self> {
        kernel.validate()?;
        Self::build(None, inducing, kernel)
    }

    fn build(data: Option<&Dataset>, inducing: &Points, kernel: &KernelSpec) -> Result<Self> {
        let m = inducing.len();
        let noise = kernel.noise_variance.max(NOISE_FLOOR * kernel.signal_variance);
        let sd = noise.sqrt();
        let kuu = kernel.gram_sym(inducing)?;
        let (chol, jitter) = jittered_cholesky(&kuu, kernel.signal_variance)?;
        let l_uu = chol.unpack();

        let (a, y) = match data {
            Some(d) => {
                let kuf = kernel.gram(inducing, &d.inputs)?;
                let a = solve_lower(&l_uu, &kuf) / sd;
                (a, DVector::from_column_slice(&d.targets))
            }
            None => (DMatrix::zeros(m, 0), DVector::zeros(0)),
        };
        let n = y.len() as f64;

        let aat = &a * a.transpose();
        let mut b = aat.clone();
        for i in 0..m {
            b[(i, i)] += 1.0;
        }
        let (chol_b, _) = jittered_cholesky(&b, 1.0)?;
        let l_b = chol_b.unpack();
        let c = solve_lower_vec(&l_b, &(&a * &y)) / sd;

        let elbo = if data.is_some() {
            let log_det_b: f64 = l_b.diagonal().iter().map(|v| v.ln()).sum();
            -0.5 * n * (2.0 * std::f64::consts::PI).ln()
                - log_det_b
                - 0.5 * n * noise.ln()
                - 0.5 * y.dot(&y) / noise
                + 0.5 * c.dot(&c)
                - 0.5 * n * kernel.signal_variance / noise
                + 0.5 * aat.trace()
        } else {
            0.0
        };

        Ok(SparseModel {
            kernel: kernel.clone(),
            inducing: inducing.clone(),
            l_uu,
            l_b,
            c,
            jitter,
            noise,
            elbo,
        })
    }

    /// Collapsed evidence lower bound on the log marginal likelihood.
    pub fn elbo(&self) -> f64 {
        self.elbo
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Noise variance actually used (after [`NOISE_FLOOR`]).
    pub fn effective_noise(&self) -> f64 {
        self.noise
    }

    pub fn inducing(&self) -> &Points {
        &self.inducing
    }

    pub fn num_inducing(&self) -> usize {
        self.inducing.len()
    }

    fn projections(&self, x: &Points) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let kus = self.kernel.gram(&self.inducing, x)?;
        let t1 = solve_lower(&self.l_uu, &kus);
        let t2 = solve_lower(&self.l_b, &t1);
        Ok((t1, t2))
    }

    /// Full predictive covariance of the latent function at `x`.
    pub fn predict_covariance(&self, x: &Points) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (t1, t2) = self.projections(x)?;
        let mean = (t2.transpose() * &self.c).as_slice().to_vec();
        let cov = self.kernel.gram_sym(x)? - t1.transpose() * &t1 + t2.transpose() * &t2;
        Ok((mean, cov))
    }

    /// Mean and covariance factor `R` of `q(u) = N(m, R R^T)`.
    pub fn inducing_posterior(&self) -> (DVector<f64>, DMatrix<f64>) {
        let r = &self.l_uu
            * self
                .l_b
                .transpose()
                .try_inverse()
                .expect("triangular factor is invertible");
        let m = &r * &self.c;
        (m, r)
    }
}

impl Posterior for SparseModel {
    fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    fn predict(&self, x: &Points) -> Result<Prediction> {
        let (t1, t2) = self.projections(x)?;
        let mean = (t2.transpose() * &self.c).as_slice().to_vec();
        let variance = (0..x.len())
            .map(|j| {
                let a: f64 = t1.column(j).iter().map(|v| v * v).sum();
                let b: f64 = t2.column(j).iter().map(|v| v * v).sum();
                (self.kernel.diag() - a + b).max(0.0)
            })
            .collect();
        Ok(Prediction { mean, variance })
    }

    fn centres(&self) -> &Points {
        &self.inducing
    }

    /// Draws `u ~ q(u)` as `u = L LB^{-T} (c + eps)` and returns
    /// `Kuu^{-1} (u - f_prior(Z))`.
    fn pathwise_weights(&self, prior_at_centres: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let m = self.inducing.len();
        let eps = DVector::from_vec(standard_normals(m, rng));
        let whitened_u = solve_upper_t_vec(&self.l_b, &(&self.c + eps));
        let whitened_prior = solve_lower_vec(&self.l_uu, &DVector::from_column_slice(prior_at_centres));
        Ok(solve_upper_t_vec(&self.l_uu, &(whitened_u - whitened_prior)).as_slice().to_vec())
    }
}
