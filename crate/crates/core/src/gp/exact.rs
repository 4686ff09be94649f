use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngCore;

use super::linalg::{jittered_cholesky, log_det, solve_lower, solve_upper_t_vec};
use super::{standard_normals, Dataset, KernelSpec, Posterior, Prediction};
use crate::error::Result;
use crate::points::Points;

/// Exact GP regression posterior, `O(N^3)` to fit.
#[derive(Debug, Clone)]
pub struct ExactGp {
    kernel: KernelSpec,
    inputs: Points,
    targets: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

impl ExactGp {
    pub fn fit(data: &Dataset, kernel: &KernelSpec) -> Result<Self> {
        kernel.validate()?;
        let mut k = kernel.gram_sym(&data.inputs)?;
        for i in 0..k.nrows() {
            k[(i, i)] += kernel.noise_variance;
        }
        let (chol, jitter) = jittered_cholesky(&k, kernel.signal_variance)?;
        let targets = DVector::from_column_slice(&data.targets);
        let alpha = chol.solve(&targets);
        Ok(ExactGp {
            kernel: kernel.clone(),
            inputs: data.inputs.clone(),
            targets,
            chol,
            alpha,
            jitter,
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.targets.len() as f64;
        -0.5 * self.targets.dot(&self.alpha)
            - 0.5 * log_det(&self.chol)
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// Full predictive covariance of the latent function at `x`.
    pub fn predict_covariance(&self, x: &Points) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let ks = self.kernel.gram(&self.inputs, x)?;
        let mean = (ks.transpose() * &self.alpha).as_slice().to_vec();
        let v = solve_lower(&self.chol.l(), &ks);
        let cov = self.kernel.gram_sym(x)? - v.transpose() * v;
        Ok((mean, cov))
    }
}

impl Posterior for ExactGp {
    fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    fn predict(&self, x: &Points) -> Result<Prediction> {
        let ks = self.kernel.gram(&self.inputs, x)?;
        let mean = (ks.transpose() * &self.alpha).as_slice().to_vec();
        let v = solve_lower(&self.chol.l(), &ks);
        let variance = (0..x.len())
            .map(|j| {
                let q: f64 = v.column(j).iter().map(|a| a * a).sum();
                (self.kernel.diag() - q).max(0.0)
            })
            .collect();
        Ok(Prediction { mean, variance })
    }

    fn centres(&self) -> &Points {
        &self.inputs
    }

    /// `w = (K + s2 I)^{-1} (y - f_prior(X) - eps)`, `eps ~ N(0, s2 I)`.
    fn pathwise_weights(&self, prior_at_centres: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let sd = self.kernel.noise_variance.sqrt();
        let eps = standard_normals(self.inputs.len(), rng);
        let r = DVector::from_iterator(
            self.inputs.len(),
            (0..self.inputs.len()).map(|i| self.targets[i] - prior_at_centres[i] - sd * eps[i]),
        );
        let l = self.chol.l();
        let half = l.solve_lower_triangular(&r).expect("non-zero diagonal");
        Ok(solve_upper_t_vec(&l, &half).as_slice().to_vec())
    }
}
