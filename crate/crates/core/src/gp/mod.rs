//! Kernels, exact GP regression and collapsed-bound sparse GP regression.

mod exact;
mod hyper;
mod kernel;
pub mod linalg;
mod sparse;

pub use exact::ExactGp;
pub use hyper::{fit_hyperparameters, fit_hyperparameters_with, HyperBounds};
pub use kernel::{KernelFamily, KernelSpec};
pub use sparse::{SparseModel, NOISE_FLOOR};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::points::{Bounds, Points};

/// Observed inputs and targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub inputs: Points,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Points, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Precondition("dataset must contain at least one observation".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), got: targets.len() });
        }
        if !inputs.all_finite() || !targets.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Dataset { inputs, targets })
    }

    /// Like [`Dataset::new`] but also checks every input lies in `domain`.
    pub fn in_domain(inputs: Points, targets: Vec<f64>, domain: &Bounds) -> Result<Self> {
        if inputs.rows().any(|r| !domain.contains(r)) {
            return Err(Error::Precondition("dataset input outside the declared box".into()));
        }
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.dim()
    }
}

/// Predictive marginals of the latent function.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl Prediction {
    pub fn sd(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

/// A fitted GP posterior usable as a BO surrogate.
///
/// Pathwise samples are `prior(x) + sum_j k(x, c_j) w_j` where `c_j` are the
/// [`Posterior::centres`] and `w` comes from [`Posterior::pathwise_weights`].
pub trait Posterior: Send + Sync {
    fn kernel(&self) -> &KernelSpec;

    fn predict(&self, x: &Points) -> Result<Prediction>;

    fn centres(&self) -> &Points;

    /// Matheron-rule correction weights for one posterior draw, given the
    /// prior sample evaluated at the centres.
    fn pathwise_weights(&self, prior_at_centres: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>>;
}

pub(crate) fn standard_normals(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
