//! Batch acquisition by decoupled pathwise Thompson sampling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gp::{KernelFamily, KernelSpec, Posterior};
use crate::points::{Bounds, Points};

pub const DEFAULT_PROBES: usize = 1000;
const MAX_ITER: usize = 100;
const F_TOL: f64 = 1e-8;
const HISTORY: usize = 6;
const DUPLICATE_TOL: f64 = 1e-9;
const DUPLICATE_JITTER: f64 = 1e-6;

/// Random Fourier features `amplitude * cos(omega . x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBasis {
    /// Row-major `F x d`.
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
    pub amplitude: f64,
    dim: usize,
}

impl FourierBasis {
    /// Draws `features` frequencies from the spectral density of `kernel`.
    pub fn sample<R: Rng + ?Sized>(kernel: &KernelSpec, features: usize, rng: &mut R) -> Result<Self> {
        if features == 0 {
            return Err(Error::Precondition("feature count must be at least 1".into()));
        }
        let d = kernel.dim();
        let chi: ChiSquared<f64> = ChiSquared::new(5.0).expect("positive dof");
        let mut frequencies = Vec::with_capacity(features * d);
        let mut phases = Vec::with_capacity(features);
        for _ in 0..features {
            // Matérn-5/2 has a multivariate-t spectrum with 5 degrees of freedom
            let scale = match kernel.family {
                KernelFamily::SquaredExponential => 1.0,
                KernelFamily::Matern52 => (5.0 / chi.sample(rng)).sqrt(),
            };
            for l in &kernel.lengthscales {
                let z: f64 = StandardNormal.sample(rng);
                frequencies.push(z * scale / l);
            }
            phases.push(rng.random::<f64>() * 2.0 * PI);
        }
        Ok(FourierBasis {
            frequencies,
            phases,
            amplitude: (2.0 * kernel.signal_variance / features as f64).sqrt(),
            dim: d,
        })
    }

    /// Builds a basis from explicit parameters.
    pub fn from_parts(dim: usize, frequencies: Vec<f64>, phases: Vec<f64>, amplitude: f64) -> Result<Self> {
        if phases.is_empty() || frequencies.len() != phases.len() * dim {
            return Err(Error::DimensionMismatch { expected: phases.len() * dim, got: frequencies.len() });
        }
        Ok(FourierBasis { frequencies, phases, amplitude, dim })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn omega(&self, i: usize) -> &[f64] {
        &self.frequencies[i * self.dim..(i + 1) * self.dim]
    }

    fn arg(&self, i: usize, x: &[f64]) -> f64 {
        self.omega(i).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.phases[i]
    }

    /// Feature vector at `x`.
    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.amplitude * self.arg(i, x).cos()).collect()
    }
}

/// One posterior function draw: `amplitude * sum_i w_i cos(omega_i . x + b_i) + k(x, Z) nu`.
#[derive(Debug, Clone)]
pub struct PathwiseSample {
    pub basis: FourierBasis,
    pub weights: Vec<f64>,
    pub kernel: KernelSpec,
    pub centres: Points,
    pub correction: Vec<f64>,
}

impl PathwiseSample {
    /// A prior draw with no data correction.
    pub fn prior_only(basis: FourierBasis, weights: Vec<f64>, kernel: KernelSpec) -> Self {
        let d = basis.dim();
        PathwiseSample { basis, weights, kernel, centres: Points::new(d), correction: Vec::new() }
    }

    pub fn prior_value(&self, x: &[f64]) -> f64 {
        let a = self.basis.amplitude;
        (0..self.basis.len()).map(|i| a * self.weights[i] * self.basis.arg(i, x).cos()).sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let corr: f64 = self
            .centres
            .rows()
            .zip(&self.correction)
            .map(|(c, v)| v * self.kernel.eval(x, c))
            .sum();
        self.prior_value(x) + corr
    }

    /// Value and gradient at `x`.
    pub fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; x.len()];
        let mut f = 0.0;
        let a = self.basis.amplitude;
        for i in 0..self.basis.len() {
            let t = self.basis.arg(i, x);
            f += a * self.weights[i] * t.cos();
            let s = -a * self.weights[i] * t.sin();
            for (g, w) in grad.iter_mut().zip(self.basis.omega(i)) {
                *g += s * w;
            }
        }
        for (c, v) in self.centres.rows().zip(&self.correction) {
            f += v * self.kernel.eval(x, c);
            self.kernel.accumulate_grad_x(x, c, *v, &mut grad);
        }
        (f, grad)
    }

    pub fn values(&self, x: &Points) -> Vec<f64> {
        x.rows().map(|r| self.value(r)).collect()
    }
}

/// Draws one pathwise posterior sample from `model`.
pub fn draw_sample<R: Rng>(model: &dyn Posterior, basis: FourierBasis, rng: &mut R) -> Result<PathwiseSample> {
    let weights: Vec<f64> = (0..basis.len()).map(|_| StandardNormal.sample(rng)).collect();
    let prior = PathwiseSample::prior_only(basis, weights, model.kernel().clone());
    let at_centres: Vec<f64> = model.centres().rows().map(|c| prior.prior_value(c)).collect();
    let correction = model.pathwise_weights(&at_centres, rng)?;
    Ok(PathwiseSample { centres: model.centres().clone(), correction, ..prior })
}

fn project(bounds: &Bounds, x: &mut [f64]) {
    bounds.clamp(x);
}

/// Box-projected L-BFGS ascent from `start`. Never returns a point worse than `start`.
pub fn refine(sample: &PathwiseSample, bounds: &Bounds, start: &[f64]) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut x = start.to_vec();
    project(bounds, &mut x);
    let (mut f, mut g) = sample.value_grad(&x);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();

    for _ in 0..MAX_ITER {
        // two-loop recursion on the minimisation problem -f
        let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, y) in s_hist.iter().zip(&y_hist).rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            axpy(-a, y, &mut q);
            alphas.push((a, rho));
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y), (a, rho)) in s_hist.iter().zip(&y_hist).zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            axpy(a - b, s, &mut q);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        if dot(&dir, &g) <= 0.0 {
            dir = g.clone();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut cand: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            project(bounds, &mut cand);
            let moved: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            let fc = sample.value(&cand);
            if fc > f + 1e-4 * dot(&g, &moved).max(0.0) && moved.iter().any(|v| *v != 0.0) {
                accepted = Some((cand, fc, moved));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, s)) = accepted else { break };
        let (_, gn) = sample.value_grad(&xn);
        let y: Vec<f64> = (0..d).map(|k| -(gn[k] - g[k])).collect();
        if dot(&s, &y) > 1e-12 {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }
        let delta = fnew - f;
        x = xn;
        f = fnew;
        g = gn;
        if delta.abs() < F_TOL {
            break;
        }
    }
    (x, f)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(t, v)| *t += a * v);
}

/// Best of `probes` uniform points, refined by projected L-BFGS.
pub fn maximize_sample_with<R: Rng + ?Sized>(
    sample: &PathwiseSample,
    bounds: &Bounds,
    probes: usize,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let mut best = bounds.sample(rng);
    let mut best_f = sample.value(&best);
    for _ in 1..probes.max(1) {
        let x = bounds.sample(rng);
        let f = sample.value(&x);
        if f > best_f {
            best = x;
            best_f = f;
        }
    }
    if (0..bounds.dim()).all(|k| bounds.width(k) == 0.0) {
        return (best, best_f);
    }
    let (x, f) = refine(sample, bounds, &best);
    if f >= best_f && f.is_finite() {
        (x, f)
    } else {
        (best, best_f)
    }
}

pub fn maximize_sample(sample: &PathwiseSample, bounds: &Bounds, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    maximize_sample_with(sample, bounds, DEFAULT_PROBES, &mut rng)
}

/// Options for [`propose_batch_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThompsonConfig {
    pub features: usize,
    pub probes: usize,
    /// Reuse one basis across the batch (cheaper, slightly correlated).
    pub shared_basis: bool,
}

impl ThompsonConfig {
    pub fn new(features: usize) -> Self {
        ThompsonConfig { features, probes: DEFAULT_PROBES, shared_basis: false }
    }
}

/// `b` maximisers of independent posterior samples.
pub fn propose_batch(model: &dyn Posterior, bounds: &Bounds, b: usize, features: usize, seed: u64) -> Result<Points> {
    propose_batch_with(model, bounds, b, &ThompsonConfig::new(features), seed)
}

pub fn propose_batch_with(
    model: &dyn Posterior,
    bounds: &Bounds,
    b: usize,
    config: &ThompsonConfig,
    seed: u64,
) -> Result<Points> {
    if b == 0 {
        return Err(Error::Precondition("batch size must be at least 1".into()));
    }
    if bounds.dim() != model.kernel().dim() {
        return Err(Error::DimensionMismatch { expected: model.kernel().dim(), got: bounds.dim() });
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..b + 2).map(|_| master.random()).collect();
    let shared = if config.shared_basis {
        let mut r = ChaCha8Rng::seed_from_u64(seeds[b]);
        Some(FourierBasis::sample(model.kernel(), config.features, &mut r)?)
    } else {
        None
    };

    let mut out = Points::new(bounds.dim());
    for s in &seeds[..b] {
        let mut rng = ChaCha8Rng::seed_from_u64(*s);
        let basis = match &shared {
            Some(basis) => basis.clone(),
            None => FourierBasis::sample(model.kernel(), config.features, &mut rng)?,
        };
        let sample = draw_sample(model, basis, &mut rng)?;
        let (x, _) = maximize_sample_with(&sample, bounds, config.probes, &mut rng);
        out.push(&x)?;
    }

    let mut jitter_rng = ChaCha8Rng::seed_from_u64(seeds[b + 1]);
    for i in 1..out.len() {
        let dup = (0..i).any(|j| {
            out.row(i).iter().zip(out.row(j)).all(|(a, c)| (a - c).abs() <= DUPLICATE_TOL)
        });
        if dup {
            let row = out.row_mut(i);
            for (k, v) in row.iter_mut().enumerate() {
                *v += (jitter_rng.random::<f64>() - 0.5) * DUPLICATE_JITTER * bounds.width(k);
            }
            bounds.clamp(row);
        }
    }
    Ok(out)
}
