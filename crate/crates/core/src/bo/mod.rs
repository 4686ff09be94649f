//! The batch Bayesian optimisation experiment loop.

mod record;

pub use record::{
    aggregate, config_hash, read_aggregate_csv, read_steps_csv, write_aggregate_csv, write_run, write_steps_csv,
    AggregateRow, QueryRecord, RunRecord, Sidecar, StepDetail, StepRecord,
};

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{objective, Objective};
use crate::error::{Error, Result};
use crate::gp::{
    fit_hyperparameters, fit_hyperparameters_with, Dataset, ExactGp, HyperBounds, KernelFamily, KernelSpec,
    Posterior, SparseModel,
};
use crate::placement::{select_with, strategy, PlacementConfig, PlacementContext, PlacementStrategy};
use crate::points::{Bounds, Points};
use crate::thompson::propose_batch;

/// One experiment: objective, budget, surrogate and placement settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: String,
    /// Total number of objective evaluations, initial batch included.
    pub total_budget: usize,
    pub batch_size: usize,
    pub placement: PlacementConfig,
    /// Random Fourier features per Thompson sample.
    #[serde(default = "default_features")]
    pub features: usize,
    /// Evidence evaluations per hyperparameter refit.
    #[serde(default = "default_hyper_budget")]
    pub hyper_budget: usize,
    #[serde(default = "default_kernel")]
    pub kernel: KernelFamily,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_features() -> usize {
    100
}

fn default_hyper_budget() -> usize {
    50
}

fn default_kernel() -> KernelFamily {
    KernelFamily::Matern52
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentConfig {
    pub fn new(objective: &str, total_budget: usize, batch_size: usize, placement: PlacementConfig) -> Self {
        ExperimentConfig {
            objective: objective.to_string(),
            total_budget,
            batch_size,
            placement,
            features: default_features(),
            hyper_budget: default_hyper_budget(),
            kernel: default_kernel(),
            seeds: vec![0],
            output: default_output(),
        }
    }

    /// Number of BO steps after the initial batch.
    pub fn steps(&self) -> usize {
        (self.total_budget - self.batch_size) / self.batch_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Precondition("batch_size must be at least 1".into()));
        }
        if self.total_budget < self.batch_size || !self.total_budget.is_multiple_of(self.batch_size) {
            return Err(Error::Precondition(format!(
                "total_budget {} must be a positive multiple of batch_size {}",
                self.total_budget, self.batch_size
            )));
        }
        if self.features == 0 {
            return Err(Error::Precondition("features must be at least 1".into()));
        }
        if self.hyper_budget == 0 {
            return Err(Error::Precondition("hyper_budget must be at least 1".into()));
        }
        self.placement.validate()?;
        strategy(&self.placement)?;
        objective(&self.objective)?;
        Ok(())
    }
}

/// Hyperparameter box for unit-cube inputs and standardized targets.
pub fn unit_space_bounds() -> HyperBounds {
    HyperBounds { lengthscale: (0.01, 10.0), signal_variance: (0.05, 20.0), noise_variance: (1e-6, 2.0) }
}

/// Starting kernel for the first refit.
pub fn initial_kernel(family: KernelFamily, dim: usize) -> KernelSpec {
    KernelSpec::isotropic(family, dim, 0.3, 1.0, 0.1).expect("valid constants")
}

/// Index and posterior mean of the queried input with the largest mean.
/// Ties go to the earliest query.
pub fn believed_best(model: &dyn Posterior, inputs: &Points) -> Result<(usize, f64)> {
    let mean = model.predict(inputs)?.mean;
    let mut best = 0;
    for (i, m) in mean.iter().enumerate() {
        if *m > mean[best] {
            best = i;
        }
    }
    Ok((best, mean[best]))
}

/// Targets rescaled to zero mean and unit sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub shift: f64,
    pub scale: f64,
}

impl Standardizer {
    pub fn fit(y: &[f64]) -> Self {
        let shift = crate::stats::mean(y);
        let sd = if y.len() > 1 { crate::stats::sample_sd(y) } else { 0.0 };
        Standardizer { shift, scale: if sd > 1e-12 { sd } else { 1.0 } }
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| (v - self.shift) / self.scale).collect()
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.scale + self.shift
    }
}

/// Fits the surrogate for one step: hyperparameters first, then the model.
pub fn fit_surrogate(
    data: &Dataset,
    inducing: &Points,
    init: &KernelSpec,
    budget: usize,
    exact: bool,
) -> Result<(Box<dyn Posterior>, KernelSpec)> {
    let bounds = unit_space_bounds();
    if exact {
        let kernel = fit_hyperparameters_with(init, budget, &bounds, |k| {
            ExactGp::fit(data, k).map(|g| g.log_marginal_likelihood())
        })?;
        Ok((Box::new(ExactGp::fit(data, &kernel)?), kernel))
    } else {
        let kernel = fit_hyperparameters(data, inducing, init, budget, &bounds)?;
        Ok((Box::new(SparseModel::fit(data, inducing, &kernel)?), kernel))
    }
}

struct RunState {
    objective: Box<dyn Objective>,
    box_bounds: Bounds,
    unit: Bounds,
    inputs: Points,
    box_inputs: Points,
    targets: Vec<f64>,
}

impl RunState {
    fn evaluate_batch(&mut self, batch: &Points, step: usize, rng: &mut ChaCha8Rng, record: &mut RunRecord) -> Result<()> {
        for u in batch.rows() {
            let mut x = self.box_bounds.from_unit(u);
            self.box_bounds.clamp(&mut x);
            let y = self.objective.noisy_evaluate(&x, rng.random())?;
            self.inputs.push(u)?;
            self.box_inputs.push(&x)?;
            self.targets.push(y);
            record.queries.push(QueryRecord { step, x, y });
        }
        Ok(())
    }
}

/// Runs one seeded experiment.
///
/// Returns `Err` only for an invalid configuration. Failures during the
/// loop stop it early and are reported in [`RunRecord::error`] alongside
/// every completed step.
pub fn run(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let strat = strategy(&config.placement)?;
    let obj = objective(&config.objective)?;
    let mut record = RunRecord::new(config, seed);
    if let Err(e) = run_inner(config, seed, strat.as_ref(), obj, &mut record) {
        log::warn!("run {} seed {seed} stopped: {e}", config.objective);
        record.error = Some(e.to_string());
    }
    Ok(record)
}

fn run_inner(
    config: &ExperimentConfig,
    seed: u64,
    strat: &dyn PlacementStrategy,
    obj: Box<dyn Objective>,
    record: &mut RunRecord,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let box_bounds = obj.spec().bounds.clone();
    let d = box_bounds.dim();
    let unit = Bounds::unit(d);
    let b = config.batch_size;
    let mut state = RunState {
        objective: obj,
        box_bounds,
        unit,
        inputs: Points::new(d),
        box_inputs: Points::new(d),
        targets: Vec::new(),
    };

    let initial = state.unit.sample_points(b, &mut rng);
    state.evaluate_batch(&initial, 0, &mut rng, record)?;

    let mut kernel = initial_kernel(config.kernel, d);
    let mut previous: Option<Box<dyn Posterior>> = None;
    let steps = config.steps();

    // one row per fit; the last fit sees the full budget and proposes nothing
    for step in 0..=steps {
        let place_seed: u64 = rng.random();
        let acq_seed: u64 = rng.random();
        let standardizer = Standardizer::fit(&state.targets);
        let y = standardizer.apply(&state.targets);

        let t0 = Instant::now();
        let ctx = PlacementContext {
            inputs: &state.inputs,
            targets: &y,
            bounds: &state.unit,
            kernel: &kernel,
            previous: previous.as_deref(),
        };
        let placement = select_with(strat, config.placement.inducing, &ctx, place_seed)?;
        let t_place = t0.elapsed().as_secs_f64() * 1e3;

        let t1 = Instant::now();
        let data = Dataset::new(state.inputs.clone(), y)?;
        let (model, fitted) = fit_surrogate(&data, &placement.inducing, &kernel, config.hyper_budget, strat.exact_model())?;
        let t_fit = t1.elapsed().as_secs_f64() * 1e3;

        let (best, best_mean) = believed_best(model.as_ref(), &state.inputs)?;
        let best_x = state.box_inputs.row(best).to_vec();
        let regret = state.objective.simple_regret(&best_x)?;

        let t2 = Instant::now();
        let batch = if step < steps {
            Some(propose_batch(model.as_ref(), &state.unit, b, config.features, acq_seed)?)
        } else {
            None
        };
        let t_acq = t2.elapsed().as_secs_f64() * 1e3;

        record.steps.push(StepRecord {
            step,
            n: state.targets.len(),
            believed_best_value: standardizer.invert(best_mean),
            simple_regret: regret,
            t_place_ms: t_place,
            t_fit_ms: t_fit,
            t_acq_ms: t_acq,
        });
        record.details.push(StepDetail {
            believed_best_input: best_x,
            believed_best_index: best,
            kernel: fitted.clone(),
            inducing: placement.inducing.len(),
            used_all: placement.used_all,
            warnings: placement.warnings.iter().map(|w| format!("{w:?}")).collect(),
        });
        log::debug!("seed {seed} step {step}: n={} regret={regret:.4}", state.targets.len());

        if let Some(batch) = batch {
            state.evaluate_batch(&batch, step + 1, &mut rng, record)?;
        }
        kernel = fitted;
        previous = Some(model);
    }
    Ok(())
}
