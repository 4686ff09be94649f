//! Inducing-point placement strategies.
//!
//! Every strategy implements [`PlacementStrategy`] and is registered by name
//! in a [`StrategyRegistry`]; [`select_inducing`] applies the shared small-N
//! fallback and dispatches to the configured strategy.

mod cir;
mod kmeans;

pub use cir::{cir_quality, Cir, CirDiagnostics};
pub use kmeans::{kmeans, KMeans};

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dpp::greedy_map;
use crate::error::{Error, Result};
use crate::gp::{KernelSpec, Posterior};
use crate::maxvalue::GammaConvention;
use crate::points::{Bounds, Points};

/// Number of quasi-random domain points added to the max-value grid.
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PriorMeanMode {
    #[default]
    PreviousPosterior,
    ObservedValues,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    pub strategy: String,
    /// Number of inducing points `M`.
    pub inducing: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gumbel_samples")]
    pub gumbel_samples: usize,
    #[serde(default)]
    pub prior_mean_mode: PriorMeanMode,
    #[serde(default)]
    pub gamma: GammaConvention,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_gumbel_samples() -> usize {
    10
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl PlacementConfig {
    pub fn new(strategy: &str, inducing: usize) -> Self {
        PlacementConfig {
            strategy: strategy.to_string(),
            inducing,
            alpha: default_alpha(),
            gumbel_samples: default_gumbel_samples(),
            prior_mean_mode: PriorMeanMode::default(),
            gamma: GammaConvention::default(),
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.inducing == 0 {
            return Err(Error::Precondition("inducing count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Precondition(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if self.strategy == "cir" && self.gumbel_samples < 2 {
            return Err(Error::Precondition("cir needs at least two Gumbel samples".into()));
        }
        Ok(())
    }
}

/// Observed data and surrogate state available to a placement.
pub struct PlacementContext<'a> {
    pub inputs: &'a Points,
    pub targets: &'a [f64],
    pub bounds: &'a Bounds,
    pub kernel: &'a KernelSpec,
    pub previous: Option<&'a dyn Posterior>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlacementWarning {
    /// No previous model; the observed targets served as the prior mean.
    NoPreviousModel,
    /// Greedy selection ran out of non-degenerate candidates.
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct Placement {
    pub inducing: Points,
    /// Candidate indices in selection order, for subset-based strategies.
    pub indices: Option<Vec<usize>>,
    /// Set when `N <= M` and every candidate was used.
    pub used_all: bool,
    pub warnings: Vec<PlacementWarning>,
}

impl Placement {
    pub fn subset(ctx: &PlacementContext, indices: Vec<usize>) -> Self {
        Placement {
            inducing: ctx.inputs.select(&indices),
            indices: Some(indices),
            used_all: false,
            warnings: Vec::new(),
        }
    }
}

pub trait PlacementStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Places `m` inducing points; called only when `m < N`.
    fn place(&self, ctx: &PlacementContext, m: usize, rng: &mut ChaCha8Rng) -> Result<Placement>;

    /// Whether the surrogate should be the exact GP rather than a sparse one.
    fn exact_model(&self) -> bool {
        false
    }
}

/// Conditional variance reduction: unit-quality greedy DPP MAP.
pub struct Cvr;

impl PlacementStrategy for Cvr {
    fn name(&self) -> &'static str {
        "cvr"
    }

    fn place(&self, ctx: &PlacementContext, m: usize, _rng: &mut ChaCha8Rng) -> Result<Placement> {
        let sel = greedy_map(ctx.kernel, ctx.inputs, m, None)?;
        let degenerate = sel.degenerate;
        let mut p = Placement::subset(ctx, sel.indices);
        if degenerate {
            p.warnings.push(PlacementWarning::Degenerate);
        }
        Ok(p)
    }
}

/// Uniform random points in the domain.
pub struct Uniform;

impl PlacementStrategy for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn place(&self, ctx: &PlacementContext, m: usize, rng: &mut ChaCha8Rng) -> Result<Placement> {
        Ok(Placement {
            inducing: ctx.bounds.sample_points(m, rng),
            indices: None,
            used_all: false,
            warnings: Vec::new(),
        })
    }
}

/// Full GP baseline: every observation is used and the model is exact.
pub struct Exact;

impl PlacementStrategy for Exact {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn place(&self, ctx: &PlacementContext, _m: usize, _rng: &mut ChaCha8Rng) -> Result<Placement> {
        let mut p = Placement::subset(ctx, (0..ctx.inputs.len()).collect());
        p.used_all = true;
        Ok(p)
    }

    fn exact_model(&self) -> bool {
        true
    }
}

pub type StrategyFactory = fn(&PlacementConfig) -> Result<Box<dyn PlacementStrategy>>;

/// Name-to-factory table of placement strategies.
pub struct StrategyRegistry {
    factories: BTreeMap<String, StrategyFactory>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { factories: BTreeMap::new() }
    }

    pub fn register(&mut self, name: &str, factory: StrategyFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn build(&self, config: &PlacementConfig) -> Result<Box<dyn PlacementStrategy>> {
        let factory = self.factories.get(&config.strategy).ok_or_else(|| Error::Unknown {
            kind: "placement strategy",
            name: config.strategy.clone(),
        })?;
        factory(config)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        let mut r = StrategyRegistry::empty();
        r.register("cir", |c| Ok(Box::new(Cir::from_config(c)?)));
        r.register("cvr", |_| Ok(Box::new(Cvr)));
        r.register("kmeans", |_| Ok(Box::new(KMeans::default())));
        r.register("uniform", |_| Ok(Box::new(Uniform)));
        r.register("exact", |_| Ok(Box::new(Exact)));
        r
    }
}

/// Builds the configured strategy from the default registry.
pub fn strategy(config: &PlacementConfig) -> Result<Box<dyn PlacementStrategy>> {
    config.validate()?;
    StrategyRegistry::default().build(config)
}

/// Chooses inducing inputs for the observed data.
///
/// When there are no more candidates than requested inducing points, all
/// candidates are returned whatever the strategy.
pub fn select_inducing(
    config: &PlacementConfig,
    ctx: &PlacementContext,
    seed: u64,
) -> Result<Placement> {
    let strategy = strategy(config)?;
    select_with(strategy.as_ref(), config.inducing, ctx, seed)
}

pub fn select_with(
    strategy: &dyn PlacementStrategy,
    m: usize,
    ctx: &PlacementContext,
    seed: u64,
) -> Result<Placement> {
    let n = ctx.inputs.len();
    if n == 0 {
        return Err(Error::Precondition("placement needs at least one candidate".into()));
    }
    if ctx.targets.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ctx.targets.len() });
    }
    if n <= m {
        let mut p = Placement::subset(ctx, (0..n).collect());
        p.used_all = true;
        return Ok(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    strategy.place(ctx, m, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelFamily;
    use rand::Rng;

    fn random_ctx_data(n: usize, seed: u64) -> (Points, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let y = rows.iter().map(|r| (3.0 * r[0]).sin() + r[1]).collect();
        (Points::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn small_n_returns_everything_for_all_strategies() {
        let (x, y) = random_ctx_data(5, 1);
        let b = Bounds::unit(2);
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 2, 0.3, 1.0, 0.01).unwrap();
        let ctx = PlacementContext { inputs: &x, targets: &y, bounds: &b, kernel: &k, previous: None };
        for s in ["cir", "cvr", "kmeans", "uniform"] {
            let p = select_inducing(&PlacementConfig::new(s, 10), &ctx, 0).unwrap();
            assert_eq!(p.inducing, x, "{s}");
            assert!(p.used_all);
        }
    }

    #[test]
    fn budgets_are_respected() {
        let (x, y) = random_ctx_data(40, 2);
        let b = Bounds::unit(2);
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 2, 0.3, 1.0, 0.01).unwrap();
        let ctx = PlacementContext { inputs: &x, targets: &y, bounds: &b, kernel: &k, previous: None };
        for s in ["cir", "cvr", "kmeans"] {
            let p = select_inducing(&PlacementConfig::new(s, 12), &ctx, 3).unwrap();
            assert!(p.inducing.len() <= 12, "{s}");
        }
        let p = select_inducing(&PlacementConfig::new("uniform", 12), &ctx, 3).unwrap();
        assert_eq!(p.inducing.len(), 12);
        assert!(p.inducing.rows().all(|r| b.contains(r)));
    }

    #[test]
    fn unknown_strategy_and_bad_alpha() {
        assert!(matches!(
            strategy(&PlacementConfig::new("random-forest", 3)),
            Err(Error::Unknown { .. })
        ));
        assert!(strategy(&PlacementConfig::new("cir", 3).with_alpha(1.5)).is_err());
    }
}
