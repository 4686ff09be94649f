//! Synthetic objectives with known optima, selected by name.

mod functions;

pub use functions::{Ackley4, Hartmann6, LogGoldsteinPrice, Michalewicz5, Shekel4, Toy1d};

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::points::Bounds;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveSpec {
    pub name: String,
    pub bounds: Bounds,
    pub noise_variance: f64,
    /// Maximum of the noise-free objective.
    pub optimum_value: f64,
    pub optimiser: Vec<f64>,
}

impl ObjectiveSpec {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }
}

/// A maximization benchmark. `value` assumes the input is in the box.
pub trait Objective: Send + Sync {
    fn spec(&self) -> &ObjectiveSpec;

    fn value(&self, x: &[f64]) -> f64;

    fn name(&self) -> &str {
        &self.spec().name
    }

    /// Noise-free evaluation with a domain check.
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if !self.spec().bounds.contains(x) {
            return Err(Error::OutOfDomain { objective: self.spec().name.clone() });
        }
        Ok(self.value(x))
    }

    /// Evaluation plus `N(0, noise_variance)` drawn from `seed`.
    fn noisy_evaluate(&self, x: &[f64], seed: u64) -> Result<f64> {
        let f = self.evaluate(x)?;
        let var = self.spec().noise_variance;
        if var == 0.0 {
            return Ok(f);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, var.sqrt()).expect("finite sd").sample(&mut rng);
        Ok(f + noise)
    }

    fn simple_regret(&self, x: &[f64]) -> Result<f64> {
        Ok(self.spec().optimum_value - self.evaluate(x)?)
    }
}

pub type ObjectiveFactory = fn() -> Box<dyn Objective>;

/// Name-to-factory table of objectives.
pub struct ObjectiveRegistry {
    factories: BTreeMap<String, ObjectiveFactory>,
}

impl ObjectiveRegistry {
    pub fn empty() -> Self {
        ObjectiveRegistry { factories: BTreeMap::new() }
    }

    pub fn register(&mut self, name: &str, factory: ObjectiveFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn get(&self, name: &str) -> Result<Box<dyn Objective>> {
        self.factories
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::Unknown { kind: "objective", name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }
}

impl Default for ObjectiveRegistry {
    fn default() -> Self {
        let mut r = ObjectiveRegistry::empty();
        r.register("hartmann6", || Box::new(Hartmann6::new()));
        r.register("shekel4", || Box::new(Shekel4::new()));
        r.register("michalewicz5", || Box::new(Michalewicz5::new()));
        r.register("log_goldstein_price", || Box::new(LogGoldsteinPrice::new()));
        r.register("ackley4", || Box::new(Ackley4::new()));
        r.register("toy1d", || Box::new(Toy1d::new()));
        r
    }
}

/// Looks up a built-in objective by name.
pub fn objective(name: &str) -> Result<Box<dyn Objective>> {
    ObjectiveRegistry::default().get(name)
}

pub fn evaluate(name: &str, x: &[f64]) -> Result<f64> {
    objective(name)?.evaluate(x)
}

pub fn noisy_evaluate(name: &str, x: &[f64], seed: u64) -> Result<f64> {
    objective(name)?.noisy_evaluate(x, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorded_optima_reproduce() {
        let reg = ObjectiveRegistry::default();
        for name in reg.names() {
            let obj = reg.get(name).unwrap();
            let spec = obj.spec();
            assert!(spec.bounds.contains(&spec.optimiser), "{name}");
            let v = obj.evaluate(&spec.optimiser).unwrap();
            assert!((v - spec.optimum_value).abs() < 1e-4, "{name}: {v}");
        }
    }

    #[test]
    fn literature_points() {
        let h = evaluate("hartmann6", &[0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]).unwrap();
        assert!((h - 3.32237).abs() < 1e-5);
        let s = evaluate("shekel4", &[4.0; 4]).unwrap();
        assert!((s - 10.5364).abs() < 2e-4, "{s}");
        assert!((Michalewicz5::new().spec().optimum_value - 4.68766).abs() < 1e-5);
    }

    #[test]
    fn out_of_box_and_unknown() {
        assert!(matches!(evaluate("hartmann6", &[1.5; 6]), Err(Error::OutOfDomain { .. })));
        assert!(matches!(objective("rosenbrock"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn noise_free_and_seeded_noise() {
        let x = [0.2; 6];
        let f = evaluate("hartmann6", &x).unwrap();
        let obj = objective("hartmann6").unwrap();
        assert_eq!(obj.noisy_evaluate(&x, 4).unwrap(), obj.noisy_evaluate(&x, 4).unwrap());
        assert_ne!(obj.noisy_evaluate(&x, 4).unwrap(), f);
        let lgp = objective("log_goldstein_price").unwrap();
        assert_eq!(lgp.noisy_evaluate(&[0.3, 0.6], 11).unwrap(), lgp.evaluate(&[0.3, 0.6]).unwrap());
    }
}
