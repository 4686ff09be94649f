//! One-shot placement on a random design, as used by `cirbo place`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::objective;
use crate::bo::{fit_surrogate, initial_kernel, Standardizer};
use crate::error::Result;
use crate::gp::{Dataset, KernelFamily};
use crate::placement::{select_inducing, PlacementConfig, PlacementContext};
use crate::points::{Bounds, Points};

pub const DEMO_CANDIDATES: usize = 250;
pub const DEMO_INDUCING: usize = 50;
const DEMO_HYPER_BUDGET: usize = 100;

#[derive(Debug, Clone)]
pub struct PlacementDemo {
    pub objective: String,
    /// Candidates in the objective's own coordinates.
    pub candidates: Points,
    pub values: Vec<f64>,
    /// Mean of the surrogate that guided the placement, in objective units.
    pub predicted_mean: Vec<f64>,
    /// Inducing inputs in objective coordinates.
    pub inducing: Points,
    /// Candidate indices in selection order, when inducing points are candidates.
    pub selected: Option<Vec<usize>>,
    pub inducing_values: Vec<f64>,
    pub inducing_predicted_mean: Vec<f64>,
}

impl PlacementDemo {
    /// Fraction of inducing points whose objective value is at least `threshold`.
    pub fn fraction_above(&self, threshold: f64) -> f64 {
        let hits = self.inducing_values.iter().filter(|v| **v >= threshold).count();
        hits as f64 / self.inducing_values.len() as f64
    }

    /// Candidate rows then, for off-candidate strategies, inducing rows.
    ///
    /// Columns: `kind,index,x0..x{d-1},objective,predicted_mean,selected,selection_order`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let d = self.candidates.dim();
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["kind".to_string(), "index".to_string()];
        header.extend((0..d).map(|k| format!("x{k}")));
        header.extend(["objective", "predicted_mean", "selected", "selection_order"].map(String::from));
        wtr.write_record(&header)?;

        let mut order = vec![None; self.candidates.len()];
        if let Some(sel) = &self.selected {
            for (rank, i) in sel.iter().enumerate() {
                order[*i] = Some(rank);
            }
        }
        for (i, x) in self.candidates.rows().enumerate() {
            let mut rec = vec!["candidate".to_string(), i.to_string()];
            rec.extend(x.iter().map(|v| v.to_string()));
            rec.push(self.values[i].to_string());
            rec.push(self.predicted_mean[i].to_string());
            rec.push(u8::from(order[i].is_some()).to_string());
            rec.push(order[i].map(|r| r.to_string()).unwrap_or_default());
            wtr.write_record(&rec)?;
        }
        if self.selected.is_none() {
            for (i, x) in self.inducing.rows().enumerate() {
                let mut rec = vec!["inducing".to_string(), i.to_string()];
                rec.extend(x.iter().map(|v| v.to_string()));
                rec.push(self.inducing_values[i].to_string());
                rec.push(self.inducing_predicted_mean[i].to_string());
                rec.push("1".to_string());
                rec.push(i.to_string());
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Draws `n` uniform candidates, fits a surrogate on a CVR placement of the
/// same size as `config.inducing`, then runs the configured placement with
/// that surrogate as the previous model.
pub fn placement_demo(config: &PlacementConfig, objective_name: &str, n: usize, seed: u64) -> Result<PlacementDemo> {
    let obj = objective(objective_name)?;
    let bounds = obj.spec().bounds.clone();
    let d = bounds.dim();
    let unit = Bounds::unit(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let inputs = unit.sample_points(n, &mut rng);
    let to_box = |u: &[f64]| {
        let mut x = bounds.from_unit(u);
        bounds.clamp(&mut x);
        x
    };
    let mut candidates = Points::new(d);
    let mut values = Vec::with_capacity(n);
    for u in inputs.rows() {
        let x = to_box(u);
        values.push(obj.noisy_evaluate(&x, rng.random())?);
        candidates.push(&x)?;
    }
    let standardizer = Standardizer::fit(&values);
    let y = standardizer.apply(&values);
    let data = Dataset::new(inputs.clone(), y.clone())?;

    let init = initial_kernel(KernelFamily::Matern52, d);
    let warm_ctx = PlacementContext { inputs: &inputs, targets: &y, bounds: &unit, kernel: &init, previous: None };
    let warm = select_inducing(&PlacementConfig::new("cvr", config.inducing), &warm_ctx, rng.random())?;
    let (model, kernel) = fit_surrogate(&data, &warm.inducing, &init, DEMO_HYPER_BUDGET, false)?;

    let ctx = PlacementContext { inputs: &inputs, targets: &y, bounds: &unit, kernel: &kernel, previous: Some(model.as_ref()) };
    let placement = select_inducing(config, &ctx, rng.random())?;

    let predicted_mean = model.predict(&inputs)?.mean.into_iter().map(|m| standardizer.invert(m)).collect();
    let mut inducing = Points::new(d);
    let mut inducing_values = Vec::new();
    for u in placement.inducing.rows() {
        let x = to_box(u);
        inducing_values.push(obj.evaluate(&x)?);
        inducing.push(&x)?;
    }
    let inducing_predicted_mean = model
        .predict(&placement.inducing)?
        .mean
        .into_iter()
        .map(|m| standardizer.invert(m))
        .collect();
    Ok(PlacementDemo {
        objective: objective_name.to_string(),
        candidates,
        values,
        predicted_mean,
        inducing,
        selected: placement.indices,
        inducing_values,
        inducing_predicted_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cir_demo_flags_fifty_of_250() {
        let demo = placement_demo(&PlacementConfig::new("cir", DEMO_INDUCING), "log_goldstein_price", DEMO_CANDIDATES, 0).unwrap();
        let mut buf = Vec::new();
        demo.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kind,index,x0,x1,objective,predicted_mean,selected,selection_order");
        assert_eq!(lines.len(), 251);
        assert_eq!(lines[1..].iter().filter(|l| l.split(',').nth(6) == Some("1")).count(), 50);
    }

    #[test]
    fn kmeans_demo_adds_inducing_rows() {
        let demo = placement_demo(&PlacementConfig::new("kmeans", 10), "log_goldstein_price", 40, 1).unwrap();
        let mut buf = Vec::new();
        demo.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 51);
    }

    #[test]
    fn large_m_flags_everything() {
        let demo = placement_demo(&PlacementConfig::new("cir", 30), "log_goldstein_price", 20, 2).unwrap();
        assert_eq!(demo.selected.unwrap().len(), 20);
    }
}
