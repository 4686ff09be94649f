//! Derivative-free hyperparameter search in log-parameter space.

use super::{Dataset, KernelSpec, SparseModel};
use crate::error::Result;
use crate::points::Points;

/// Box constraints on the hyperparameters (natural units).
#[derive(Debug, Clone, PartialEq)]
pub struct HyperBounds {
    pub lengthscale: (f64, f64),
    pub signal_variance: (f64, f64),
    pub noise_variance: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        HyperBounds {
            lengthscale: (1e-3, 1e3),
            signal_variance: (1e-4, 1e4),
            noise_variance: (1e-8, 1e4),
        }
    }
}

impl HyperBounds {
    fn admits(&self, k: &KernelSpec) -> bool {
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        k.lengthscales.iter().all(|l| within(*l, self.lengthscale))
            && within(k.signal_variance, self.signal_variance)
            && within(k.noise_variance, self.noise_variance)
    }
}

/// Maximizes the collapsed bound of a sparse model with fixed inducing
/// inputs. `budget` counts bound evaluations, including the one at `init`.
pub fn fit_hyperparameters(
    data: &Dataset,
    inducing: &Points,
    init: &KernelSpec,
    budget: usize,
    bounds: &HyperBounds,
) -> Result<KernelSpec> {
    fit_hyperparameters_with(init, budget, bounds, |k| {
        SparseModel::fit(data, inducing, k).map(|m| m.elbo())
    })
}

/// Generic form of [`fit_hyperparameters`] over any log-evidence objective.
///
/// Evaluates `init`, then the lengthscale-scaled starts `x0.5` and `x2`, and
/// runs Nelder-Mead from the best of the three with the remaining budget.
/// Candidates whose objective errors or leaves `bounds` are skipped.
pub fn fit_hyperparameters_with<F>(
    init: &KernelSpec,
    budget: usize,
    bounds: &HyperBounds,
    objective: F,
) -> Result<KernelSpec>
where
    F: Fn(&KernelSpec) -> Result<f64>,
{
    init.validate()?;
    let init_value = objective(init)?;
    let mut remaining = budget.saturating_sub(1);
    if remaining == 0 {
        return Ok(init.clone());
    }

    let score = |p: &[f64]| -> f64 {
        let k = init.from_log_params(p);
        if !bounds.admits(&k) {
            return f64::NEG_INFINITY;
        }
        match objective(&k) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };

    let base = init.to_log_params();
    let mut best = (base.clone(), init_value);
    for factor in [0.5f64, 2.0] {
        if remaining == 0 {
            break;
        }
        let mut p = base.clone();
        for v in p.iter_mut().take(init.dim()) {
            *v += factor.ln();
        }
        let v = score(&p);
        remaining -= 1;
        if v > best.1 {
            best = (p, v);
        }
    }

    if remaining > 0 {
        let (p, v) = nelder_mead(&best.0, best.1, 0.5, remaining, &score);
        if v > best.1 {
            best = (p, v);
        }
    }
    Ok(init.from_log_params(&best.0))
}

/// Budgeted Nelder-Mead maximization. `f0` is the known value at `x0`.
fn nelder_mead<F>(x0: &[f64], f0: f64, step: f64, budget: usize, f: &F) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        -f(x)
    };

    // minimize the negated objective
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), -f0)];
    for i in 0..n {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.total_cmp(&b.1);
    if simplex.len() < n + 1 {
        simplex.sort_by(by_value);
        let (x, v) = simplex.swap_remove(0);
        return (x, -v);
    }

    while evals < budget {
        simplex.sort_by(by_value);
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread.abs() < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let towards = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect()
        };

        let xr = towards(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            if evals >= budget {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = towards(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if evals >= budget {
                break;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = towards(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = towards(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink towards the best vertex
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if evals >= budget {
                        break;
                    }
                    let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    let v = eval(&x, &mut evals);
                    *vertex = (x, v);
                }
            }
        }
    }
    simplex.sort_by(by_value);
    let (x, v) = simplex.swap_remove(0);
    (x, -v)
}
