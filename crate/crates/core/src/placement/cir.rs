use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use super::{Placement, PlacementConfig, PlacementContext, PlacementStrategy, PlacementWarning, PriorMeanMode};
use crate::dpp::{greedy_map, QualityWeights, TIE_TOLERANCE};
use crate::error::Result;
use crate::maxvalue::{gamma_of, gumbel_sample_maxima, ig_of_gamma, moment_match, quality_weights, GammaConvention, MaxValueMoments};
use crate::qmc::halton;

/// Relative floor on predictive and max-value standard deviations.
const SD_FLOOR: f64 = 1e-6;

/// Conditional information reduction: greedy MAP of the DPP with
/// `L = diag(q) K diag(q)`, where `q` rewards information about the maximum
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub alpha: f64,
    pub gumbel_samples: usize,
    pub prior_mean_mode: PriorMeanMode,
    pub gamma: GammaConvention,
    pub grid_points: usize,
}

/// Intermediate quantities of one CIR selection.
#[derive(Debug, Clone)]
pub struct CirDiagnostics {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub moments: MaxValueMoments,
    /// Per-candidate information gain about the maximum value.
    pub info_gain: Vec<f64>,
    pub fell_back: bool,
}

impl Cir {
    pub fn from_config(c: &PlacementConfig) -> Result<Self> {
        c.validate()?;
        Ok(Cir {
            alpha: c.alpha,
            gumbel_samples: c.gumbel_samples,
            prior_mean_mode: c.prior_mean_mode,
            gamma: c.gamma,
            grid_points: c.grid_points,
        })
    }

    /// Prior-mean moments at the candidates, the max-value samples and the
    /// information gain of every candidate.
    pub fn diagnostics(&self, ctx: &PlacementContext, rng: &mut ChaCha8Rng) -> Result<CirDiagnostics> {
        let signal_sd = ctx.kernel.signal_variance.sqrt();
        let floor = SD_FLOOR * signal_sd;
        let n = ctx.inputs.len();

        let mut mode = self.prior_mean_mode;
        let mut fell_back = false;
        if mode == PriorMeanMode::PreviousPosterior && ctx.previous.is_none() {
            mode = PriorMeanMode::ObservedValues;
            fell_back = true;
        }

        let (means, sds, grid_means, grid_sds) = match (mode, ctx.previous) {
            (PriorMeanMode::PreviousPosterior, Some(model)) => {
                let mut grid = ctx.inputs.clone();
                grid.extend(&halton(self.grid_points, ctx.bounds))?;
                let pred = model.predict(&grid)?;
                let sds: Vec<f64> = pred.sd().into_iter().map(|s| s.max(floor)).collect();
                (pred.mean[..n].to_vec(), sds[..n].to_vec(), pred.mean, sds)
            }
            (PriorMeanMode::Zero, _) => {
                let m = vec![0.0; n];
                let s = vec![signal_sd; n];
                (m.clone(), s.clone(), m, s)
            }
            _ => {
                let m = ctx.targets.to_vec();
                let s = vec![signal_sd; n];
                (m.clone(), s.clone(), m, s)
            }
        };

        let samples = if grid_means.len() >= 2 {
            gumbel_sample_maxima(&grid_means, &grid_sds, self.gumbel_samples, rng.next_u64())?
        } else {
            vec![grid_means[0]; self.gumbel_samples.max(2)]
        };
        let moments = moment_match(&samples, floor)?;
        let info_gain = means
            .iter()
            .zip(&sds)
            .map(|(m, s)| ig_of_gamma(gamma_of(*m, *s, &moments, self.gamma)))
            .collect();
        Ok(CirDiagnostics { means, sds, moments, info_gain, fell_back })
    }
}

impl PlacementStrategy for Cir {
    fn name(&self) -> &'static str {
        "cir"
    }

    fn place(&self, ctx: &PlacementContext, m: usize, rng: &mut ChaCha8Rng) -> Result<Placement> {
        if self.alpha == 0.0 {
            // no weight on the max value: plain conditional variance reduction
            let sel = greedy_map(ctx.kernel, ctx.inputs, m, None)?;
            let degenerate = sel.degenerate;
            let mut p = Placement::subset(ctx, sel.indices);
            if degenerate {
                p.warnings.push(PlacementWarning::Degenerate);
            }
            return Ok(p);
        }

        let diag = self.diagnostics(ctx, rng)?;
        let k_diag: Vec<f64> = ctx.inputs.rows().map(|r| ctx.kernel.eval(r, r)).collect();

        let mut p = if self.alpha == 1.0 {
            // the weight diverges; rank by quality alone on the correlation scale
            let mut order: Vec<usize> = (0..ctx.inputs.len()).collect();
            order.sort_by(|&a, &b| {
                let (ga, gb) = (diag.info_gain[a], diag.info_gain[b]);
                if (ga - gb).abs() < TIE_TOLERANCE {
                    a.cmp(&b)
                } else {
                    gb.total_cmp(&ga)
                }
            });
            order.truncate(m);
            Placement::subset(ctx, order)
        } else {
            let q = quality_weights(&diag.means, &diag.sds, &k_diag, &diag.moments, self.alpha, m, self.gamma)?;
            let sel = greedy_map(ctx.kernel, ctx.inputs, m, Some(&q))?;
            let degenerate = sel.degenerate;
            let mut p = Placement::subset(ctx, sel.indices);
            if degenerate {
                p.warnings.push(PlacementWarning::Degenerate);
            }
            p
        };
        if diag.fell_back {
            p.warnings.push(PlacementWarning::NoPreviousModel);
        }
        Ok(p)
    }
}

/// Quality weights CIR would use for `ctx`, exposed for inspection.
pub fn cir_quality(cir: &Cir, ctx: &PlacementContext, m: usize, rng: &mut ChaCha8Rng) -> Result<QualityWeights> {
    let diag = cir.diagnostics(ctx, rng)?;
    let k_diag: Vec<f64> = ctx.inputs.rows().map(|r| ctx.kernel.eval(r, r)).collect();
    quality_weights(&diag.means, &diag.sds, &k_diag, &diag.moments, cir.alpha, m, cir.gamma)
}
