//! Timing of greedy DPP selection over a grid of problem sizes.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dpp::greedy_map;
use crate::error::{Error, Result};
use crate::gp::{KernelFamily, KernelSpec};
use crate::points::Bounds;
use crate::stats::median;

pub const DEFAULT_REPEATS: usize = 5;
const BENCH_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub median_ms: f64,
    /// Log-log slope against the next smaller `n` with the same `m`.
    pub slope_n: Option<f64>,
    /// Log-log slope against the next smaller `m` with the same `n`.
    pub slope_m: Option<f64>,
}

/// Parses `1000x128,2000x128` into `(n, m)` pairs.
pub fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    let sizes: Vec<(usize, usize)> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (n, m) = t
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::Precondition(format!("size `{t}` is not of the form NxM")))?;
            let parse = |v: &str| {
                v.trim().parse::<usize>().map_err(|_| Error::Precondition(format!("bad size `{t}`")))
            };
            let (n, m) = (parse(n)?, parse(m)?);
            if m == 0 || m > n {
                return Err(Error::Precondition(format!("size `{t}` needs 1 <= M <= N")));
            }
            Ok((n, m))
        })
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        return Err(Error::Precondition("no sizes given".into()));
    }
    Ok(sizes)
}

/// Minimum wall-clock length of one timed sample.
const SAMPLE_TARGET_MS: f64 = 500.0;

struct Case {
    kernel: KernelSpec,
    candidates: crate::points::Points,
    m: usize,
    inner: usize,
}

impl Case {
    fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        let kernel = KernelSpec::isotropic(KernelFamily::SquaredExponential, BENCH_DIM, 0.1, 1.0, 0.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let candidates = Bounds::unit(BENCH_DIM).sample_points(n, &mut rng);
        let mut case = Case { kernel, candidates, m, inner: 1 };
        let once = case.sample()?;
        case.inner = ((SAMPLE_TARGET_MS / once.max(1e-3)).ceil() as usize).max(1);
        Ok(case)
    }

    /// Mean milliseconds per selection over `inner` back-to-back runs.
    fn sample(&self) -> Result<f64> {
        let t = Instant::now();
        for _ in 0..self.inner {
            let sel = greedy_map(&self.kernel, &self.candidates, self.m, None)?;
            std::hint::black_box(sel);
        }
        Ok(t.elapsed().as_secs_f64() * 1e3 / self.inner as f64)
    }
}

/// Median over `repeats` samples of the milliseconds taken by unit-quality
/// greedy selection of `m` from `n` uniform candidates in the unit square.
pub fn time_greedy(n: usize, m: usize, repeats: usize, seed: u64) -> Result<f64> {
    let case = Case::new(n, m, seed)?;
    let times = (0..repeats.max(1)).map(|_| case.sample()).collect::<Result<Vec<_>>>()?;
    Ok(median(&times))
}

fn slope(t1: f64, t0: f64, x1: usize, x0: usize) -> f64 {
    (t1 / t0).ln() / (x1 as f64 / x0 as f64).ln()
}

/// Times every size and fills in the pairwise slopes.
pub fn run_bench(sizes: &[(usize, usize)], repeats: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let cases = sizes.iter().map(|&(n, m)| Case::new(n, m, seed)).collect::<Result<Vec<_>>>()?;
    // repeats are interleaved across sizes so slow drift affects all equally
    let mut times = vec![Vec::with_capacity(repeats); sizes.len()];
    for _ in 0..repeats.max(1) {
        for (case, t) in cases.iter().zip(&mut times) {
            t.push(case.sample()?);
        }
    }
    let mut rows: Vec<BenchRow> = sizes
        .iter()
        .zip(&times)
        .map(|(&(n, m), t)| {
            let median_ms = median(t);
            log::info!("greedy N={n} M={m}: {median_ms:.3} ms");
            BenchRow { n, m, median_ms, slope_n: None, slope_m: None }
        })
        .collect();
    let snapshot = rows.clone();
    for row in &mut rows {
        let below_n = snapshot.iter().filter(|r| r.m == row.m && r.n < row.n).max_by_key(|r| r.n);
        row.slope_n = below_n.map(|r| slope(row.median_ms, r.median_ms, row.n, r.n));
        let below_m = snapshot.iter().filter(|r| r.n == row.n && r.m < row.m).max_by_key(|r| r.m);
        row.slope_m = below_m.map(|r| slope(row.median_ms, r.median_ms, row.m, r.m));
    }
    Ok(rows)
}

/// Columns: `n,m,median_ms,slope_n,slope_m`; missing slopes are empty.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}
