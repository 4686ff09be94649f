//! Run records, CSV persistence and cross-run aggregation.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::gp::KernelSpec;

/// One CSV row: the state after fitting on `n` observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub n: usize,
    pub believed_best_value: f64,
    pub simple_regret: f64,
    pub t_place_ms: f64,
    pub t_fit_ms: f64,
    pub t_acq_ms: f64,
}

/// Per-step data kept in the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDetail {
    pub believed_best_input: Vec<f64>,
    pub believed_best_index: usize,
    /// Fitted kernel in unit-cube inputs and standardized targets.
    pub kernel: KernelSpec,
    pub inducing: usize,
    pub used_all: bool,
    pub warnings: Vec<String>,
}

/// One objective evaluation; `step` 0 is the initial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub step: usize,
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub objective: String,
    pub strategy: String,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub details: Vec<StepDetail>,
    pub queries: Vec<QueryRecord>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Self {
        RunRecord {
            objective: config.objective.clone(),
            strategy: config.placement.strategy.clone(),
            seed,
            steps: Vec::new(),
            details: Vec::new(),
            queries: Vec::new(),
            error: None,
        }
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.steps.last().map(|s| s.simple_regret)
    }
}

/// Provenance written next to each run's CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub config_hash: String,
    pub initial_design: String,
    pub hyperparameter_warm_start: bool,
    pub error: Option<String>,
    pub steps: Vec<StepDetail>,
    pub queries: Vec<QueryRecord>,
}

/// SHA-256 of the configuration with seeds and output location removed, so
/// runs that differ only in seed share a hash.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.seeds.clear();
    c.output = PathBuf::new();
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_steps_csv<W: Write>(steps: &[StepRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if steps.is_empty() {
        wtr.write_record(["step", "n", "believed_best_value", "simple_regret", "t_place_ms", "t_fit_ms", "t_acq_ms"])?;
    }
    for s in steps {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_steps_csv<R: Read>(r: R) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows: std::result::Result<Vec<StepRecord>, _> = rdr.deserialize().collect();
    Ok(rows?)
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`, returning both paths.
pub fn write_run(record: &RunRecord, config: &ExperimentConfig, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let hash = config_hash(config);
    let stem = format!(
        "{}-{}-m{}-{}-seed{}",
        config.objective,
        config.placement.strategy,
        config.placement.inducing,
        &hash[..8],
        record.seed
    );
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_steps_csv(&record.steps, fs::File::create(&csv_path)?)?;
    let sidecar = Sidecar {
        config: config.clone(),
        seed: record.seed,
        config_hash: hash,
        initial_design: format!("uniform random batch of {}", config.batch_size),
        hyperparameter_warm_start: true,
        error: record.error.clone(),
        steps: record.details.clone(),
        queries: record.queries.clone(),
    };
    serde_json::to_writer_pretty(fs::File::create(&json_path)?, &sidecar)?;
    Ok((csv_path, json_path))
}

/// Across-run summary of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub step: usize,
    pub n: usize,
    pub mean_regret: f64,
    /// `1.96 * sd / sqrt(runs)`.
    pub ci_half_width: f64,
    pub runs: usize,
}

/// Per-step mean simple regret with 95% normal confidence half-widths.
pub fn aggregate(runs: &[Vec<StepRecord>]) -> Result<Vec<AggregateRow>> {
    if runs.len() < 2 {
        return Err(Error::Precondition(format!("aggregation needs at least 2 runs, got {}", runs.len())));
    }
    let len = runs[0].len();
    if let Some(bad) = runs.iter().find(|r| r.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, got: bad.len() });
    }
    let r = runs.len() as f64;
    Ok((0..len)
        .map(|i| {
            let regrets: Vec<f64> = runs.iter().map(|run| run[i].simple_regret).collect();
            let sd = crate::stats::sample_sd(&regrets);
            AggregateRow {
                step: runs[0][i].step,
                n: runs[0][i].n,
                mean_regret: crate::stats::mean(&regrets),
                ci_half_width: 1.96 * sd / r.sqrt(),
                runs: runs.len(),
            }
        })
        .collect())
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_aggregate_csv<R: Read>(r: R) -> Result<Vec<AggregateRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows: std::result::Result<Vec<AggregateRow>, _> = rdr.deserialize().collect();
    Ok(rows?)
}
