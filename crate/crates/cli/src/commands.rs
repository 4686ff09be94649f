//! Subcommand bodies. Each returns a process exit code.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use cirbo::bench::{parse_sizes, run_bench, write_bench_csv};
use cirbo::bo::{aggregate, read_steps_csv, run, write_run, ExperimentConfig, Sidecar, StepRecord};
use cirbo::demo::{placement_demo, DEMO_CANDIDATES, DEMO_INDUCING};
use cirbo::placement::{strategy, PlacementConfig};
use log::{error, info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::exit;

pub const PLACE_OBJECTIVE: &str = "log_goldstein_price";

/// Seed from `--seed`, else from the environment override.
pub fn seed_override(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(crate::SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("{} must be an unsigned integer, got `{v}`", crate::SEED_ENV)),
        Err(_) => Ok(None),
    }
}

pub struct RunArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let cfg = match ConfigFile::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return Ok(exit::USAGE);
        }
    };
    let seed = seed_override(args.seed)?;
    let out_dir = args.out.clone().unwrap_or_else(|| cfg.experiment.output.clone());
    let runs = cfg.expand(seed);
    for (c, _) in &runs {
        if let Err(e) = c.validate() {
            eprintln!("error: {}: {e}", args.config.display());
            return Ok(exit::USAGE);
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<bool>> = pool.install(|| {
        runs.par_iter()
            .map(|(c, seed)| -> Result<bool> {
                let record = run(c, *seed)?;
                let (csv, _) = write_run(&record, c, &out_dir)?;
                match &record.error {
                    Some(e) => {
                        warn!("{} seed {seed}: {e}", c.placement.strategy);
                        Ok(false)
                    }
                    None => {
                        info!("wrote {}", csv.display());
                        Ok(true)
                    }
                }
            })
            .collect()
    });
    let mut failed = 0;
    for r in results {
        match r {
            Ok(true) => {}
            Ok(false) => failed += 1,
            Err(e) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} runs failed", runs.len());
        return Ok(exit::PARTIAL);
    }
    Ok(exit::OK)
}

pub struct PlaceArgs {
    pub config: Option<PathBuf>,
    pub strategy: String,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub inducing: Option<usize>,
    pub candidates: usize,
}

pub fn cmd_place(args: &PlaceArgs) -> Result<i32> {
    let mut placement = match &args.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(c) => c.placement,
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(exit::USAGE);
            }
        },
        None => PlacementConfig::new(&args.strategy, DEMO_INDUCING),
    };
    placement.strategy = args.strategy.clone();
    if let Some(m) = args.inducing {
        placement.inducing = m;
    }
    if let Err(e) = strategy(&placement) {
        eprintln!("error: {e}");
        return Ok(exit::USAGE);
    }
    if args.candidates == 0 {
        eprintln!("error: need at least one candidate");
        return Ok(exit::USAGE);
    }
    let seed = seed_override(args.seed)?.unwrap_or(0);
    let demo = placement_demo(&placement, PLACE_OBJECTIVE, args.candidates, seed)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    demo.write_csv(fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?)?;
    info!("wrote {}", args.out.display());
    Ok(exit::OK)
}

pub fn default_candidates() -> usize {
    DEMO_CANDIDATES
}

pub fn cmd_bench(sizes: &str, repeats: usize, out: Option<&Path>) -> Result<i32> {
    let sizes = match parse_sizes(sizes) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::USAGE);
        }
    };
    let rows = run_bench(&sizes, repeats, 0)?;
    match out {
        Some(p) => write_bench_csv(&rows, fs::File::create(p)?)?,
        None => write_bench_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct LabeledRow<'a> {
    objective: &'a str,
    strategy: &'a str,
    inducing: usize,
    config_hash: &'a str,
    step: usize,
    n: usize,
    mean_regret: f64,
    ci_half_width: f64,
    runs: usize,
}

struct Group {
    config: ExperimentConfig,
    runs: Vec<(u64, Vec<StepRecord>)>,
}

pub fn cmd_aggregate(run_dir: &Path, out: &Path) -> Result<i32> {
    if !run_dir.is_dir() {
        eprintln!("error: {} is not a directory", run_dir.display());
        return Ok(exit::USAGE);
    }
    let mut groups: BTreeMap<String, Group> = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(run_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    for json in entries {
        let sidecar: Sidecar = match fs::File::open(&json).map_err(anyhow::Error::from).and_then(|f| {
            serde_json::from_reader(f).map_err(anyhow::Error::from)
        }) {
            Ok(s) => s,
            Err(e) => {
                warn!("skipping {}: {e}", json.display());
                continue;
            }
        };
        let csv_path = json.with_extension("csv");
        let steps = read_steps_csv(fs::File::open(&csv_path).with_context(|| format!("opening {}", csv_path.display()))?)?;
        groups
            .entry(sidecar.config_hash.clone())
            .or_insert_with(|| Group { config: sidecar.config.clone(), runs: Vec::new() })
            .runs
            .push((sidecar.seed, steps));
    }
    if groups.is_empty() {
        eprintln!("error: no run sidecars in {}", run_dir.display());
        return Ok(exit::USAGE);
    }

    fs::create_dir_all(out)?;
    let mut code = exit::OK;
    for (hash, group) in &groups {
        let c = &group.config;
        if group.runs.len() < 2 {
            eprintln!(
                "warning: group {} ({}, {}, M={}) has a single run; skipped",
                &hash[..8],
                c.objective,
                c.placement.strategy,
                c.placement.inducing
            );
            continue;
        }
        let runs: Vec<Vec<StepRecord>> = group.runs.iter().map(|(_, s)| s.clone()).collect();
        let rows = match aggregate(&runs) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: group {}: {e}", &hash[..8]);
                code = exit::PARTIAL;
                continue;
            }
        };
        let name = format!("{}-{}-m{}-{}.csv", c.objective, c.placement.strategy, c.placement.inducing, &hash[..8]);
        let mut wtr = csv::Writer::from_path(out.join(&name))?;
        for r in &rows {
            wtr.serialize(LabeledRow {
                objective: &c.objective,
                strategy: &c.placement.strategy,
                inducing: c.placement.inducing,
                config_hash: hash,
                step: r.step,
                n: r.n,
                mean_regret: r.mean_regret,
                ci_half_width: r.ci_half_width,
                runs: r.runs,
            })?;
        }
        wtr.flush()?;
        info!("wrote {name}");
    }
    Ok(code)
}
