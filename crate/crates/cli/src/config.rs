//! The TOML configuration file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use cirbo::bo::ExperimentConfig;
use cirbo::gp::KernelFamily;
use cirbo::placement::PlacementConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub objective: String,
    pub total_budget: usize,
    pub batch_size: usize,
    #[serde(default = "default_features")]
    pub features: usize,
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

/// Grid of runs: every strategy crossed with every inducing count and seed.
/// Empty lists fall back to the single value in `[placement]` / `[experiment]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub strategies: Vec<String>,
    #[serde(default)]
    pub inducing: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub placement: PlacementConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// A config error with its location in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.path.display(), self.message),
            (Some(l), None) => write!(f, "{}:{l}: {}", self.path.display(), self.message),
            _ => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str::<ConfigFile>(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => {
                    let (l, c) = line_col(text, span.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError { path: path.to_path_buf(), line, column, message: e.message().trim().to_string() }
        })
    }

    /// Reads and parses `path`, resolving `output` against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: None,
            column: None,
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.experiment.output.is_relative() {
            cfg.experiment.output = base.join(&cfg.experiment.output);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_experiment(c: &ExperimentConfig) -> Self {
        ConfigFile {
            experiment: ExperimentSection {
                objective: c.objective.clone(),
                total_budget: c.total_budget,
                batch_size: c.batch_size,
                features: c.features,
                hyper_budget: c.hyper_budget,
                kernel: c.kernel,
                seeds: c.seeds.clone(),
                output: c.output.clone(),
            },
            placement: c.placement.clone(),
            sweep: None,
        }
    }

    /// The base experiment, ignoring any sweep.
    pub fn experiment(&self) -> ExperimentConfig {
        let e = &self.experiment;
        ExperimentConfig {
            objective: e.objective.clone(),
            total_budget: e.total_budget,
            batch_size: e.batch_size,
            placement: self.placement.clone(),
            features: e.features,
            hyper_budget: e.hyper_budget,
            kernel: e.kernel,
            seeds: e.seeds.clone(),
            output: e.output.clone(),
        }
    }

    /// Every (experiment, seed) pair the file describes. `seed_override`
    /// replaces all configured seeds.
    pub fn expand(&self, seed_override: Option<u64>) -> Vec<(ExperimentConfig, u64)> {
        let base = self.experiment();
        let sweep = self.sweep.clone().unwrap_or_default();
        let strategies =
            if sweep.strategies.is_empty() { vec![base.placement.strategy.clone()] } else { sweep.strategies };
        let inducing = if sweep.inducing.is_empty() { vec![base.placement.inducing] } else { sweep.inducing };
        let seeds = match seed_override {
            Some(s) => vec![s],
            None if !sweep.seeds.is_empty() => sweep.seeds,
            None if !base.seeds.is_empty() => base.seeds.clone(),
            None => vec![0],
        };
        let mut out = Vec::new();
        for s in &strategies {
            for m in &inducing {
                let mut c = base.clone();
                c.placement.strategy = s.clone();
                c.placement.inducing = *m;
                c.seeds = seeds.clone();
                for seed in &seeds {
                    out.push((c.clone(), *seed));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[experiment]
objective = "toy1d"
total_budget = 6
batch_size = 2

[placement]
strategy = "cir"
inducing = 4

[sweep]
strategies = ["cir", "cvr"]
inducing = [2, 3]
seeds = [1, 2]
"#;

    #[test]
    fn sweep_expands_to_grid() {
        let cfg = ConfigFile::parse(SAMPLE, Path::new("x.toml")).unwrap();
        let runs = cfg.expand(None);
        assert_eq!(runs.len(), 8);
        assert_eq!(cfg.expand(Some(9)).len(), 4);
        assert!(cfg.expand(Some(9)).iter().all(|(_, s)| *s == 9));
    }

    #[test]
    fn unknown_key_reports_line() {
        let bad = SAMPLE.replace("batch_size = 2", "batch_size = 2\nbatchsize = 3");
        let err = ConfigFile::parse(&bad, Path::new("x.toml")).unwrap_err();
        assert_eq!(err.line, Some(6), "{err}");
        assert!(err.to_string().starts_with("x.toml:6:"));
    }

    #[test]
    fn missing_objective_is_an_error() {
        let bad = SAMPLE.replace("objective = \"toy1d\"\n", "");
        assert!(ConfigFile::parse(&bad, Path::new("x.toml")).is_err());
    }
}
