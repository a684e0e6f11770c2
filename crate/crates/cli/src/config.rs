use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    MontelCommutative,
    MontelNc,
    NcAxioms,
    ConeClosure,
    Uniqueness,
    MetricDemo,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub truncation: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub gradings: Option<Vec<usize>>,
    pub delta: Option<String>,
    pub amplitude: Option<f64>,
    pub degree: Option<usize>,
    pub cases: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Resolved experiment configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub tol: f64,
    pub truncation: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub gradings: Vec<usize>,
    pub delta: String,
    pub amplitude: f64,
    pub degree: usize,
    pub cases: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

pub const DEFAULT_DELTA: &str = "[[0.5*x1, 0.3*x2], [0.2*x1*x2, 0.4*x2 + 0.1]]";

struct Defaults {
    tol: f64,
    truncation: usize,
    k: usize,
    gradings: &'static [usize],
    degree: usize,
}

fn defaults(s: Scenario) -> Defaults {
    match s {
        Scenario::MontelCommutative => Defaults { tol: 1e-12, truncation: 16, k: 10, gradings: &[1], degree: 0 },
        Scenario::MontelNc => Defaults { tol: 1e-9, truncation: 32, k: 10, gradings: &[1, 2, 2], degree: 2 },
        Scenario::NcAxioms => Defaults { tol: 1e-9, truncation: 3, k: 0, gradings: &[1, 2, 3], degree: 3 },
        Scenario::ConeClosure => Defaults { tol: 1e-8, truncation: 64, k: 12, gradings: &[1, 1, 2, 2, 3], degree: 2 },
        Scenario::Uniqueness => Defaults { tol: 1e-10, truncation: 16, k: 16, gradings: &[1], degree: 2 },
        Scenario::MetricDemo => Defaults { tol: 1e-12, truncation: 2, k: 0, gradings: &[1, 2], degree: 2 },
    }
}

#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub truncation: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Flags override the config file, which overrides scenario defaults.
    pub fn resolve(scenario: Scenario, file: FileConfig, flags: Overrides) -> Result<Self> {
        if let Some(s) = file.scenario {
            if s != scenario {
                bail!("config file names scenario {s} but {scenario} was requested");
            }
        }
        let d = defaults(scenario);
        let cfg = Self {
            scenario,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            tol: flags.tol.or(file.tol).unwrap_or(d.tol),
            truncation: flags.truncation.or(file.truncation).unwrap_or(d.truncation),
            k: file.k.unwrap_or(d.k),
            gradings: file.gradings.unwrap_or_else(|| d.gradings.to_vec()),
            delta: file.delta.unwrap_or_else(|| DEFAULT_DELTA.to_string()),
            amplitude: file.amplitude.unwrap_or(0.5),
            degree: file.degree.unwrap_or(d.degree),
            cases: file.cases.unwrap_or(50),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        };
        if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
            bail!("tolerance must be a positive number, got {}", cfg.tol);
        }
        if cfg.truncation == 0 {
            bail!("truncation must be positive");
        }
        if cfg.gradings.is_empty() || cfg.gradings.contains(&0) {
            bail!("gradings must be a nonempty list of positive sizes");
        }
        Ok(cfg)
    }
}
