use std::fs;
use std::path::Path;

use clap::Args;
use hardy_core::verify::SuiteConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Flags shared by `solve` and `verify`; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub grading: Option<f64>,
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        let msg = e.message().replace('\n', " ");
        CliError::Usage(format!("invalid config {}: {msg}", path.display()))
    })
}

/// Hex SHA-256 of the JSON rendering of the effective config.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_string(cfg).expect("config serialises");
    Sha256::digest(json.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn suite_config(path: Option<&Path>, o: &Overrides, seed: Option<u64>) -> Result<SuiteConfig, CliError> {
    let mut cfg: SuiteConfig = match path {
        Some(p) => read_toml(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(v) = o.dim {
        cfg.dim = v;
    }
    if let Some(v) = o.mu {
        cfg.mu = v;
    }
    if let Some(v) = o.radius {
        cfg.radius = v;
    }
    if let Some(v) = o.cells {
        cfg.cells = v;
    }
    if let Some(v) = o.grading {
        cfg.grading = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Problem description for `solve`. `dim` and `mu` are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub dim: usize,
    pub mu: f64,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "one")]
    pub grading: f64,
    /// Polynomial coefficients of `f`, constant term first.
    #[serde(default)]
    pub f: Vec<f64>,
    /// Polynomial coefficients of the radial flux `F(r)`.
    #[serde(default)]
    pub flux: Vec<f64>,
    /// Regularisation radius for `dual-regularized`.
    pub epsilon: Option<f64>,
    /// Dirac strength for `dirac`.
    #[serde(default = "one")]
    pub strength: f64,
}

fn one() -> f64 {
    1.0
}

fn default_cells() -> usize {
    512
}

pub fn solve_config(path: &Path, o: &Overrides) -> Result<SolveConfig, CliError> {
    let mut cfg: SolveConfig = read_toml(path)?;
    if let Some(v) = o.dim {
        cfg.dim = v;
    }
    if let Some(v) = o.mu {
        cfg.mu = v;
    }
    if let Some(v) = o.radius {
        cfg.radius = v;
    }
    if let Some(v) = o.cells {
        cfg.cells = v;
    }
    if let Some(v) = o.grading {
        cfg.grading = v;
    }
    Ok(cfg)
}
