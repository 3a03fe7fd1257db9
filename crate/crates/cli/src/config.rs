//! JSON run configuration. Command-line flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use cournot_core::analysis::SweepAxis;
use cournot_core::DemandSpec;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Market {
    Duopoly,
    Multi,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[serde(rename = "d")]
    #[value(name = "d")]
    D,
    #[serde(rename = "beta")]
    #[value(name = "beta")]
    Beta,
    #[serde(rename = "L", alias = "low")]
    #[value(name = "L", alias = "low")]
    Low,
    #[serde(rename = "H", alias = "high")]
    #[value(name = "H", alias = "high")]
    High,
    #[serde(rename = "c", alias = "cost")]
    #[value(name = "c", alias = "cost")]
    Cost,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::D => SweepAxis::D,
            Axis::Beta => SweepAxis::Beta,
            Axis::Low => SweepAxis::Low,
            Axis::High => SweepAxis::High,
            Axis::Cost => SweepAxis::Cost,
        }
    }
}

/// Closed interval sampled at `steps` points.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub over: Option<Axis>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: Option<Market>,
    pub demand: Option<DemandSpec>,
    pub beta: Option<f64>,
    pub d: Option<f64>,
    #[serde(alias = "L")]
    pub low: Option<f64>,
    #[serde(alias = "H")]
    pub high: Option<f64>,
    #[serde(alias = "c")]
    pub cost: Option<f64>,
    pub gamma: Option<f64>,
    pub n_plus_1: Option<usize>,
    pub family: Option<Family>,
    pub sweep: Option<SweepConfig>,
    pub beta_grid: Option<GridConfig>,
    pub grid: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn require<T: Copy>(value: Option<T>, key: &str) -> Result<T, CliError> {
        value.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn demand(&self) -> Result<DemandSpec, CliError> {
        Self::require(self.demand, "demand")
    }

    pub fn check_market(&self, expected: Market) -> Result<(), CliError> {
        match self.market {
            Some(m) if m != expected => Err(CliError::Config(format!(
                "config is for market {m:?} but the command expects {expected:?}"
            ))),
            _ => Ok(()),
        }
    }
}
