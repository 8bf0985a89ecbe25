use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::adversary::AttackStrategy;
use crate::channel::PauliChannelParams;
use crate::protocol::{SessionConfig, Variant};

/// Odd constant spreading trial indices over the seed space.
pub const TRIAL_SEED_MULTIPLIER: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of trial `trial`: `base ⊕ (trial · 0x9E3779B97F4A7C15)`, wrapping.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base ^ (trial as u64).wrapping_mul(TRIAL_SEED_MULTIPLIER)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    /// One JSON object per grid cell, one per line.
    Records,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "records" => Ok(OutputFormat::Records),
            other => Err(format!("unknown format `{other}` (expected csv or records)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Records => "records",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<std::path::PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Parameter grid. An empty axis keeps the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub variant: Vec<Variant>,
    pub attack: Vec<AttackStrategy>,
    pub e_max: Vec<f64>,
    pub n: Vec<usize>,
    pub channel: Vec<PauliChannelParams>,
}

impl Sweep {
    fn is_empty(&self) -> bool {
        self.variant.is_empty()
            && self.attack.is_empty()
            && self.e_max.is_empty()
            && self.n.is_empty()
            && self.channel.is_empty()
    }
}

/// A batch of sessions: the base configuration, optionally swept over a
/// grid, repeated `trials` times per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub base: SessionConfig,
    #[serde(default = "one")]
    pub trials: usize,
    /// Base seed; the session seed inside `base` is ignored.
    #[serde(default)]
    pub seed: u64,
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            base: SessionConfig::default(),
            trials: 1,
            seed: 0,
            sweep: None,
            output: OutputSpec::default(),
        }
    }
}

/// One point of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub config: SessionConfig,
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidSpec("trials must be at least 1".into()));
        }
        if self.sweep.as_ref().is_some_and(Sweep::is_empty) {
            return Err(HarnessError::InvalidSpec("sweep is present but every axis is empty".into()));
        }
        for cell in self.cells() {
            cell.config
                .validate()
                .map_err(|e| HarnessError::InvalidSpec(format!("cell {}: {e}", cell.index)))?;
        }
        Ok(())
    }

    /// Grid cells in declared order: variant, then attack, e_max, n and
    /// channel, the last varying fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let empty = Sweep::default();
        let sweep = self.sweep.as_ref().unwrap_or(&empty);
        let base = &self.base;
        let mut cells = Vec::new();
        for variant in axis(&sweep.variant, base.variant) {
            for attack in axis(&sweep.attack, base.attack) {
                for e_max in axis(&sweep.e_max, base.e_max) {
                    for n in axis(&sweep.n, base.n) {
                        for channel in axis(&sweep.channel, base.channel) {
                            cells.push(Cell {
                                index: cells.len(),
                                config: SessionConfig {
                                    variant,
                                    attack,
                                    e_max,
                                    n,
                                    channel,
                                    ..base.clone()
                                },
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Configuration of one trial in one cell, seed included.
    pub fn trial_config(&self, cell: usize, trial: usize) -> Result<SessionConfig, HarnessError> {
        let cells = self.cells();
        let cell = cells
            .get(cell)
            .ok_or_else(|| HarnessError::InvalidSpec(format!("cell {cell} out of range (grid has {})", cells.len())))?;
        if trial >= self.trials {
            return Err(HarnessError::InvalidSpec(format!(
                "trial {trial} out of range (spec runs {})",
                self.trials
            )));
        }
        Ok(SessionConfig {
            seed: trial_seed(self.seed, trial),
            ..cell.config.clone()
        })
    }
}
