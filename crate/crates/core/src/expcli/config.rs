use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExpError;
use crate::network::NetworkKind;
use crate::redistribution::AssignmentRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Monte Carlo replicates per grid cell.
    Simulation,
    /// Critical taxation curve, no simulation.
    Analytic,
    /// Variance ratio of all-cooperator populations.
    Inequality,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Values swept by an experiment. Cells are the cartesian product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub temptation: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(default = "default_brackets")]
    pub brackets: Vec<u32>,
    #[serde(default = "default_assignment")]
    pub assignment: Vec<AssignmentRule>,
}

fn default_brackets() -> Vec<u32> {
    vec![2]
}

fn default_assignment() -> Vec<AssignmentRule> {
    vec![AssignmentRule::Nearest]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    /// Number of agents.
    pub population: usize,
    pub networks: Vec<NetworkKind>,
    pub network_instances: usize,
    /// Replicates per grid cell, spread evenly over the network instances.
    pub replicates_per_cell: usize,
    pub grid: Grid,
    #[serde(default)]
    pub legacy_two_bracket: bool,
    pub beta: f64,
    pub max_iterations: u64,
    #[serde(default)]
    pub resample_random_sets: bool,
    pub master_seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    /// Adds a wall-clock column, which makes output differ between runs.
    #[serde(default)]
    pub record_timing: bool,
}

fn invalid(field: &str, message: impl Into<String>) -> ExpError {
    ExpError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

fn nonempty<T>(field: &str, values: &[T]) -> Result<(), ExpError> {
    if values.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExpError> {
        serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExpError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExpError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Check every field before any computation starts.
    pub fn validate(&self) -> Result<(), ExpError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let g = &self.grid;
        nonempty("grid.temptation", &g.temptation)?;
        nonempty("grid.alpha", &g.alpha)?;
        nonempty("grid.theta", &g.theta)?;
        nonempty("grid.brackets", &g.brackets)?;
        nonempty("grid.assignment", &g.assignment)?;
        for &t in &g.temptation {
            // the analytic curve also covers the T = 1 boundary
            let ok = if self.experiment == ExperimentKind::Analytic {
                (1.0..=2.0).contains(&t)
            } else {
                t > 1.0 && t <= 2.0
            };
            if !ok {
                return Err(invalid("grid.temptation", format!("{t} outside (1, 2]")));
            }
        }
        for &a in &g.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(invalid("grid.alpha", format!("{a} outside [0, 1]")));
            }
        }
        for &th in &g.theta {
            if !(th.is_finite() && th >= 0.0) {
                return Err(invalid(
                    "grid.theta",
                    format!("{th} must be finite and >= 0"),
                ));
            }
        }
        for rule in &g.assignment {
            rule.validate()
                .map_err(|e| invalid("grid.assignment", e.to_string()))?;
        }
        if self.experiment == ExperimentKind::Analytic {
            return Ok(());
        }

        nonempty("networks", &self.networks)?;
        for kind in &self.networks {
            kind.validate(self.population)
                .map_err(|e| invalid("networks", e.to_string()))?;
        }
        if self.network_instances == 0 {
            return Err(invalid("network_instances", "must be at least 1"));
        }
        if self.experiment == ExperimentKind::Simulation {
            if self.replicates_per_cell == 0 {
                return Err(invalid("replicates_per_cell", "must be at least 1"));
            }
            if self.max_iterations == 0 {
                return Err(invalid("max_iterations", "must be at least 1"));
            }
            if !(self.beta.is_finite() && self.beta >= 0.0) {
                return Err(invalid(
                    "beta",
                    format!("{} must be finite and >= 0", self.beta),
                ));
            }
        }
        Ok(())
    }

    /// Number of grid cells.
    pub fn cell_count(&self) -> usize {
        let g = &self.grid;
        match self.experiment {
            ExperimentKind::Analytic => g.theta.len() * g.temptation.len(),
            _ => {
                self.networks.len()
                    * g.assignment.len()
                    * g.brackets.len()
                    * g.theta.len()
                    * g.alpha.len()
                    * g.temptation.len()
            }
        }
    }

    /// Replicate simulations in a full run.
    pub fn total_replicates(&self) -> usize {
        match self.experiment {
            ExperimentKind::Simulation => self.cell_count() * self.replicates_per_cell,
            _ => 0,
        }
    }
}
