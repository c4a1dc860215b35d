//! Named experiment configurations, one per figure-style study.

use super::config::{ExperimentConfig, ExperimentKind, Grid, OutputSpec};
use super::ExpError;
use crate::network::NetworkKind;
use crate::redistribution::AssignmentRule;

pub const PRESET_NAMES: [&str; 8] = [
    "fig2", "fig4", "fig5", "fig6", "fig7", "fig8", "fig10", "brackets",
];

pub const DEFAULT_MASTER_SEED: u64 = 20_190_501;

/// Full-size settings.
pub const FULL_POPULATION: usize = 1000;
pub const FULL_REPLICATES: usize = 10_000;
pub const FULL_MAX_ITERATIONS: u64 = 2_500_000;
pub const FULL_INSTANCES: usize = 20;

/// Desk-size settings.
pub const DESK_POPULATION: usize = 200;
pub const DESK_REPLICATES: usize = 100;
pub const DESK_MAX_ITERATIONS: u64 = 500_000;
pub const DESK_INSTANCES: usize = 5;

pub const DEFAULT_BETA: f64 = 1.0;
/// Homogeneous degree; `m = 2` gives the same mean degree on scale-free graphs.
pub const DEFAULT_DEGREE: usize = 4;
pub const DEFAULT_ATTACHMENT: usize = 2;

/// How large to make a preset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// Z = 200, 100 replicates per cell, 5 networks, 5e5 iteration cap.
    Desk,
    /// Population, replicate count and iteration cap multiplied by the
    /// factor; `Factor(1.0)` is the full-size study.
    Factor(f64),
}

impl Scale {
    fn population(&self) -> usize {
        match *self {
            Scale::Desk => DESK_POPULATION,
            Scale::Factor(f) => {
                // even, so every homogeneous degree is realizable
                let z = (FULL_POPULATION as f64 * f).round() as usize;
                (z + z % 2).max(8)
            }
        }
    }

    fn replicates(&self) -> usize {
        match *self {
            Scale::Desk => DESK_REPLICATES,
            Scale::Factor(f) => ((FULL_REPLICATES as f64 * f).round() as usize).max(1),
        }
    }

    fn max_iterations(&self) -> u64 {
        match *self {
            Scale::Desk => DESK_MAX_ITERATIONS,
            Scale::Factor(f) => ((FULL_MAX_ITERATIONS as f64 * f).round() as u64).max(1),
        }
    }

    fn instances(&self) -> usize {
        match self {
            Scale::Desk => DESK_INSTANCES,
            Scale::Factor(_) => FULL_INSTANCES,
        }
    }
}

/// `start, start + step, ..., end` built from integer multiples so the
/// values print cleanly.
fn steps(start_tenths: u32, end_tenths: u32, stride_tenths: u32) -> Vec<f64> {
    (start_tenths..=end_tenths)
        .step_by(stride_tenths as usize)
        .map(|k| k as f64 / 10.0)
        .collect()
}

fn both_networks() -> Vec<NetworkKind> {
    vec![
        NetworkKind::HomogeneousRandom {
            degree: DEFAULT_DEGREE,
        },
        NetworkKind::ScaleFree {
            m: DEFAULT_ATTACHMENT,
        },
    ]
}

/// Temptation axis shared by the simulation presets: 1.1, 1.2, ..., 2.0.
fn temptation_axis() -> Vec<f64> {
    steps(11, 20, 1)
}

pub fn preset(name: &str, scale: Scale) -> Result<ExperimentConfig, ExpError> {
    if let Scale::Factor(f) = scale {
        if !(f.is_finite() && f > 0.0) {
            return Err(ExpError::Validation {
                field: "scale".into(),
                message: format!("scale factor must be positive, got {f}"),
            });
        }
    }
    let mut cfg = ExperimentConfig {
        name: name.to_string(),
        experiment: ExperimentKind::Simulation,
        population: scale.population(),
        networks: both_networks(),
        network_instances: scale.instances(),
        replicates_per_cell: scale.replicates(),
        grid: Grid {
            temptation: temptation_axis(),
            alpha: steps(0, 10, 1),
            theta: vec![1.0],
            brackets: vec![2],
            assignment: vec![AssignmentRule::Nearest],
        },
        legacy_two_bracket: true,
        beta: DEFAULT_BETA,
        max_iterations: scale.max_iterations(),
        resample_random_sets: false,
        master_seed: DEFAULT_MASTER_SEED,
        output: OutputSpec::default(),
        record_timing: false,
    };
    match name {
        "fig2" => {
            cfg.experiment = ExperimentKind::Analytic;
            cfg.grid.theta = vec![0.0, 0.25, 0.5, 0.75, 1.0];
            cfg.grid.temptation = (0..=50).map(|k| 1.0 + k as f64 / 50.0).collect();
            cfg.grid.alpha = vec![0.0];
        }
        // level of cooperation over (alpha, T) at theta = 1
        "fig4" => {}
        "fig5" => {
            cfg.grid.theta = steps(0, 20, 4);
            cfg.grid.alpha = vec![0.5];
        }
        "fig6" => {
            cfg.grid.theta = vec![0.5];
            cfg.grid.alpha = vec![0.9];
            cfg.grid.assignment = vec![AssignmentRule::Nearest, AssignmentRule::Random];
        }
        "fig7" => {
            cfg.grid.theta = vec![0.5];
            cfg.grid.alpha = vec![0.9];
            cfg.grid.assignment = (1..=4).map(|d| AssignmentRule::Extended { d }).collect();
        }
        // same grid as fig4; the fixation-time columns are the observable
        "fig8" => {}
        "fig10" => {
            cfg.experiment = ExperimentKind::Inequality;
            cfg.population = match scale {
                // inequality is cheap, keep the full population
                Scale::Desk => FULL_POPULATION,
                _ => cfg.population,
            };
            cfg.networks = vec![NetworkKind::ScaleFree {
                m: DEFAULT_ATTACHMENT,
            }];
            cfg.network_instances = FULL_INSTANCES;
            cfg.grid.theta = steps(0, 20, 4);
            cfg.grid.temptation = vec![1.5];
        }
        "brackets" => {
            cfg.legacy_two_bracket = false;
            cfg.grid.brackets = vec![2, 3, 4, 5];
            cfg.grid.alpha = steps(0, 10, 2);
        }
        other => {
            return Err(ExpError::UnknownPreset(other.to_string()));
        }
    }
    Ok(cfg)
}
