//! Experiment runner: configs, presets, grid scheduling and result files.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
pub mod emit;
pub mod preset;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, Grid, OutputFormat, OutputSpec};
pub use emit::{emit, write_rows};
pub use preset::{preset, Scale, PRESET_NAMES};
pub use runner::{run_experiment, ResultRow, Rows, RunOptions};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TAXGAME_OUT_DIR";

pub const CONFIG_FILE: &str = "config.json";
pub const CHECKPOINT_FILE: &str = "cells.jsonl";

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Runtime(String),
}

impl ExpError {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Validation { .. } | ExpError::UnknownPreset(_) => 1,
            _ => 2,
        }
    }
}

/// Path of the results file inside `dir`.
pub fn results_path(dir: &Path, format: OutputFormat) -> PathBuf {
    dir.join(format!("results.{}", format.extension()))
}

/// Run `cfg` into `dir`: echo the resolved config, checkpoint finished cells,
/// write the results file, then drop the checkpoint.
pub fn run_to_dir(
    cfg: &ExperimentConfig,
    dir: &Path,
    opts: &RunOptions,
) -> Result<PathBuf, ExpError> {
    cfg.validate()?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExpError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let config_path = dir.join(CONFIG_FILE);
    std::fs::write(&config_path, cfg.to_json()).map_err(io(&config_path))?;

    let checkpoint = dir.join(CHECKPOINT_FILE);
    let opts = RunOptions {
        checkpoint: Some(checkpoint.clone()),
        ..opts.clone()
    };
    let rows = run_experiment(cfg, &opts)?;
    let out = results_path(dir, cfg.output.format);
    match &rows {
        Rows::Cells(r) => emit(r, cfg.output.format, &out)?,
        Rows::Curve(r) => emit(r, cfg.output.format, &out)?,
    }
    if checkpoint.exists() {
        std::fs::remove_file(&checkpoint).map_err(io(&checkpoint))?;
    }
    Ok(out)
}
