use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::ExpError;
use crate::dynamics::{run_replicate, run_replicate_with, DynamicsParams, RunOutcome};
use crate::game::{critical_alpha_curve, CriticalAlphaRow, GameParams};
use crate::metrics::{aggregate, inequality_ratio, mean_stderr};
use crate::network::{Network, NetworkKind};
use crate::redistribution::{AssignmentRule, BeneficiaryAssignment, TaxPolicy};
use crate::seed::{derive, rng_from_seed};

// Stream labels keep network, replicate and set-sampling seeds apart.
const NETWORK_STREAM: u64 = 1;
const REPLICATE_STREAM: u64 = 2;
const SET_STREAM: u64 = 3;

/// One grid cell of results. Parameter columns come first, alphabetically,
/// then statistics. Statistics that do not apply to the experiment are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub alpha: f64,
    pub assignment: AssignmentRule,
    pub brackets: u32,
    pub network: String,
    pub temptation: f64,
    pub theta: f64,
    pub cooperation_level: Option<f64>,
    pub coop_stderr: Option<f64>,
    pub fixation_time_mean: Option<f64>,
    pub fixation_time_stderr: Option<f64>,
    pub fixation_count: Option<usize>,
    pub coop_fixation_count: Option<usize>,
    pub unfixed_count: Option<usize>,
    pub replicate_count: Option<usize>,
    pub var_payoff: Option<f64>,
    pub var_fitness: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub variance_ratio_stderr: Option<f64>,
    pub ratio_defined_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
}

/// Results of a whole experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Rows {
    Cells(Vec<ResultRow>),
    Curve(Vec<CriticalAlphaRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Cells(r) => r.len(),
            Rows::Curve(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Option<&[ResultRow]> {
        match self {
            Rows::Cells(r) => Some(r),
            Rows::Curve(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    /// JSON-lines file of finished cells. Existing entries for the same
    /// config are reused instead of recomputed.
    pub checkpoint: Option<PathBuf>,
    pub progress: bool,
}

/// Parameters of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub network: usize,
    pub kind: NetworkKind,
    pub assignment: AssignmentRule,
    pub brackets: u32,
    pub theta: f64,
    pub alpha: f64,
    pub temptation: f64,
}

/// Cells in output order: network, assignment, brackets, theta, alpha, T.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let g = &cfg.grid;
    let mut out = Vec::with_capacity(cfg.cell_count());
    for (network, &kind) in cfg.networks.iter().enumerate() {
        for &assignment in &g.assignment {
            for &brackets in &g.brackets {
                for &theta in &g.theta {
                    for &alpha in &g.alpha {
                        for &temptation in &g.temptation {
                            out.push(Cell {
                                index: out.len(),
                                network,
                                kind,
                                assignment,
                                brackets,
                                theta,
                                alpha,
                                temptation,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// The network instances used for `kind_index`, identical in every cell.
pub fn network_instances(
    cfg: &ExperimentConfig,
    kind_index: usize,
) -> Result<Vec<Network>, ExpError> {
    let kind = cfg.networks[kind_index];
    (0..cfg.network_instances)
        .into_par_iter()
        .map(|k| {
            let seed = derive(
                cfg.master_seed,
                &[NETWORK_STREAM, kind_index as u64, k as u64],
            );
            kind.generate(cfg.population, &mut rng_from_seed(seed))
                .map_err(|e| ExpError::Runtime(e.to_string()))
        })
        .collect()
}

pub fn replicate_seed(cfg: &ExperimentConfig, cell: usize, replicate: usize) -> u64 {
    derive(
        cfg.master_seed,
        &[REPLICATE_STREAM, cell as u64, replicate as u64],
    )
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Rows, ExpError> {
    cfg.validate()?;
    if cfg.experiment == ExperimentKind::Analytic {
        return Ok(Rows::Curve(critical_alpha_curve(
            &cfg.grid.theta,
            &cfg.grid.temptation,
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| ExpError::Runtime(e.to_string()))?;
    pool.install(|| run_cells(cfg, opts)).map(Rows::Cells)
}

fn run_cells(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>, ExpError> {
    let mut checkpoint = match &opts.checkpoint {
        Some(path) => Some(Checkpoint::open(path, cfg)?),
        None => None,
    };
    let grid = cells(cfg);
    let mut rows = Vec::with_capacity(grid.len());
    let mut networks: Option<(usize, Vec<Network>)> = None;
    let mut sets: Option<((usize, AssignmentRule), Vec<BeneficiaryAssignment>)> = None;

    for cell in &grid {
        if let Some(row) = checkpoint.as_ref().and_then(|c| c.done.get(&cell.index)) {
            rows.push(finish_row(cfg, row.clone()));
            continue;
        }
        if networks.as_ref().map(|(k, _)| *k) != Some(cell.network) {
            networks = Some((cell.network, network_instances(cfg, cell.network)?));
        }
        let nets = &networks.as_ref().expect("networks built").1;
        let key = (cell.network, cell.assignment);
        if cell.assignment != AssignmentRule::Random && sets.as_ref().map(|(k, _)| *k) != Some(key)
        {
            let built = nets
                .par_iter()
                .map(|net| {
                    BeneficiaryAssignment::assign(net, cell.assignment, &mut rng_from_seed(0))
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ExpError::Runtime(e.to_string()))?;
            sets = Some((key, built));
        }
        let shared = match &sets {
            Some((k, s)) if *k == key && cell.assignment != AssignmentRule::Random => {
                Some(s.as_slice())
            }
            _ => None,
        };

        let started = Instant::now();
        let mut row = match cfg.experiment {
            ExperimentKind::Simulation => simulate_cell(cfg, cell, nets, shared)?,
            ExperimentKind::Inequality => inequality_cell(cfg, cell, nets, shared)?,
            ExperimentKind::Analytic => unreachable!("handled before scheduling"),
        };
        row.duration_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        if let Some(cp) = checkpoint.as_mut() {
            cp.append(cell.index, &row)?;
        }
        if opts.progress {
            eprintln!(
                "[{}/{}] {} {} B={} theta={} alpha={} T={} ({:.0} ms)",
                cell.index + 1,
                grid.len(),
                row.network,
                row.assignment,
                row.brackets,
                row.theta,
                row.alpha,
                row.temptation,
                row.duration_ms.unwrap_or(0.0)
            );
        }
        rows.push(finish_row(cfg, row));
    }
    Ok(rows)
}

fn finish_row(cfg: &ExperimentConfig, mut row: ResultRow) -> ResultRow {
    if !cfg.record_timing {
        row.duration_ms = None;
    }
    row
}

fn empty_row(cell: &Cell) -> ResultRow {
    ResultRow {
        alpha: cell.alpha,
        assignment: cell.assignment,
        brackets: cell.brackets,
        network: cell.kind.to_string(),
        temptation: cell.temptation,
        theta: cell.theta,
        cooperation_level: None,
        coop_stderr: None,
        fixation_time_mean: None,
        fixation_time_stderr: None,
        fixation_count: None,
        coop_fixation_count: None,
        unfixed_count: None,
        replicate_count: None,
        var_payoff: None,
        var_fitness: None,
        variance_ratio: None,
        variance_ratio_stderr: None,
        ratio_defined_count: None,
        duration_ms: None,
    }
}

fn cell_policy(cfg: &ExperimentConfig, cell: &Cell) -> TaxPolicy {
    TaxPolicy {
        alpha: cell.alpha,
        theta: cell.theta,
        brackets: cell.brackets,
        legacy_two_bracket: cfg.legacy_two_bracket,
    }
}

/// Replicate outcomes of one cell, in replicate order.
pub fn cell_outcomes(
    cfg: &ExperimentConfig,
    cell: &Cell,
    nets: &[Network],
    shared: Option<&[BeneficiaryAssignment]>,
) -> Result<Vec<RunOutcome>, ExpError> {
    let game = GameParams::new(cell.temptation).map_err(|e| ExpError::Runtime(e.to_string()))?;
    let policy = cell_policy(cfg, cell);
    (0..cfg.replicates_per_cell)
        .into_par_iter()
        .map(|r| {
            let instance = r % nets.len();
            let params = DynamicsParams {
                beta: cfg.beta,
                max_iterations: cfg.max_iterations,
                rng_seed: replicate_seed(cfg, cell.index, r),
                resample_random_sets: cfg.resample_random_sets,
            };
            let net = &nets[instance];
            match shared {
                Some(sets) => run_replicate_with(net, &sets[instance], &policy, &game, &params),
                None => run_replicate(net, cell.assignment, &policy, &game, &params),
            }
            .map_err(|e| ExpError::Runtime(e.to_string()))
        })
        .collect()
}

fn simulate_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    nets: &[Network],
    shared: Option<&[BeneficiaryAssignment]>,
) -> Result<ResultRow, ExpError> {
    let outcomes = cell_outcomes(cfg, cell, nets, shared)?;
    let stats = aggregate(&outcomes).map_err(|e| ExpError::Runtime(e.to_string()))?;
    Ok(ResultRow {
        cooperation_level: Some(stats.cooperation_level),
        coop_stderr: Some(stats.coop_stderr),
        fixation_time_mean: stats.fixation_time_mean,
        fixation_time_stderr: stats.fixation_time_stderr,
        fixation_count: Some(stats.fixation_count),
        coop_fixation_count: Some(stats.coop_fixation_count),
        unfixed_count: Some(stats.unfixed_count()),
        replicate_count: Some(stats.replicate_count),
        ..empty_row(cell)
    })
}

/// Per-network variance ratios averaged over the instances.
fn inequality_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    nets: &[Network],
    shared: Option<&[BeneficiaryAssignment]>,
) -> Result<ResultRow, ExpError> {
    let game = GameParams::new(cell.temptation).map_err(|e| ExpError::Runtime(e.to_string()))?;
    let policy = cell_policy(cfg, cell);
    let reports = nets
        .par_iter()
        .enumerate()
        .map(|(k, net)| {
            let owned;
            let sets = match shared {
                Some(s) => &s[k],
                None => {
                    let seed = derive(cfg.master_seed, &[SET_STREAM, cell.index as u64, k as u64]);
                    owned = BeneficiaryAssignment::assign(
                        net,
                        cell.assignment,
                        &mut rng_from_seed(seed),
                    )
                    .map_err(|e| ExpError::Runtime(e.to_string()))?;
                    &owned
                }
            };
            inequality_ratio(net, sets, &policy, &game)
                .map_err(|e| ExpError::Runtime(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = |v: Vec<f64>| mean_stderr(&v);
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    let ratio_stats = mean(ratios.clone());
    Ok(ResultRow {
        var_payoff: mean(reports.iter().map(|r| r.var_payoff).collect()).map(|(m, _)| m),
        var_fitness: mean(reports.iter().map(|r| r.var_fitness).collect()).map(|(m, _)| m),
        variance_ratio: ratio_stats.map(|(m, _)| m),
        variance_ratio_stderr: ratio_stats.map(|(_, s)| s),
        ratio_defined_count: Some(ratios.len()),
        ..empty_row(cell)
    })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CheckpointLine {
    Header { config: ExperimentConfig },
    Cell { cell: usize, row: ResultRow },
}

/// Append-only record of finished cells.
struct Checkpoint {
    file: File,
    done: BTreeMap<usize, ResultRow>,
}

impl Checkpoint {
    fn open(path: &Path, cfg: &ExperimentConfig) -> Result<Self, ExpError> {
        let io = |source| ExpError::Io {
            path: path.to_path_buf(),
            source,
        };
        let key = comparable(cfg);
        let mut done = BTreeMap::new();
        let mut matches = false;
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for line in reader.lines() {
                let line = line.map_err(io)?;
                // a torn final line is dropped and its cell recomputed
                match serde_json::from_str::<CheckpointLine>(&line) {
                    Ok(CheckpointLine::Header { config }) => matches = comparable(&config) == key,
                    Ok(CheckpointLine::Cell { cell, row }) if matches => {
                        done.insert(cell, row);
                    }
                    _ => {}
                }
            }
        }
        let file = if matches {
            OpenOptions::new().append(true).open(path).map_err(io)?
        } else {
            done.clear();
            let mut f = File::create(path).map_err(io)?;
            let header = serde_json::to_string(&CheckpointLine::Header { config: key })?;
            writeln!(f, "{header}").map_err(io)?;
            f
        };
        Ok(Self { file, done })
    }

    fn append(&mut self, cell: usize, row: &ResultRow) -> Result<(), ExpError> {
        let line = serde_json::to_string(&CheckpointLine::Cell {
            cell,
            row: row.clone(),
        })?;
        writeln!(self.file, "{line}")
            .and_then(|_| self.file.flush())
            .map_err(|source| ExpError::Io {
                path: PathBuf::from("<checkpoint>"),
                source,
            })?;
        self.done.insert(cell, row.clone());
        Ok(())
    }
}

/// The config fields that determine results.
fn comparable(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.output = Default::default();
    c.record_timing = false;
    c
}
