//! Observables aggregated over replicates: cooperation level, fixation
//! times, and the fitness-to-payoff variance ratio.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{accumulate_payoffs, RunOutcome, Strategy};
use crate::game::GameParams;
use crate::network::Network;
use crate::redistribution::{
    compute_fitness, BeneficiaryAssignment, RedistributionError, TaxPolicy,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot aggregate an empty outcome list")]
    Empty,
    #[error(transparent)]
    Redistribution(#[from] RedistributionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    /// Mean final cooperator fraction.
    pub cooperation_level: f64,
    /// Standard error of the mean (sample standard deviation / sqrt n).
    pub coop_stderr: f64,
    /// Mean generations to absorption over fixated replicates only.
    pub fixation_time_mean: Option<f64>,
    pub fixation_time_stderr: Option<f64>,
    pub fixation_count: usize,
    /// Replicates absorbed into all-cooperate.
    pub coop_fixation_count: usize,
    pub replicate_count: usize,
}

impl AggregateStats {
    /// Replicates that hit the iteration cap before absorbing.
    pub fn unfixed_count(&self) -> usize {
        self.replicate_count - self.fixation_count
    }

    /// Fraction of replicates that ended in all-cooperate.
    pub fn coop_fixation_probability(&self) -> f64 {
        self.coop_fixation_count as f64 / self.replicate_count as f64
    }
}

/// Mean and standard error of the mean. `None` for an empty sample.
pub fn mean_stderr(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    Some((mean, sd / (n as f64).sqrt()))
}

/// Summarize replicate outcomes. Order of `outcomes` only affects rounding.
pub fn aggregate(outcomes: &[RunOutcome]) -> Result<AggregateStats, MetricsError> {
    // sort so the summation order, and hence the bits, are permutation-invariant
    let mut fractions: Vec<f64> = outcomes.iter().map(|o| o.final_coop_fraction).collect();
    fractions.sort_by(f64::total_cmp);
    let (cooperation_level, coop_stderr) = mean_stderr(&fractions).ok_or(MetricsError::Empty)?;
    let mut times: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.fixation_generation)
        .collect();
    times.sort_by(f64::total_cmp);
    let fixation = mean_stderr(&times);
    Ok(AggregateStats {
        cooperation_level,
        coop_stderr,
        fixation_time_mean: fixation.map(|(m, _)| m),
        fixation_time_stderr: fixation.map(|(_, s)| s),
        fixation_count: times.len(),
        coop_fixation_count: outcomes.iter().filter(|o| o.fixated_cooperation()).count(),
        replicate_count: outcomes.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub var_payoff: f64,
    pub var_fitness: f64,
    /// `var_fitness / var_payoff`; `None` when payoffs do not vary.
    pub ratio: Option<f64>,
}

/// Population variance (divides by the number of values).
pub fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Wealth inequality before and after redistribution in the all-cooperator
/// population on `net`.
pub fn inequality_ratio(
    net: &Network,
    assignment: &BeneficiaryAssignment,
    policy: &TaxPolicy,
    game: &GameParams,
) -> Result<InequalityReport, MetricsError> {
    let strategies = vec![Strategy::Cooperate; net.node_count()];
    let payoffs = accumulate_payoffs(&strategies, net, game);
    let fitness = compute_fitness(&payoffs, assignment, policy)?;
    let var_payoff = population_variance(&payoffs);
    let var_fitness = population_variance(&fitness);
    Ok(InequalityReport {
        var_payoff,
        var_fitness,
        ratio: (var_payoff > 0.0).then(|| var_fitness / var_payoff),
    })
}
