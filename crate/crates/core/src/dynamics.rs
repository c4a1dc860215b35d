//! Asynchronous pairwise-comparison dynamics.
//!
//! Payoffs are kept in an always-valid cache that is patched locally on every
//! strategy flip, so one imitation step costs `O(z)` rather than a replay of
//! every game in the population.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::game::Strategy;
use crate::game::{payoff, GameParams};
use crate::network::Network;
use crate::redistribution::{
    fitness_of, AssignmentRule, BeneficiaryAssignment, RedistributionError, TaxPolicy,
};
use crate::seed::{rng_from_seed, SimRng};

/// Default iteration cap per replicate.
pub const DEFAULT_MAX_ITERATIONS: u64 = 2_500_000;

/// Beyond this selection-weighted fitness gap the Fermi rule is saturated.
const SIGMOID_SATURATION: f64 = 700.0;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid dynamics parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Redistribution(#[from] RedistributionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Intensity of selection.
    pub beta: f64,
    pub max_iterations: u64,
    pub rng_seed: u64,
    /// Redraw random beneficiary sets every generation instead of once.
    #[serde(default)]
    pub resample_random_sets: bool,
}

impl DynamicsParams {
    pub fn new(beta: f64, max_iterations: u64, rng_seed: u64) -> Self {
        Self {
            beta,
            max_iterations,
            rng_seed,
            resample_random_sets: false,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(DynamicsError::InvalidParameter(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Strategy profile with cached neighbor counts and accumulated payoffs.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationState {
    strategies: Vec<Strategy>,
    coop_neighbors: Vec<u32>,
    payoffs: Vec<f64>,
    coop_count: usize,
    cache_valid: bool,
}

impl PopulationState {
    pub fn new(net: &Network, strategies: Vec<Strategy>, game: &GameParams) -> Self {
        assert_eq!(strategies.len(), net.node_count());
        let mut state = Self {
            coop_count: 0,
            coop_neighbors: vec![0; strategies.len()],
            payoffs: vec![0.0; strategies.len()],
            strategies,
            cache_valid: false,
        };
        state.refresh(net, game);
        state
    }

    pub fn monomorphic(net: &Network, strategy: Strategy, game: &GameParams) -> Self {
        Self::new(net, vec![strategy; net.node_count()], game)
    }

    /// Exactly `cooperators` cooperators placed uniformly at random.
    pub fn random<R: Rng + ?Sized>(
        net: &Network,
        cooperators: usize,
        game: &GameParams,
        rng: &mut R,
    ) -> Self {
        let n = net.node_count();
        let mut strategies = vec![Strategy::Defect; n];
        for k in sample(rng, n, cooperators.min(n)) {
            strategies[k] = Strategy::Cooperate;
        }
        Self::new(net, strategies, game)
    }

    /// Rebuild every cache from the strategy profile.
    pub fn refresh(&mut self, net: &Network, game: &GameParams) {
        self.coop_count = self.strategies.iter().filter(|s| s.is_cooperator()).count();
        for i in 0..self.strategies.len() {
            self.coop_neighbors[i] = net
                .neighbors(i)
                .iter()
                .filter(|&&j| self.strategies[j as usize].is_cooperator())
                .count() as u32;
            self.payoffs[i] = self.payoff_from_counts(i, net.degree(i), game);
        }
        self.cache_valid = true;
    }

    /// Overwrite one strategy without touching the caches.
    pub fn set_strategy_raw(&mut self, i: usize, s: Strategy) {
        self.strategies[i] = s;
        self.cache_valid = false;
    }

    #[inline]
    fn payoff_from_counts(&self, i: usize, degree: usize, game: &GameParams) -> f64 {
        let c = self.coop_neighbors[i] as f64;
        let d = (degree - self.coop_neighbors[i] as usize) as f64;
        match self.strategies[i] {
            Strategy::Cooperate => c * game.reward() + d * game.sucker(),
            Strategy::Defect => c * game.temptation() + d * game.punishment(),
        }
    }

    /// Switch `i` to `s` and patch the payoffs of `i` and its neighbors.
    pub fn flip(&mut self, i: usize, s: Strategy, net: &Network, game: &GameParams) {
        debug_assert!(self.cache_valid);
        if self.strategies[i] == s {
            return;
        }
        self.strategies[i] = s;
        let joined = s.is_cooperator();
        if joined {
            self.coop_count += 1;
        } else {
            self.coop_count -= 1;
        }
        for &k in net.neighbors(i) {
            let k = k as usize;
            if joined {
                self.coop_neighbors[k] += 1;
            } else {
                self.coop_neighbors[k] -= 1;
            }
            self.payoffs[k] = self.payoff_from_counts(k, net.degree(k), game);
        }
        self.payoffs[i] = self.payoff_from_counts(i, net.degree(i), game);
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn strategy(&self, i: usize) -> Strategy {
        self.strategies[i]
    }

    /// Cached accumulated payoffs.
    pub fn payoffs(&self) -> &[f64] {
        debug_assert!(self.cache_valid, "payoff cache is stale");
        &self.payoffs
    }

    pub fn coop_count(&self) -> usize {
        self.coop_count
    }

    pub fn cache_valid(&self) -> bool {
        self.cache_valid
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn coop_fraction(&self) -> f64 {
        if self.strategies.is_empty() {
            return 0.0;
        }
        self.coop_count as f64 / self.strategies.len() as f64
    }

    pub fn is_monomorphic(&self) -> bool {
        self.coop_count == 0 || self.coop_count == self.strategies.len()
    }
}

/// Accumulated payoff of every agent by direct per-edge summation.
pub fn accumulate_payoffs(strategies: &[Strategy], net: &Network, game: &GameParams) -> Vec<f64> {
    (0..net.node_count())
        .map(|i| {
            net.neighbors(i)
                .iter()
                .map(|&j| payoff(strategies[i], strategies[j as usize], game))
                .sum()
        })
        .collect()
}

/// Fermi rule: probability that an agent with fitness `f_focal` copies one
/// with fitness `f_model`.
#[inline]
pub fn imitation_probability(f_focal: f64, f_model: f64, beta: f64) -> f64 {
    let x = beta * (f_model - f_focal);
    if x > SIGMOID_SATURATION {
        1.0
    } else if x < -SIGMOID_SATURATION {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Everything a step reads besides the population itself.
#[derive(Clone, Copy, Debug)]
pub struct Environment<'a> {
    pub net: &'a Network,
    pub assignment: &'a BeneficiaryAssignment,
    pub policy: &'a TaxPolicy,
    pub game: &'a GameParams,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub focal: usize,
    pub model: Option<usize>,
    pub flipped: bool,
}

/// One imitation event: a uniformly drawn focal agent compares itself with a
/// uniformly drawn neighbor and copies it with the Fermi probability.
pub fn step<R: Rng + ?Sized>(
    state: &mut PopulationState,
    env: &Environment<'_>,
    beta: f64,
    rng: &mut R,
) -> StepReport {
    let n = state.len();
    let focal = rng.random_range(0..n);
    let neighbors = env.net.neighbors(focal);
    if neighbors.is_empty() {
        return StepReport {
            focal,
            model: None,
            flipped: false,
        };
    }
    let model = neighbors[rng.random_range(0..neighbors.len())] as usize;
    let target = state.strategies[model];
    if state.strategies[focal] == target {
        return StepReport {
            focal,
            model: Some(model),
            flipped: false,
        };
    }
    let payoffs = state.payoffs();
    let f_focal = fitness_of(focal, payoffs, env.assignment, env.policy);
    let f_model = fitness_of(model, payoffs, env.assignment, env.policy);
    let p = imitation_probability(f_focal, f_model, beta);
    let flipped = rng.random::<f64>() < p;
    if flipped {
        state.flip(focal, target, env.net, env.game);
    }
    StepReport {
        focal,
        model: Some(model),
        flipped,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub final_coop_fraction: f64,
    pub fixated: bool,
    /// Iterations to absorption divided by the population size.
    pub fixation_generation: Option<f64>,
    pub iterations_used: u64,
}

impl RunOutcome {
    /// True when the population absorbed into all-cooperate.
    pub fn fixated_cooperation(&self) -> bool {
        self.fixated && self.final_coop_fraction == 1.0
    }
}

/// Iterate `step` from `state` until absorption or the iteration cap.
pub fn evolve<R: Rng + ?Sized>(
    state: &mut PopulationState,
    env: &Environment<'_>,
    params: &DynamicsParams,
    rng: &mut R,
) -> RunOutcome {
    let n = state.len();
    let mut iterations: u64 = 0;
    while iterations < params.max_iterations && !state.is_monomorphic() {
        step(state, env, params.beta, rng);
        iterations += 1;
        #[cfg(debug_assertions)]
        if iterations.is_multiple_of(10_000) {
            let scanned = state
                .strategies()
                .iter()
                .filter(|s| s.is_cooperator())
                .count();
            assert_eq!(scanned, state.coop_count(), "cooperator count drifted");
        }
    }
    outcome(state, iterations, n)
}

fn outcome(state: &PopulationState, iterations: u64, n: usize) -> RunOutcome {
    let fixated = n > 0 && state.is_monomorphic();
    RunOutcome {
        final_coop_fraction: state.coop_fraction(),
        fixated,
        fixation_generation: fixated.then(|| iterations as f64 / n as f64),
        iterations_used: iterations,
    }
}

/// One independent simulation from a half-cooperator start. Beneficiary sets
/// are built from the replicate's own random stream.
pub fn run_replicate(
    net: &Network,
    rule: AssignmentRule,
    policy: &TaxPolicy,
    game: &GameParams,
    params: &DynamicsParams,
) -> Result<RunOutcome, DynamicsError> {
    params.validate()?;
    policy.validate()?;
    let mut rng = rng_from_seed(params.rng_seed);
    let assignment = BeneficiaryAssignment::assign(net, rule, &mut rng)?;
    Ok(run_from(net, &assignment, policy, game, params, &mut rng))
}

/// Like [`run_replicate`] but reuses a prebuilt assignment for rules that
/// need no randomness. Random rules still draw their own sets.
pub fn run_replicate_with(
    net: &Network,
    assignment: &BeneficiaryAssignment,
    policy: &TaxPolicy,
    game: &GameParams,
    params: &DynamicsParams,
) -> Result<RunOutcome, DynamicsError> {
    if assignment.rule() == AssignmentRule::Random {
        return run_replicate(net, AssignmentRule::Random, policy, game, params);
    }
    params.validate()?;
    policy.validate()?;
    let mut rng = rng_from_seed(params.rng_seed);
    Ok(run_from(net, assignment, policy, game, params, &mut rng))
}

fn run_from(
    net: &Network,
    assignment: &BeneficiaryAssignment,
    policy: &TaxPolicy,
    game: &GameParams,
    params: &DynamicsParams,
    rng: &mut SimRng,
) -> RunOutcome {
    let n = net.node_count();
    let mut state = PopulationState::random(net, n / 2, game, rng);
    let resample = params.resample_random_sets && assignment.rule() == AssignmentRule::Random;
    if !resample {
        let env = Environment {
            net,
            assignment,
            policy,
            game,
        };
        return evolve(&mut state, &env, params, rng);
    }
    // Redraw the random sets once per generation.
    let mut sets = assignment.clone();
    let mut used = 0u64;
    loop {
        let chunk = (n as u64).min(params.max_iterations - used);
        let env = Environment {
            net,
            assignment: &sets,
            policy,
            game,
        };
        let sub = DynamicsParams {
            max_iterations: chunk,
            ..*params
        };
        let part = evolve(&mut state, &env, &sub, rng);
        used += part.iterations_used;
        if part.fixated || used >= params.max_iterations || chunk == 0 {
            return outcome(&state, used, n);
        }
        sets.resample(net, rng);
    }
}
