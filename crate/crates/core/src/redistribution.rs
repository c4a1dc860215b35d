//! Taxation of payoff surplus and its redistribution to beneficiary sets.
//!
//! Each agent `j` contributes `contribution(Π_j)` to its beneficiary set
//! `B_j`, split equally among the members. Agent `i` never belongs to `B_i`.
//! Fitness is what remains after paying in plus the shares received:
//!
//! ```text
//! f_i = Π_i - c(Π_i) + Σ_{j : i ∈ B_j} c(Π_j) / |B_j|
//! ```

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::Network;

#[derive(Debug, Error, PartialEq)]
pub enum RedistributionError {
    #[error("invalid tax policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid assignment rule: {0}")]
    InvalidRule(String),
    #[error("agent {0} contributes {1} to an empty beneficiary set")]
    EmptyBeneficiarySet(usize, f64),
}

/// Taxation schedule.
///
/// `brackets == 0` disables taxation. `brackets == 2` (or the legacy flag)
/// is the single-threshold scheme: `alpha * max(Π - theta, 0)`. For other
/// `B`, bracket `b` covers `(bθ/B, (b+1)θ/B]` and pays `bα/B` on the amount
/// above its own lower bound; the top bracket (`Π > θ`) pays `α(Π - θ)`.
/// `B == 1` taxes every positive payoff at `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaxPolicy {
    pub alpha: f64,
    pub theta: f64,
    pub brackets: u32,
    #[serde(default)]
    pub legacy_two_bracket: bool,
}

impl TaxPolicy {
    pub fn single_threshold(alpha: f64, theta: f64) -> Self {
        Self {
            alpha,
            theta,
            brackets: 2,
            legacy_two_bracket: true,
        }
    }

    pub fn untaxed() -> Self {
        Self {
            alpha: 0.0,
            theta: 1.0,
            brackets: 0,
            legacy_two_bracket: false,
        }
    }

    pub fn with_brackets(alpha: f64, theta: f64, brackets: u32) -> Self {
        Self {
            alpha,
            theta,
            brackets,
            legacy_two_bracket: false,
        }
    }

    pub fn validate(&self) -> Result<(), RedistributionError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(RedistributionError::InvalidPolicy(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(RedistributionError::InvalidPolicy(format!(
                "theta must be finite and non-negative, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Lower bound of bracket `b`.
    pub fn bracket_floor(&self, b: u32) -> f64 {
        b as f64 * self.theta / self.brackets as f64
    }

    /// Rate applied in bracket `b`.
    pub fn bracket_rate(&self, b: u32) -> f64 {
        b as f64 * self.alpha / self.brackets as f64
    }

    /// Bracket holding payoff `pi` under the general schedule (`B >= 1`).
    pub fn bracket_of(&self, pi: f64) -> u32 {
        let big_b = self.brackets;
        debug_assert!(big_b >= 1);
        if pi > self.theta {
            return big_b;
        }
        if pi <= self.bracket_floor(1) {
            return 0;
        }
        let mut b = (((pi * big_b as f64) / self.theta).ceil() as u32).clamp(2, big_b) - 1;
        while b > 1 && pi <= self.bracket_floor(b) {
            b -= 1;
        }
        while b + 1 < big_b && pi > self.bracket_floor(b + 1) {
            b += 1;
        }
        b
    }

    /// Amount paid in by an agent with accumulated payoff `pi`.
    #[inline]
    pub fn contribution(&self, pi: f64) -> f64 {
        match self.brackets {
            0 => 0.0,
            1 => self.alpha * pi.max(0.0),
            2 => self.alpha * (pi - self.theta).max(0.0),
            _ if self.legacy_two_bracket => self.alpha * (pi - self.theta).max(0.0),
            _ => match self.bracket_of(pi) {
                0 => 0.0,
                b if b == self.brackets => self.alpha * (pi - self.theta),
                b => self.bracket_rate(b) * (pi - self.bracket_floor(b)),
            },
        }
    }

    pub fn is_inert(&self) -> bool {
        self.brackets == 0 || self.alpha == 0.0
    }
}

/// How beneficiary sets are chosen.
///
/// Serialized as `nearest`, `random` or `extended:<d>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AssignmentRule {
    /// `B_i` is the neighborhood of `i`.
    Nearest,
    /// `z_i` agents other than `i`, uniformly at random.
    Random,
    /// Everyone within `d` hops of `i`.
    Extended { d: usize },
}

impl AssignmentRule {
    pub fn validate(&self) -> Result<(), RedistributionError> {
        match self {
            AssignmentRule::Extended { d: 0 } => Err(RedistributionError::InvalidRule(
                "extended distance must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AssignmentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignmentRule::Nearest => f.write_str("nearest"),
            AssignmentRule::Random => f.write_str("random"),
            AssignmentRule::Extended { d } => write!(f, "extended:{d}"),
        }
    }
}

impl FromStr for AssignmentRule {
    type Err = RedistributionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rule = match s {
            "nearest" => AssignmentRule::Nearest,
            "random" => AssignmentRule::Random,
            _ => {
                let d = s
                    .strip_prefix("extended:")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| {
                        RedistributionError::InvalidRule(format!("unknown rule {s:?}"))
                    })?;
                AssignmentRule::Extended { d }
            }
        };
        rule.validate()?;
        Ok(rule)
    }
}

impl TryFrom<String> for AssignmentRule {
    type Error = RedistributionError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AssignmentRule> for String {
    fn from(rule: AssignmentRule) -> Self {
        rule.to_string()
    }
}

/// Compressed per-agent index lists.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Lists {
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl Lists {
    fn from_nested(nested: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(nested.len() + 1);
        offsets.push(0);
        let mut items = Vec::with_capacity(nested.iter().map(Vec::len).sum());
        for list in nested {
            items.extend(list);
            offsets.push(items.len());
        }
        Self { offsets, items }
    }

    #[inline]
    fn get(&self, i: usize) -> &[u32] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Reverse index: `j ∈ out[i]` iff `i ∈ self[j]`, each list ascending.
    fn transpose(&self) -> Self {
        let n = self.offsets.len() - 1;
        let mut counts = vec![0usize; n + 1];
        for &i in &self.items {
            counts[i as usize + 1] += 1;
        }
        for k in 1..=n {
            counts[k] += counts[k - 1];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut items = vec![0u32; self.items.len()];
        for j in 0..n {
            for &i in self.get(j) {
                items[cursor[i as usize]] = j as u32;
                cursor[i as usize] += 1;
            }
        }
        Self { offsets, items }
    }
}

/// Beneficiary sets with their reverse (contributor) index.
#[derive(Clone, Debug, PartialEq)]
pub struct BeneficiaryAssignment {
    rule: AssignmentRule,
    sets: Lists,
    contributors: Lists,
}

impl BeneficiaryAssignment {
    pub fn assign<R: Rng + ?Sized>(
        net: &Network,
        rule: AssignmentRule,
        rng: &mut R,
    ) -> Result<Self, RedistributionError> {
        rule.validate()?;
        let n = net.node_count();
        let sets: Vec<Vec<u32>> = match rule {
            AssignmentRule::Nearest => (0..n).map(|i| net.neighbors(i).to_vec()).collect(),
            AssignmentRule::Extended { d } => (0..n).map(|i| net.ball(i, d)).collect(),
            AssignmentRule::Random => {
                if n > 0 && net.max_degree() > n - 1 {
                    return Err(RedistributionError::InvalidRule(
                        "random sets larger than the rest of the population".into(),
                    ));
                }
                (0..n)
                    .map(|i| random_set(n, i, net.degree(i), rng))
                    .collect()
            }
        };
        Ok(Self::from_sets(rule, sets))
    }

    /// Build from explicit sets. Sets must not contain their own owner.
    pub fn from_sets(rule: AssignmentRule, sets: Vec<Vec<u32>>) -> Self {
        debug_assert!(sets
            .iter()
            .enumerate()
            .all(|(i, s)| !s.contains(&(i as u32))));
        let sets = Lists::from_nested(sets);
        let contributors = sets.transpose();
        Self {
            rule,
            sets,
            contributors,
        }
    }

    /// Redraw random sets in place; other rules are left unchanged.
    pub fn resample<R: Rng + ?Sized>(&mut self, net: &Network, rng: &mut R) {
        if self.rule != AssignmentRule::Random {
            return;
        }
        let n = net.node_count();
        let sets = (0..n)
            .map(|i| random_set(n, i, net.degree(i), rng))
            .collect();
        *self = Self::from_sets(AssignmentRule::Random, sets);
    }

    pub fn rule(&self) -> AssignmentRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.sets.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `B_i`.
    #[inline]
    pub fn set(&self, i: usize) -> &[u32] {
        self.sets.get(i)
    }

    #[inline]
    pub fn set_size(&self, i: usize) -> usize {
        self.sets.offsets[i + 1] - self.sets.offsets[i]
    }

    /// Agents `j` with `i ∈ B_j`, ascending.
    #[inline]
    pub fn contributors(&self, i: usize) -> &[u32] {
        self.contributors.get(i)
    }
}

/// `size` distinct agents drawn uniformly from everyone except `owner`.
fn random_set<R: Rng + ?Sized>(n: usize, owner: usize, size: usize, rng: &mut R) -> Vec<u32> {
    if size == 0 {
        return Vec::new();
    }
    let mut set: Vec<u32> = sample(rng, n - 1, size)
        .into_iter()
        .map(|k| if k < owner { k as u32 } else { k as u32 + 1 })
        .collect();
    set.sort_unstable();
    set
}

#[inline]
fn share(j: usize, payoffs: &[f64], assignment: &BeneficiaryAssignment, policy: &TaxPolicy) -> f64 {
    let c = policy.contribution(payoffs[j]);
    if c == 0.0 {
        return 0.0;
    }
    let size = assignment.set_size(j);
    debug_assert!(size > 0, "agent {j} contributes to an empty set");
    c / size as f64
}

/// Fitness of every agent after taxation and redistribution.
pub fn compute_fitness(
    payoffs: &[f64],
    assignment: &BeneficiaryAssignment,
    policy: &TaxPolicy,
) -> Result<Vec<f64>, RedistributionError> {
    assert_eq!(payoffs.len(), assignment.len());
    let contributions: Vec<f64> = payoffs.iter().map(|&p| policy.contribution(p)).collect();
    let mut fitness: Vec<f64> = payoffs
        .iter()
        .zip(&contributions)
        .map(|(&p, &c)| p - c)
        .collect();
    for (j, &c) in contributions.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let members = assignment.set(j);
        if members.is_empty() {
            return Err(RedistributionError::EmptyBeneficiarySet(j, c));
        }
        let portion = c / members.len() as f64;
        for &i in members {
            fitness[i as usize] += portion;
        }
    }
    Ok(fitness)
}

/// Fitness of a single agent. Reads only `Π_i` and the payoffs of `i`'s
/// contributors; agrees exactly with [`compute_fitness`].
#[inline]
pub fn fitness_of(
    i: usize,
    payoffs: &[f64],
    assignment: &BeneficiaryAssignment,
    policy: &TaxPolicy,
) -> f64 {
    let pi = payoffs[i];
    if policy.is_inert() {
        return pi;
    }
    let mut f = pi - policy.contribution(pi);
    for &j in assignment.contributors(i) {
        f += share(j as usize, payoffs, assignment, policy);
    }
    f
}
