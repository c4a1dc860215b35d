//! Evolutionary Prisoner's Dilemma on complex networks with local wealth
//! redistribution.
//!
//! Agents on a [`network::Network`] play the one-shot game with every
//! neighbor, pay a share of their surplus into a beneficiary set
//! ([`redistribution`]), and imitate neighbors by the Fermi rule
//! ([`dynamics`]). [`metrics`] turns replicate outcomes into cooperation
//! levels, fixation times and inequality ratios; [`expcli`] runs parameter
//! grids and writes results.

pub mod dynamics;
pub mod expcli;
pub mod game;
pub mod metrics;
pub mod network;
pub mod redistribution;
pub mod seed;

pub use dynamics::{run_replicate, DynamicsParams, PopulationState, RunOutcome, Strategy};
pub use game::{GameClass, GameParams};
pub use metrics::{aggregate, AggregateStats, InequalityReport};
pub use network::{Network, NetworkKind};
pub use redistribution::{AssignmentRule, BeneficiaryAssignment, TaxPolicy};
