//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's payoff, tax or fitness code.

#![allow(dead_code)]

use std::collections::VecDeque;

use taxgame::network::Network;
use taxgame::redistribution::AssignmentRule;
use taxgame::{BeneficiaryAssignment, Strategy};

pub fn adjacency(net: &Network) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); net.node_count()];
    for (a, b) in net.edges() {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Pairwise payoff with R = 1, P = 0, S = 1 - T.
pub fn pair_payoff(mine: Strategy, theirs: Strategy, t: f64) -> f64 {
    match (mine, theirs) {
        (Strategy::Cooperate, Strategy::Cooperate) => 1.0,
        (Strategy::Cooperate, Strategy::Defect) => 1.0 - t,
        (Strategy::Defect, Strategy::Cooperate) => t,
        (Strategy::Defect, Strategy::Defect) => 0.0,
    }
}

pub fn payoffs(net: &Network, strategies: &[Strategy], t: f64) -> Vec<f64> {
    adjacency(net)
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            nb.iter()
                .map(|&j| pair_payoff(strategies[i], strategies[j], t))
                .sum()
        })
        .collect()
}

/// Nodes at hop distance 1..=d from `i`, sorted.
pub fn within(net: &Network, i: usize, d: usize) -> Vec<usize> {
    let adj = adjacency(net);
    let mut dist = vec![usize::MAX; adj.len()];
    dist[i] = 0;
    let mut queue = VecDeque::from([i]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == d {
            continue;
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (0..adj.len()).filter(|&v| v != i && dist[v] <= d).collect()
}

/// Beneficiary sets rebuilt from the graph. Random sets are taken from the
/// library assignment after checking they are a valid degree-sized sample.
pub fn beneficiaries(net: &Network, assignment: &BeneficiaryAssignment) -> Vec<Vec<usize>> {
    let n = net.node_count();
    match assignment.rule() {
        AssignmentRule::Nearest => adjacency(net),
        AssignmentRule::Extended { d } => (0..n).map(|i| within(net, i, d)).collect(),
        AssignmentRule::Random => (0..n)
            .map(|i| {
                let mut set: Vec<usize> = assignment.set(i).iter().map(|&j| j as usize).collect();
                set.sort_unstable();
                assert_eq!(set.len(), net.degree(i), "random set size of {i}");
                assert!(
                    set.windows(2).all(|w| w[0] < w[1]),
                    "duplicate in random set of {i}"
                );
                assert!(!set.contains(&i), "agent {i} in its own random set");
                set
            })
            .collect(),
    }
}

/// Tax owed on payoff `pi`. Brackets are found by scanning bounds upward.
pub fn tax(pi: f64, alpha: f64, theta: f64, brackets: u32, legacy: bool) -> f64 {
    let single = |pi: f64| {
        if pi > theta {
            alpha * (pi - theta)
        } else {
            0.0
        }
    };
    match brackets {
        0 => 0.0,
        1 => {
            if pi > 0.0 {
                alpha * pi
            } else {
                0.0
            }
        }
        2 => single(pi),
        _ if legacy => single(pi),
        big_b => {
            let bf = big_b as f64;
            if pi > theta {
                return alpha * (pi - theta);
            }
            let mut bracket = 0;
            for b in 1..big_b {
                if pi > b as f64 * theta / bf {
                    bracket = b;
                }
            }
            if bracket == 0 {
                0.0
            } else {
                let b = bracket as f64;
                (b * alpha / bf) * (pi - b * theta / bf)
            }
        }
    }
}

/// Fitness from an explicit list of transfers.
pub fn ledger_fitness(
    payoffs: &[f64],
    sets: &[Vec<usize>],
    alpha: f64,
    theta: f64,
    brackets: u32,
    legacy: bool,
) -> Vec<f64> {
    let mut transfers: Vec<(usize, usize, f64)> = Vec::new();
    for (j, &pi) in payoffs.iter().enumerate() {
        let owed = tax(pi, alpha, theta, brackets, legacy);
        if owed == 0.0 {
            continue;
        }
        assert!(
            !sets[j].is_empty(),
            "agent {j} owes tax with nobody to receive it"
        );
        for &k in &sets[j] {
            transfers.push((j, k, owed / sets[j].len() as f64));
        }
    }
    let mut fitness = payoffs.to_vec();
    for (from, to, amount) in transfers {
        fitness[from] -= amount;
        fitness[to] += amount;
    }
    fitness
}
