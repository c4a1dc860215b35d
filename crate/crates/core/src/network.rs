//! Interaction structures: homogeneous random graphs and scale-free
//! (preferential attachment) networks, stored as immutable CSR adjacency.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Swaps performed per edge when randomizing a ring lattice.
pub const SWAPS_PER_EDGE: usize = 10;

/// Regeneration attempts before giving up on a connected homogeneous graph.
const MAX_REGENERATIONS: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("invalid network parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no connected graph found after {0} attempts")]
    Disconnected(usize),
}

/// Which generator to use, with its shape parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkKind {
    /// Every node has exactly `degree` neighbors, links randomized.
    HomogeneousRandom { degree: usize },
    /// Growth with preferential attachment, `m` links per new node.
    ScaleFree { m: usize },
}

impl NetworkKind {
    pub fn label(&self) -> &'static str {
        match self {
            NetworkKind::HomogeneousRandom { .. } => "homogeneous",
            NetworkKind::ScaleFree { .. } => "scale_free",
        }
    }

    pub fn validate(&self, node_count: usize) -> Result<(), NetworkError> {
        match *self {
            NetworkKind::HomogeneousRandom { degree } => check_homogeneous(node_count, degree),
            NetworkKind::ScaleFree { m } => check_scale_free(node_count, m),
        }
    }

    pub fn generate<R: Rng + ?Sized>(
        &self,
        node_count: usize,
        rng: &mut R,
    ) -> Result<Network, NetworkError> {
        match *self {
            NetworkKind::HomogeneousRandom { degree } => {
                generate_homogeneous(node_count, degree, rng)
            }
            NetworkKind::ScaleFree { m } => generate_scale_free(node_count, m, rng),
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkKind::HomogeneousRandom { degree } => write!(f, "homogeneous(z={degree})"),
            NetworkKind::ScaleFree { m } => write!(f, "scale_free(m={m})"),
        }
    }
}

/// Undirected simple graph. Neighbor lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Network {
    /// Build from an undirected edge list. Each edge must appear once.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Self, NetworkError> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            let (a, b) = (a as usize, b as usize);
            if a >= node_count || b >= node_count {
                return Err(NetworkError::InvalidParameter(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(NetworkError::InvalidParameter(format!("self-loop at {a}")));
            }
            adjacency[a].push(b as u32);
            adjacency[b].push(a as u32);
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(NetworkError::InvalidParameter(format!(
                    "duplicate edge at node {i}"
                )));
            }
        }
        Ok(Self::from_sorted_adjacency(adjacency))
    }

    fn from_sorted_adjacency(adjacency: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(adjacency.iter().map(Vec::len).sum());
        for list in adjacency {
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count())
            .map(|i| self.degree(i))
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| (i as u32) < j)
                .map(move |&j| (i as u32, j))
        })
    }

    pub fn average_degree(&self) -> f64 {
        if self.node_count() == 0 {
            return 0.0;
        }
        self.neighbors.len() as f64 / self.node_count() as f64
    }

    /// Fraction of nodes with each degree.
    pub fn degree_distribution(&self) -> BTreeMap<usize, f64> {
        let mut counts = BTreeMap::new();
        for i in 0..self.node_count() {
            *counts.entry(self.degree(i)).or_insert(0usize) += 1;
        }
        let total = self.node_count() as f64;
        counts
            .into_iter()
            .map(|(z, c)| (z, c as f64 / total))
            .collect()
    }

    /// All nodes within `1..=d` hops of `i`, excluding `i`, sorted.
    pub fn ball(&self, i: usize, d: usize) -> Vec<u32> {
        assert!(d >= 1, "ball radius must be at least 1");
        if d == 1 {
            return self.neighbors(i).to_vec();
        }
        let mut dist = vec![u32::MAX; self.node_count()];
        dist[i] = 0;
        let mut queue = VecDeque::from([i]);
        let mut out = Vec::new();
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du as usize == d {
                continue;
            }
            for &v in self.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    out.push(v);
                    queue.push_back(v as usize);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    reached += 1;
                    stack.push(v as usize);
                }
            }
        }
        reached == n
    }

    /// Canonical edge-list text: a `# nodes Z` header then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes {}\n", self.node_count());
        for (a, b) in self.edges() {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    /// Parse whitespace-separated `i j` pairs, one per line. Blank lines and
    /// `#` comments are skipped; a `# nodes Z` comment fixes the node count,
    /// otherwise it is one more than the largest index seen.
    pub fn from_edge_list(text: &str) -> Result<Self, NetworkError> {
        let mut declared: Option<usize> = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut lines_of: Vec<usize> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("nodes") {
                    let n = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| {
                        NetworkError::Parse {
                            line: line_no,
                            message: "malformed node-count header".into(),
                        }
                    })?;
                    declared = Some(n);
                }
                continue;
            }
            let parse_err = |message: String| NetworkError::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(format!("expected two indices, got {:?}", line)));
            }
            let a: u32 = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad index {:?}", fields[0])))?;
            let b: u32 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad index {:?}", fields[1])))?;
            if a == b {
                return Err(parse_err(format!("self-loop at node {a}")));
            }
            edges.push((a.min(b), a.max(b)));
            lines_of.push(line_no);
        }

        let node_count = match declared {
            Some(n) => n,
            None => edges
                .iter()
                .map(|&(_, b)| b as usize + 1)
                .max()
                .unwrap_or(0),
        };
        let mut seen = std::collections::HashMap::with_capacity(edges.len());
        for (&(a, b), &line) in edges.iter().zip(&lines_of) {
            if b as usize >= node_count {
                return Err(NetworkError::Parse {
                    line,
                    message: format!("index {b} out of range for {node_count} nodes"),
                });
            }
            if let Some(first) = seen.insert((a, b), line) {
                return Err(NetworkError::Parse {
                    line,
                    message: format!("duplicate edge {a} {b} (first on line {first})"),
                });
            }
        }
        Network::from_edges(node_count, &edges)
    }
}

fn check_homogeneous(node_count: usize, degree: usize) -> Result<(), NetworkError> {
    if degree < 2 {
        return Err(NetworkError::InvalidParameter(format!(
            "degree must be at least 2, got {degree}"
        )));
    }
    if !(node_count * degree).is_multiple_of(2) {
        return Err(NetworkError::InvalidParameter(format!(
            "node count {node_count} times degree {degree} must be even"
        )));
    }
    if node_count < degree + 1 {
        return Err(NetworkError::InvalidParameter(format!(
            "{node_count} nodes cannot carry degree {degree}"
        )));
    }
    Ok(())
}

fn check_scale_free(node_count: usize, m: usize) -> Result<(), NetworkError> {
    if node_count <= 3 {
        return Err(NetworkError::InvalidParameter(format!(
            "scale-free networks need more than 3 nodes, got {node_count}"
        )));
    }
    if m == 0 || m >= node_count {
        return Err(NetworkError::InvalidParameter(format!(
            "attachment count m={m} must lie in 1..{node_count}"
        )));
    }
    Ok(())
}

/// Ring lattice of even degree, plus diametric chords when the degree is odd.
pub fn ring_lattice(node_count: usize, degree: usize) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity(node_count * degree / 2);
    for i in 0..node_count {
        for k in 1..=degree / 2 {
            edges.push((i as u32, ((i + k) % node_count) as u32));
        }
    }
    if degree % 2 == 1 {
        let half = node_count / 2;
        for i in 0..half {
            edges.push((i as u32, (i + half) as u32));
        }
    }
    edges
}

/// Random regular graph: a ring lattice randomized by degree-preserving
/// double-edge swaps. Disconnected results are discarded and redrawn.
pub fn generate_homogeneous<R: Rng + ?Sized>(
    node_count: usize,
    degree: usize,
    rng: &mut R,
) -> Result<Network, NetworkError> {
    check_homogeneous(node_count, degree)?;
    for _ in 0..MAX_REGENERATIONS {
        let mut edges = ring_lattice(node_count, degree);
        let mut adjacency = vec![Vec::with_capacity(degree); node_count];
        for &(a, b) in &edges {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        rewire(&mut edges, &mut adjacency, rng);
        debug_assert!(adjacency.iter().all(|l| l.len() == degree));
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        let net = Network::from_sorted_adjacency(adjacency);
        if net.is_connected() {
            return Ok(net);
        }
    }
    Err(NetworkError::Disconnected(MAX_REGENERATIONS))
}

/// Performs `SWAPS_PER_EDGE * |E|` successful double-edge swaps, skipping
/// swaps that would create self-loops or multi-edges. Complete graphs admit no
/// swap and are returned untouched.
fn rewire<R: Rng + ?Sized>(edges: &mut [(u32, u32)], adjacency: &mut [Vec<u32>], rng: &mut R) {
    let n = adjacency.len();
    let m = edges.len();
    if m < 2 || m == n * (n - 1) / 2 {
        return;
    }
    let target = SWAPS_PER_EDGE * m;
    let max_attempts = 100 * target;
    let mut done = 0;
    let mut attempts = 0;
    while done < target && attempts < max_attempts {
        attempts += 1;
        let e1 = rng.random_range(0..m);
        let e2 = rng.random_range(0..m);
        if e1 == e2 {
            continue;
        }
        let (a, b) = edges[e1];
        let (mut c, mut d) = edges[e2];
        if rng.random_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        // (a,b),(c,d) -> (a,d),(c,b)
        if a == d || c == b {
            continue;
        }
        if adjacency[a as usize].contains(&d) || adjacency[c as usize].contains(&b) {
            continue;
        }
        replace(&mut adjacency[a as usize], b, d);
        replace(&mut adjacency[b as usize], a, c);
        replace(&mut adjacency[c as usize], d, b);
        replace(&mut adjacency[d as usize], c, a);
        edges[e1] = (a, d);
        edges[e2] = (c, b);
        done += 1;
    }
}

fn replace(list: &mut [u32], old: u32, new: u32) {
    let pos = list
        .iter()
        .position(|&x| x == old)
        .expect("edge endpoints out of sync");
    list[pos] = new;
}

/// Preferential attachment grown from a triangle on nodes 0..=2. Node `v`
/// links to `min(m, v)` distinct earlier nodes drawn with probability
/// proportional to their degree before `v` arrived.
pub fn generate_scale_free<R: Rng + ?Sized>(
    node_count: usize,
    m: usize,
    rng: &mut R,
) -> Result<Network, NetworkError> {
    check_scale_free(node_count, m)?;
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); node_count];
    // One entry per edge endpoint, so a uniform pick is degree-weighted.
    let mut stubs: Vec<u32> = Vec::with_capacity(2 * (3 + m * node_count));
    for (a, b) in [(0u32, 1u32), (0, 2), (1, 2)] {
        adjacency[a as usize].push(b);
        adjacency[b as usize].push(a);
        stubs.extend([a, b]);
    }
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for v in 3..node_count {
        targets.clear();
        if m >= v {
            targets.extend(0..v as u32);
        } else {
            while targets.len() < m {
                let t = stubs[rng.random_range(0..stubs.len())];
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
        }
        for &t in &targets {
            adjacency[v].push(t);
            adjacency[t as usize].push(v as u32);
            stubs.extend([v as u32, t]);
        }
    }
    for list in adjacency.iter_mut() {
        list.sort_unstable();
    }
    Ok(Network::from_sorted_adjacency(adjacency))
}
