//! Weighted graphs with dense, metric travel costs.
//!
//! Every graph handed to a planner is complete: absent edges of an input map
//! are replaced by shortest-path distances when it is loaded, so a single
//! matrix lookup gives the cheapest way to travel between any two nodes.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest target set accepted by the Held–Karp solver (2^20 subsets).
pub const MAX_HELD_KARP_TARGETS: usize = 20;

/// Side length of the generated square, per node.
pub const EUCLIDEAN_SCALE_PER_NODE: f64 = 100.0;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("cost matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("invalid edge cost {value} between {from} and {to}")]
    InvalidCost { from: usize, to: usize, value: f64 },
    #[error("asymmetric edge costs between {a} and {b}: {ab} vs {ba}")]
    Asymmetric { a: usize, b: usize, ab: f64, ba: f64 },
    #[error("graph is disconnected: node {to} is unreachable from node {from}")]
    Disconnected { from: usize, to: usize },
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("{0} targets exceed the Held-Karp limit of {MAX_HELD_KARP_TARGETS}")]
    TooManyTargets(usize),
}

/// Index of a node in a [`WeightedGraph`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Complete, symmetric graph with a dense cost matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    cost: Vec<f64>,
    coords: Option<Vec<(f64, f64)>>,
}

impl WeightedGraph {
    /// Builds a graph whose costs are the Euclidean distances between `coords`.
    pub fn from_coords(coords: Vec<(f64, f64)>) -> Result<Self, GraphError> {
        let n = coords.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (i, &(x, y)) in coords.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(GraphError::InvalidCost { from: i, to: i, value: f64::NAN });
            }
        }
        let mut cost = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                let d = (dx * dx + dy * dy).sqrt();
                cost[i * n + j] = d;
                cost[j * n + i] = d;
            }
        }
        Ok(Self { node_count: n, cost, coords: Some(coords) })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count
    }

    #[inline]
    pub fn cost(&self, from: NodeId, to: NodeId) -> f64 {
        self.cost[from.0 * self.node_count + to.0]
    }

    /// Costs from `from` to every node, indexed by node.
    pub fn row(&self, from: NodeId) -> &[f64] {
        let start = from.0 * self.node_count;
        &self.cost[start..start + self.node_count]
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }

    /// The cost matrix as nested rows.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.cost.chunks(self.node_count).map(<[f64]>::to_vec).collect()
    }

    /// A copy of this graph with every cost multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            node_count: self.node_count,
            cost: self.cost.iter().map(|c| c * factor).collect(),
            coords: self.coords.as_ref().map(|cs| cs.iter().map(|&(x, y)| (x * factor, y * factor)).collect()),
        }
    }

    /// Sum of consecutive hop costs along `path`, starting at `start`.
    pub fn path_cost(&self, start: NodeId, path: &[NodeId]) -> f64 {
        let mut total = 0.0;
        let mut at = start;
        for &next in path {
            total += self.cost(at, next);
            at = next;
        }
        total
    }
}

/// Completes a possibly sparse graph with all-pairs shortest-path distances.
///
/// `raw[i][j] = None` marks an absent edge. An edge given in only one
/// direction is taken as undirected. Diagonal entries are forced to zero.
pub fn metric_closure(raw: &[Vec<Option<f64>>]) -> Result<WeightedGraph, GraphError> {
    let n = raw.len();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    for (row, r) in raw.iter().enumerate() {
        if r.len() != n {
            return Err(GraphError::NotSquare { row, len: r.len(), expected: n });
        }
    }

    let mut dist = vec![f64::INFINITY; n * n];
    for i in 0..n {
        dist[i * n + i] = 0.0;
        for j in (i + 1)..n {
            let edge = match (raw[i][j], raw[j][i]) {
                (Some(a), Some(b)) => {
                    if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                        return Err(GraphError::Asymmetric { a: i, b: j, ab: a, ba: b });
                    }
                    Some(a.min(b))
                }
                (Some(a), None) | (None, Some(a)) => Some(a),
                (None, None) => None,
            };
            if let Some(e) = edge {
                if !e.is_finite() || e < 0.0 {
                    return Err(GraphError::InvalidCost { from: i, to: j, value: e });
                }
                dist[i * n + j] = e;
                dist[j * n + i] = e;
            }
        }
    }

    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }

    if let Some(pos) = dist.iter().position(|d| d.is_infinite()) {
        return Err(GraphError::Disconnected { from: pos / n, to: pos % n });
    }
    Ok(WeightedGraph { node_count: n, cost: dist, coords: None })
}

/// Uniformly scattered nodes in an `m × m` square, `m = 100 · node_count`.
pub fn random_euclidean_graph(node_count: usize, rng_seed: u64) -> Result<WeightedGraph, GraphError> {
    if node_count == 0 {
        return Err(GraphError::Empty);
    }
    let side = EUCLIDEAN_SCALE_PER_NODE * node_count as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let coords = (0..node_count)
        .map(|_| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            (x, y)
        })
        .collect();
    WeightedGraph::from_coords(coords)
}

/// An open path and its total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPath {
    pub nodes: Vec<NodeId>,
    pub cost: f64,
}

/// Minimum-cost open path from `start` through every node of `targets`.
///
/// If `start` is itself a target it heads the returned path. Duplicate
/// targets are visited once. Among equally cheap paths the
/// lexicographically smallest node sequence wins.
pub fn shortest_hamiltonian_path(
    graph: &WeightedGraph,
    start: NodeId,
    targets: &[NodeId],
) -> Result<HamiltonianPath, GraphError> {
    if !graph.contains(start) {
        return Err(GraphError::NodeOutOfRange(start.0));
    }
    if let Some(bad) = targets.iter().find(|t| !graph.contains(**t)) {
        return Err(GraphError::NodeOutOfRange(bad.0));
    }

    let mut rest: Vec<NodeId> = targets.iter().copied().filter(|&t| t != start).collect();
    rest.sort_unstable();
    rest.dedup();
    let mut nodes = Vec::with_capacity(rest.len() + 1);
    if targets.contains(&start) {
        nodes.push(start);
    }
    if rest.is_empty() {
        return Ok(HamiltonianPath { nodes, cost: 0.0 });
    }
    if rest.len() > MAX_HELD_KARP_TARGETS {
        return Err(GraphError::TooManyTargets(rest.len()));
    }

    nodes.extend(held_karp(graph, start, &rest));
    // summed front to back, the same way a walk along the path accrues it
    let cost = graph.path_cost(start, &nodes);
    Ok(HamiltonianPath { nodes, cost })
}

// g[mask * t + j]: cheapest path starting at rest[j] and covering `mask`.
// Rebuilding forwards with strict comparisons in index order yields the
// lexicographically smallest optimal path.
fn held_karp(graph: &WeightedGraph, start: NodeId, rest: &[NodeId]) -> Vec<NodeId> {
    let t = rest.len();
    let full = (1usize << t) - 1;
    let mut g = vec![f64::INFINITY; (full + 1) * t];
    let mut next = vec![u8::MAX; (full + 1) * t];

    for j in 0..t {
        g[(1 << j) * t + j] = 0.0;
    }
    for mask in 1..=full {
        for j in 0..t {
            if mask & (1 << j) == 0 {
                continue;
            }
            let tail = mask ^ (1 << j);
            if tail == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_next = u8::MAX;
            for p in 0..t {
                if tail & (1 << p) == 0 {
                    continue;
                }
                let candidate = graph.cost(rest[j], rest[p]) + g[tail * t + p];
                if candidate < best {
                    best = candidate;
                    best_next = p as u8;
                }
            }
            g[mask * t + j] = best;
            next[mask * t + j] = best_next;
        }
    }

    let mut first = 0;
    let mut best = f64::INFINITY;
    for j in 0..t {
        let c = graph.cost(start, rest[j]) + g[full * t + j];
        if c < best {
            best = c;
            first = j;
        }
    }

    let mut order = Vec::with_capacity(t);
    let mut mask = full;
    let mut at = first;
    loop {
        order.push(rest[at]);
        let n = next[mask * t + at];
        mask ^= 1 << at;
        if mask == 0 {
            break;
        }
        at = n as usize;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3() -> WeightedGraph {
        metric_closure(&[
            vec![Some(0.0), Some(1.0), None],
            vec![Some(1.0), Some(0.0), Some(1.0)],
            vec![None, Some(1.0), Some(0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn closure_routes_through_middle_node() {
        let g = line3();
        assert_eq!(g.cost(NodeId(0), NodeId(2)), 2.0);
        assert_eq!(g.cost(NodeId(2), NodeId(0)), 2.0);
    }

    #[test]
    fn closure_is_idempotent_on_metric_input() {
        let m = vec![
            vec![0.0, 3.0, 4.0, 5.0],
            vec![3.0, 0.0, 5.0, 4.0],
            vec![4.0, 5.0, 0.0, 3.0],
            vec![5.0, 4.0, 3.0, 0.0],
        ];
        let raw: Vec<Vec<Option<f64>>> = m.iter().map(|r| r.iter().copied().map(Some).collect()).collect();
        let g = metric_closure(&raw).unwrap();
        assert_eq!(g.to_matrix(), m);
        let again: Vec<Vec<Option<f64>>> =
            g.to_matrix().iter().map(|r| r.iter().copied().map(Some).collect()).collect();
        assert_eq!(metric_closure(&again).unwrap(), g);
    }

    #[test]
    fn closure_reports_disconnected_pair() {
        let err = metric_closure(&[
            vec![Some(0.0), Some(1.0), None],
            vec![Some(1.0), Some(0.0), None],
            vec![None, None, Some(0.0)],
        ])
        .unwrap_err();
        assert!(matches!(err, GraphError::Disconnected { from: 0, to: 2 }));
    }

    #[test]
    fn closure_rejects_bad_input() {
        assert_eq!(metric_closure(&[]).unwrap_err(), GraphError::Empty);
        assert!(matches!(
            metric_closure(&[vec![Some(0.0), Some(-1.0)], vec![None, Some(0.0)]]),
            Err(GraphError::InvalidCost { .. })
        ));
        assert!(matches!(
            metric_closure(&[vec![Some(0.0), Some(1.0)], vec![Some(2.0), Some(0.0)]]),
            Err(GraphError::Asymmetric { .. })
        ));
        assert!(matches!(
            metric_closure(&[vec![Some(0.0)], vec![Some(1.0), Some(0.0)]]),
            Err(GraphError::NotSquare { .. })
        ));
    }

    #[test]
    fn euclidean_generation_bounds_and_determinism() {
        let g = random_euclidean_graph(5, 42).unwrap();
        for &(x, y) in g.coords().unwrap() {
            assert!((0.0..=500.0).contains(&x) && (0.0..=500.0).contains(&y));
        }
        assert_eq!(g, random_euclidean_graph(5, 42).unwrap());
        assert_ne!(g, random_euclidean_graph(5, 43).unwrap());

        let single = random_euclidean_graph(1, 7).unwrap();
        assert_eq!(single.to_matrix(), vec![vec![0.0]]);
        assert_eq!(random_euclidean_graph(0, 1).unwrap_err(), GraphError::Empty);
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        let g = line3();
        let p = shortest_hamiltonian_path(&g, NodeId(0), &[NodeId(0)]).unwrap();
        assert_eq!(p.nodes, vec![NodeId(0)]);
        assert_eq!(p.cost, 0.0);

        let p = shortest_hamiltonian_path(&g, NodeId(0), &[]).unwrap();
        assert!(p.nodes.is_empty());
        assert_eq!(p.cost, 0.0);
    }

    #[test]
    fn hamiltonian_collinear_sweep() {
        let g = WeightedGraph::from_coords(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).unwrap();
        let p = shortest_hamiltonian_path(&g, NodeId(0), &[NodeId(2), NodeId(1)]).unwrap();
        assert_eq!(p.nodes, vec![NodeId(1), NodeId(2)]);
        assert_eq!(p.cost, 2.0);
    }

    #[test]
    fn hamiltonian_start_in_targets_leads_path() {
        let g = WeightedGraph::from_coords(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).unwrap();
        let p = shortest_hamiltonian_path(&g, NodeId(1), &[NodeId(0), NodeId(1), NodeId(2)]).unwrap();
        assert_eq!(p.nodes[0], NodeId(1));
        assert_eq!(p.nodes.len(), 3);
        assert_eq!(p.cost, 3.0);
        assert_eq!(g.path_cost(NodeId(1), &p.nodes[1..]), p.cost);
    }

    #[test]
    fn hamiltonian_rejects_unknown_nodes() {
        let g = line3();
        assert_eq!(shortest_hamiltonian_path(&g, NodeId(0), &[NodeId(5)]).unwrap_err(), GraphError::NodeOutOfRange(5));
    }
}
