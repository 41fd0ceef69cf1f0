//! Open-loop expected-cost search over visit orders, replanned every step.
//!
//! Every ordering of the candidate nodes (those that may still hold an
//! unfound object) is scored by its expected cost to completion under the
//! current posterior: the probability-weighted cost, over all joint
//! placements of the unfound objects, of following the ordering until every
//! object has been seen. The first node of the cheapest ordering is visited.

use crate::belief::{BeliefState, DEFAULT_ENUMERATION_CAP};
use crate::graph::{NodeId, WeightedGraph};
use crate::hunt::{HuntView, Planner};

use super::PlanError;

/// Candidate-node ceiling for the permutation search (10! orderings).
pub const DEFAULT_CANDIDATE_LIMIT: usize = 10;

/// Cost of walking `path` from `start` until every node in `locations` has
/// been visited. `start` counts as already visited.
pub fn compute_cost(
    graph: &WeightedGraph,
    path: &[NodeId],
    start: NodeId,
    locations: &[NodeId],
) -> Result<f64, PlanError> {
    let mut pending: Vec<NodeId> = locations.iter().copied().filter(|&n| n != start).collect();
    pending.sort_unstable();
    pending.dedup();

    let mut cost = 0.0;
    let mut at = start;
    for &next in path {
        if pending.is_empty() {
            break;
        }
        cost += graph.cost(at, next);
        pending.retain(|&n| n != next);
        at = next;
    }
    match pending.first() {
        None => Ok(cost),
        Some(missing) => Err(PlanError::PathDoesNotCover(missing.0)),
    }
}

/// Expected value of [`compute_cost`] for `path` over the posterior.
pub fn expected_path_cost(
    graph: &WeightedGraph,
    belief: &BeliefState,
    current: NodeId,
    path: &[NodeId],
    enumeration_cap: usize,
) -> Result<f64, PlanError> {
    let worlds = belief.enumerate_posterior_arrangements(enumeration_cap)?;
    let mut expected = 0.0;
    for world in &worlds.worlds {
        expected += world.probability * compute_cost(graph, path, current, &world.locations)?;
    }
    Ok(expected)
}

/// First node of the ordering with the lowest expected completion cost.
///
/// Orderings are generated lexicographically and only a strictly cheaper
/// one replaces the incumbent, so ties go to the smallest ordering.
pub fn exhaustive_bayes_next(
    graph: &WeightedGraph,
    belief: &BeliefState,
    current: NodeId,
    candidate_limit: usize,
    enumeration_cap: usize,
) -> Result<NodeId, PlanError> {
    Ok(best_ordering(graph, belief, current, candidate_limit, enumeration_cap)?.0[0])
}

/// The full minimizing ordering and its expected cost.
pub(crate) fn best_ordering(
    graph: &WeightedGraph,
    belief: &BeliefState,
    current: NodeId,
    candidate_limit: usize,
    enumeration_cap: usize,
) -> Result<(Vec<NodeId>, f64), PlanError> {
    let candidates: Vec<NodeId> = belief.candidate_nodes().into_iter().filter(|&n| n != current).collect();
    if candidates.is_empty() {
        return Err(PlanError::NoCandidate);
    }
    if candidates.len() > candidate_limit {
        return Err(PlanError::TooManyCandidates { count: candidates.len(), limit: candidate_limit });
    }
    if candidates.len() > 31 {
        return Err(PlanError::TooManyCandidates { count: candidates.len(), limit: 31 });
    }

    // Each world becomes the list of candidate slots holding its objects.
    let posterior = belief.enumerate_posterior_arrangements(enumeration_cap)?;
    let stride = posterior.objects.len();
    let mut world_slots: Vec<u8> = Vec::with_capacity(posterior.worlds.len() * stride);
    let mut world_probs: Vec<f64> = Vec::with_capacity(posterior.worlds.len());
    for world in &posterior.worlds {
        for &loc in &world.locations {
            if loc == current {
                world_slots.push(NO_SLOT);
                continue;
            }
            match candidates.iter().position(|&c| c == loc) {
                Some(slot) => world_slots.push(slot as u8),
                None => return Err(PlanError::PathDoesNotCover(loc.0)),
            }
        }
        world_probs.push(world.probability);
    }

    let k = candidates.len();
    let mut search = Search {
        graph,
        candidates: &candidates,
        stride,
        world_slots: &world_slots,
        world_probs: &world_probs,
        order: Vec::with_capacity(k),
        position: vec![0; k],
        prefix: vec![0.0; k + 1],
        best_order: Vec::new(),
        best_cost: f64::INFINITY,
    };
    search.descend(current, 0);

    let order = search.best_order.iter().map(|&slot| candidates[slot]).collect();
    Ok((order, search.best_cost))
}

const NO_SLOT: u8 = u8::MAX;

/// Depth-first walk over every ordering of the candidates in lexicographic
/// order. Each complete ordering is scored against every world.
struct Search<'a> {
    graph: &'a WeightedGraph,
    candidates: &'a [NodeId],
    stride: usize,
    world_slots: &'a [u8],
    world_probs: &'a [f64],
    order: Vec<usize>,
    /// `position[slot]`: index of `slot` in `order`.
    position: Vec<usize>,
    /// `prefix[i]`: cost of the first `i` hops of `order`.
    prefix: Vec<f64>,
    best_order: Vec<usize>,
    best_cost: f64,
}

impl Search<'_> {
    fn descend(&mut self, at: NodeId, visited: u32) {
        let depth = self.order.len();
        if depth == self.candidates.len() {
            let cost = self.expected_cost();
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best_order.clone_from(&self.order);
            }
            return;
        }
        for slot in 0..self.candidates.len() {
            if visited & (1 << slot) != 0 {
                continue;
            }
            let next = self.candidates[slot];
            self.prefix[depth + 1] = self.prefix[depth] + self.graph.cost(at, next);
            self.position[slot] = depth;
            self.order.push(slot);
            self.descend(next, visited | (1 << slot));
            self.order.pop();
        }
    }

    // Σ_w p(w) · (cost of the shortest prefix covering w).
    fn expected_cost(&self) -> f64 {
        let mut total = 0.0;
        for (w, &p) in self.world_probs.iter().enumerate() {
            let mut hops = 0;
            for &slot in &self.world_slots[w * self.stride..(w + 1) * self.stride] {
                if slot != NO_SLOT {
                    hops = hops.max(self.position[slot as usize] + 1);
                }
            }
            total += p * self.prefix[hops];
        }
        total
    }
}

/// Replanning exhaustive search as a [`Planner`].
#[derive(Clone, Copy, Debug)]
pub struct ExhaustiveBayes {
    pub candidate_limit: usize,
    pub enumeration_cap: usize,
}

impl Default for ExhaustiveBayes {
    fn default() -> Self {
        Self { candidate_limit: DEFAULT_CANDIDATE_LIMIT, enumeration_cap: DEFAULT_ENUMERATION_CAP }
    }
}

impl Planner for ExhaustiveBayes {
    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        exhaustive_bayes_next(view.graph, view.belief, view.current, self.candidate_limit, self.enumeration_cap)
    }
}
