//! One-step scoring heuristics: nearest, likeliest, and likeliest per unit cost.
//!
//! All three exclude the current node and break ties towards the lowest index.

use crate::belief::BeliefState;
use crate::graph::{NodeId, WeightedGraph};
use crate::hunt::{HuntView, Planner};

use super::PlanError;

/// Closest node that may hold an unfound object.
pub fn proximity_next(graph: &WeightedGraph, belief: &BeliefState, current: NodeId) -> Result<NodeId, PlanError> {
    let mut best: Option<(NodeId, f64)> = None;
    for node in graph.nodes().filter(|&n| n != current) {
        if !belief.unfound().any(|o| belief.posterior(o, node) > 0.0) {
            continue;
        }
        let c = graph.cost(current, node);
        if best.is_none_or(|(_, b)| c < b) {
            best = Some((node, c));
        }
    }
    best.map(|(n, _)| n).ok_or(PlanError::NoCandidate)
}

/// Node with the highest probability of holding at least one unfound object.
pub fn probability_next(graph: &WeightedGraph, belief: &BeliefState, current: NodeId) -> Result<NodeId, PlanError> {
    argmax_positive(graph, current, |node| {
        let p = belief.prob_any_unfound(node);
        (p > 0.0).then_some(p)
    })
}

/// Node maximizing find-probability divided by travel cost.
///
/// A positive-probability node at zero cost scores infinity.
pub fn prob_prox_next(graph: &WeightedGraph, belief: &BeliefState, current: NodeId) -> Result<NodeId, PlanError> {
    argmax_positive(graph, current, |node| {
        let p = belief.prob_any_unfound(node);
        (p > 0.0).then(|| p / graph.cost(current, node))
    })
}

fn argmax_positive(
    graph: &WeightedGraph,
    current: NodeId,
    score: impl Fn(NodeId) -> Option<f64>,
) -> Result<NodeId, PlanError> {
    let mut best: Option<(NodeId, f64)> = None;
    for node in graph.nodes().filter(|&n| n != current) {
        if let Some(s) = score(node) {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((node, s));
            }
        }
    }
    best.map(|(n, _)| n).ok_or(PlanError::NoCandidate)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Proximity;

#[derive(Clone, Copy, Debug, Default)]
pub struct Probability;

#[derive(Clone, Copy, Debug, Default)]
pub struct ProbProx;

impl Planner for Proximity {
    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        proximity_next(view.graph, view.belief, view.current)
    }
}

impl Planner for Probability {
    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        probability_next(view.graph, view.belief, view.current)
    }
}

impl Planner for ProbProx {
    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        prob_prox_next(view.graph, view.belief, view.current)
    }
}
