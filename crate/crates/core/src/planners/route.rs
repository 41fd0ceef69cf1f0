//! Fixed routes computed once per hunt: the salesman baseline and the
//! clairvoyant offline optimum.

use crate::belief::{Arrangement, PriorModel};
use crate::graph::{shortest_hamiltonian_path, NodeId, WeightedGraph};
use crate::hunt::{HuntView, Planner};

use super::PlanError;

/// Shortest open path from `start` through every node that any object could
/// occupy under the prior. The start node is observed before moving and is
/// left out.
pub fn salesman_plan(graph: &WeightedGraph, prior: &PriorModel, start: NodeId) -> Result<Vec<NodeId>, PlanError> {
    let targets: Vec<NodeId> = prior.support_union().into_iter().filter(|&n| n != start).collect();
    Ok(shortest_hamiltonian_path(graph, start, &targets)?.nodes)
}

/// Shortest open path from `start` through the true object locations.
pub fn offline_optimal_plan(
    graph: &WeightedGraph,
    truth: &Arrangement,
    start: NodeId,
) -> Result<Vec<NodeId>, PlanError> {
    let targets: Vec<NodeId> = truth.distinct_nodes().into_iter().filter(|&n| n != start).collect();
    Ok(shortest_hamiltonian_path(graph, start, &targets)?.nodes)
}

#[derive(Clone, Debug)]
enum RouteSource {
    Salesman,
    Offline(Arrangement),
}

/// Follows a route fixed in [`Planner::begin`]; the hunt loop stops it as
/// soon as every object has been found.
#[derive(Clone, Debug)]
pub struct RouteFollower {
    source: RouteSource,
    route: Vec<NodeId>,
    cursor: usize,
}

impl RouteFollower {
    pub fn salesman() -> Self {
        Self { source: RouteSource::Salesman, route: Vec::new(), cursor: 0 }
    }

    /// Clairvoyant follower; only meaningful as a lower bound.
    pub fn offline_optimal(truth: Arrangement) -> Self {
        Self { source: RouteSource::Offline(truth), route: Vec::new(), cursor: 0 }
    }

    pub fn route(&self) -> &[NodeId] {
        &self.route
    }
}

impl Planner for RouteFollower {
    fn begin(&mut self, graph: &WeightedGraph, prior: &PriorModel, start: NodeId) -> Result<(), PlanError> {
        self.route = match &self.source {
            RouteSource::Salesman => salesman_plan(graph, prior, start)?,
            RouteSource::Offline(truth) => offline_optimal_plan(graph, truth, start)?,
        };
        self.cursor = 0;
        Ok(())
    }

    fn next_node(&mut self, _view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        let next = *self.route.get(self.cursor).ok_or(PlanError::RouteExhausted)?;
        self.cursor += 1;
        Ok(next)
    }
}
