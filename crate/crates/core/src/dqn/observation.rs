use crate::belief::BeliefState;
use crate::graph::{NodeId, WeightedGraph};

/// How the second half of the observation vector is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObservationEncoding {
    /// Travel costs from the current node (`true`) or a one-hot position.
    pub with_map: bool,
    /// Divide costs by the graph's largest pairwise cost.
    pub normalize_costs: bool,
}

impl ObservationEncoding {
    pub const MAP: Self = Self { with_map: true, normalize_costs: true };
    pub const NO_MAP: Self = Self { with_map: false, normalize_costs: true };

    /// Factor applied to raw costs before they reach the network.
    pub fn cost_scale(&self, graph: &WeightedGraph) -> f64 {
        let max = graph.max_cost();
        if self.normalize_costs && max > 0.0 {
            1.0 / max
        } else {
            1.0
        }
    }
}

/// `[p_any(n_1) … p_any(n_l), c(n_1) … c(n_l)]` where `c` is either the
/// (scaled) travel cost from `current` or a one-hot marker of `current`.
pub fn build_observation(
    graph: &WeightedGraph,
    belief: &BeliefState,
    current: NodeId,
    encoding: ObservationEncoding,
) -> Vec<f64> {
    let l = graph.node_count();
    let mut obs = Vec::with_capacity(2 * l);
    obs.extend(graph.nodes().map(|n| belief.prob_any_unfound(n)));
    if encoding.with_map {
        let scale = encoding.cost_scale(graph);
        obs.extend(graph.nodes().map(|n| graph.cost(n, current) * scale));
    } else {
        obs.extend(graph.nodes().map(|n| if n == current { 1.0 } else { 0.0 }));
    }
    obs
}
