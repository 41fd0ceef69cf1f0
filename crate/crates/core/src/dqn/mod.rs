//! A Q-network planner over belief-derived observations.
//!
//! The state is the posterior plus the agent's position; actions are nodes.
//! The network sees, for every node, the probability of finding at least one
//! unfound object there, followed by either the travel cost from the current
//! node or a one-hot position marker.

mod adam;
mod network;
mod observation;
mod policy_file;
mod replay;
mod train;

use thiserror::Error;

use crate::belief::BeliefState;
use crate::graph::{NodeId, WeightedGraph};
use crate::hunt::{HuntError, HuntView, Planner};
use crate::planners::PlanError;

pub use adam::{Adam, AdamConfig};
pub use network::{td_loss_and_gradients, DimensionMismatch, QNetwork, Transition};
pub use observation::{build_observation, ObservationEncoding};
pub use policy_file::{read_policy, write_policy, POLICY_MAGIC, POLICY_VERSION};
pub use replay::{ReplayBuffer, DEFAULT_REPLAY_CAPACITY};
pub use train::{
    evaluate_policy, train, write_curve_csv, Episode, EpochRecord, HuntEnv, StepResult, TrainConfig, TrainedPolicy,
};

#[derive(Debug, Error)]
pub enum DqnError {
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
    #[error(transparent)]
    Hunt(#[from] HuntError),
    #[error("action {0} is not a valid move")]
    InvalidAction(usize),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed policy file: {0}")]
    PolicyFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<DimensionMismatch> for PlanError {
    fn from(e: DimensionMismatch) -> Self {
        PlanError::Dimension { expected: e.expected, got: e.got }
    }
}

/// Index of the largest Q-value other than `current`; lowest index on ties.
pub(crate) fn greedy_action(q: &[f64], current: NodeId) -> NodeId {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in q.iter().enumerate() {
        if i == current.0 {
            continue;
        }
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    NodeId(best.map_or(0, |(i, _)| i))
}

/// Greedy move of `net` from `current`, never staying put.
pub fn dqn_next(
    net: &QNetwork,
    graph: &WeightedGraph,
    belief: &BeliefState,
    current: NodeId,
    encoding: ObservationEncoding,
) -> Result<NodeId, PlanError> {
    if net.output_len() != graph.node_count() {
        return Err(PlanError::Dimension { expected: graph.node_count(), got: net.output_len() });
    }
    let q = net.forward(&build_observation(graph, belief, current, encoding))?;
    Ok(greedy_action(&q, current))
}

/// A fixed network used as a [`Planner`].
#[derive(Clone, Debug)]
pub struct DqnPlanner {
    net: QNetwork,
    encoding: ObservationEncoding,
}

impl DqnPlanner {
    pub fn new(net: QNetwork, encoding: ObservationEncoding) -> Self {
        Self { net, encoding }
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }

    pub fn encoding(&self) -> ObservationEncoding {
        self.encoding
    }
}

impl Planner for DqnPlanner {
    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        dqn_next(&self.net, view.graph, view.belief, view.current, self.encoding)
    }
}
