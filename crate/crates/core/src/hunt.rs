//! Executes a single hunt: ask the planner, travel, observe, update.

use std::io::Write;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::belief::{Arrangement, BeliefError, BeliefState, PriorModel};
use crate::graph::{NodeId, WeightedGraph};
use crate::planners::PlanError;

#[derive(Debug, Error)]
pub enum HuntError {
    #[error("invalid hunt instance: {0}")]
    InvalidInstance(String),
    #[error("step limit must be positive")]
    ZeroStepLimit,
    #[error("planner protocol violation at step {step}: {reason}")]
    Protocol { step: usize, reason: String },
    #[error("hunt did not complete within {0} steps")]
    Incomplete(usize),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error("trace output failed: {0}")]
    Trace(#[from] csv::Error),
}

/// One sampled hunt.
#[derive(Clone, Debug)]
pub struct HuntInstance {
    pub graph: WeightedGraph,
    pub prior: PriorModel,
    pub truth: Arrangement,
    pub start: NodeId,
}

impl HuntInstance {
    pub fn new(graph: WeightedGraph, prior: PriorModel, truth: Arrangement, start: NodeId) -> Result<Self, HuntError> {
        if graph.node_count() != prior.node_count() {
            return Err(HuntError::InvalidInstance(format!(
                "graph has {} nodes but prior covers {}",
                graph.node_count(),
                prior.node_count()
            )));
        }
        if !graph.contains(start) {
            return Err(HuntError::InvalidInstance(format!("start node {start} out of range")));
        }
        if !prior.is_consistent(&truth) {
            return Err(HuntError::InvalidInstance("arrangement outside the prior support".into()));
        }
        Ok(Self { graph, prior, truth, start })
    }
}

/// What an online planner is allowed to see when choosing the next node.
#[derive(Clone, Copy)]
pub struct HuntView<'a> {
    pub graph: &'a WeightedGraph,
    pub belief: &'a BeliefState,
    pub current: NodeId,
}

/// Chooses where to go next.
///
/// `begin` runs once per hunt, after the start node has been observed, and
/// is where fixed-route planners compute their route.
pub trait Planner {
    fn begin(&mut self, _graph: &WeightedGraph, _prior: &PriorModel, _start: NodeId) -> Result<(), PlanError> {
        Ok(())
    }

    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError>;
}

impl<P: Planner + ?Sized> Planner for Box<P> {
    fn begin(&mut self, graph: &WeightedGraph, prior: &PriorModel, start: NodeId) -> Result<(), PlanError> {
        (**self).begin(graph, prior, start)
    }

    fn next_node(&mut self, view: &HuntView<'_>) -> Result<NodeId, PlanError> {
        (**self).next_node(view)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub node: NodeId,
    pub task_vector_after: Vec<bool>,
    pub step_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub start: NodeId,
    /// Task vector after observing the start node.
    pub initial_task_vector: Vec<bool>,
    pub steps: Vec<Step>,
    pub total_cost: f64,
}

impl Trajectory {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn final_task_vector(&self) -> &[bool] {
        self.steps.last().map_or(&self.initial_task_vector, |s| &s.task_vector_after)
    }

    /// Writes one CSV row per step: `hunt_id,planner,step,node,step_cost,found`.
    pub fn write_csv<W: Write>(
        &self,
        out: &mut csv::Writer<W>,
        hunt_id: usize,
        planner: &str,
    ) -> Result<(), csv::Error> {
        for (i, step) in self.steps.iter().enumerate() {
            let found = step.task_vector_after.iter().filter(|f| **f).count();
            out.write_record([
                hunt_id.to_string(),
                planner.to_string(),
                (i + 1).to_string(),
                step.node.to_string(),
                step.step_cost.to_string(),
                found.to_string(),
            ])?;
        }
        Ok(())
    }
}

pub const TRACE_HEADER: [&str; 6] = ["hunt_id", "planner", "step", "node", "step_cost", "found"];

#[derive(Clone, Debug)]
pub struct HuntOutcome {
    pub trajectory: Trajectory,
    pub completed: bool,
    pub decisions: usize,
    pub per_decision_wall_times: Vec<Duration>,
}

impl HuntOutcome {
    pub fn total_cost(&self) -> f64 {
        self.trajectory.total_cost
    }

    pub fn planner_time(&self) -> Duration {
        self.per_decision_wall_times.iter().sum()
    }
}

/// Safety net on the number of decisions: `4 · nodes · objects`.
pub fn default_step_limit(node_count: usize, object_count: usize) -> usize {
    (4 * node_count * object_count).max(1)
}

/// Runs one hunt to completion or until `step_limit` decisions were made.
///
/// The start node is observed before the first decision, so objects lying
/// there are found at no cost.
pub fn run_hunt(
    instance: &HuntInstance,
    planner: &mut dyn Planner,
    step_limit: usize,
) -> Result<HuntOutcome, HuntError> {
    if step_limit == 0 {
        return Err(HuntError::ZeroStepLimit);
    }
    let graph = &instance.graph;
    let mut belief = BeliefState::from_prior(&instance.prior);
    belief.observe_truth(instance.start, &instance.truth)?;
    planner.begin(graph, &instance.prior, instance.start)?;

    let mut trajectory = Trajectory {
        start: instance.start,
        initial_task_vector: belief.task_vector(),
        steps: Vec::new(),
        total_cost: 0.0,
    };
    let mut times = Vec::new();
    let mut current = instance.start;

    while !belief.all_found() && trajectory.steps.len() < step_limit {
        let view = HuntView { graph, belief: &belief, current };
        let clock = Instant::now();
        let chosen = planner.next_node(&view);
        times.push(clock.elapsed());
        let next = chosen?;

        let step = trajectory.steps.len() + 1;
        if !graph.contains(next) {
            return Err(HuntError::Protocol { step, reason: format!("node {next} does not exist") });
        }
        if next == current {
            return Err(HuntError::Protocol { step, reason: format!("planner stayed at node {next}") });
        }

        let step_cost = graph.cost(current, next);
        belief.observe_truth(next, &instance.truth)?;
        trajectory.total_cost += step_cost;
        trajectory.steps.push(Step { node: next, task_vector_after: belief.task_vector(), step_cost });
        current = next;
    }

    Ok(HuntOutcome {
        completed: belief.all_found(),
        decisions: trajectory.steps.len(),
        trajectory,
        per_decision_wall_times: times,
    })
}

/// Exact expected cost of a policy: runs it against every arrangement in the
/// prior's support and weights each realized cost by its probability.
///
/// `make_planner` gets the arrangement so clairvoyant planners can be scored
/// the same way; online planners must ignore it.
pub fn expected_policy_cost(
    graph: &WeightedGraph,
    prior: &PriorModel,
    start: NodeId,
    make_planner: &mut dyn FnMut(&Arrangement) -> Box<dyn Planner>,
    enumeration_cap: usize,
) -> Result<f64, HuntError> {
    let worlds = BeliefState::from_prior(prior).enumerate_posterior_arrangements(enumeration_cap)?;
    let step_limit = default_step_limit(graph.node_count(), prior.object_count());
    let mut expected = 0.0;
    for world in &worlds.worlds {
        let truth = Arrangement::new(world.locations.clone());
        let instance = HuntInstance::new(graph.clone(), prior.clone(), truth, start)?;
        let mut planner = make_planner(&instance.truth);
        let outcome = run_hunt(&instance, planner.as_mut(), step_limit)?;
        if !outcome.completed {
            return Err(HuntError::Incomplete(step_limit));
        }
        expected += world.probability * outcome.total_cost();
    }
    Ok(expected)
}
