//! Next-node choosers.
//!
//! Online planners see only the graph, the current belief and the current
//! node through [`HuntView`](crate::hunt::HuntView). The offline-optimal
//! route is the one exception: it is built from the hidden arrangement and
//! serves as a lower bound on cost.

mod exhaustive;
mod greedy;
mod route;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::belief::BeliefError;
use crate::graph::GraphError;

pub use exhaustive::{
    compute_cost, exhaustive_bayes_next, expected_path_cost, ExhaustiveBayes, DEFAULT_CANDIDATE_LIMIT,
};
pub use greedy::{prob_prox_next, probability_next, proximity_next, ProbProx, Probability, Proximity};
pub use route::{offline_optimal_plan, salesman_plan, RouteFollower};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no node can hold an unfound object")]
    NoCandidate,
    #[error("{count} candidate nodes exceed the exhaustive-search limit of {limit}; use a heuristic planner")]
    TooManyCandidates { count: usize, limit: usize },
    #[error("path does not visit node {0}, which may hold an object")]
    PathDoesNotCover(usize),
    #[error("the planned route is exhausted but objects remain unfound")]
    RouteExhausted,
    #[error("expected an input of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Every planner the harness knows about, by its command-line name.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlannerKind {
    Proximity,
    Probability,
    ProbProx,
    ExhaustiveBayes,
    Salesman,
    OfflineOptimal,
    Dqn,
    DqnMap,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 8] = [
        PlannerKind::Proximity,
        PlannerKind::Probability,
        PlannerKind::ProbProx,
        PlannerKind::ExhaustiveBayes,
        PlannerKind::Salesman,
        PlannerKind::OfflineOptimal,
        PlannerKind::Dqn,
        PlannerKind::DqnMap,
    ];

    /// The six planners that need no training.
    pub const CLASSICAL: [PlannerKind; 6] = [
        PlannerKind::Proximity,
        PlannerKind::Probability,
        PlannerKind::ProbProx,
        PlannerKind::ExhaustiveBayes,
        PlannerKind::Salesman,
        PlannerKind::OfflineOptimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Proximity => "proximity",
            PlannerKind::Probability => "probability",
            PlannerKind::ProbProx => "probprox",
            PlannerKind::ExhaustiveBayes => "exhaustive",
            PlannerKind::Salesman => "salesman",
            PlannerKind::OfflineOptimal => "optimal",
            PlannerKind::Dqn => "dqn",
            PlannerKind::DqnMap => "dqnmap",
        }
    }

    pub fn requires_truth(self) -> bool {
        self == PlannerKind::OfflineOptimal
    }

    pub fn is_learned(self) -> bool {
        matches!(self, PlannerKind::Dqn | PlannerKind::DqnMap)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown planner '{0}' (expected one of proximity, probability, probprox, exhaustive, salesman, optimal, dqn, dqnmap)")]
pub struct UnknownPlanner(pub String);

impl FromStr for PlannerKind {
    type Err = UnknownPlanner;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        PlannerKind::ALL.into_iter().find(|k| k.name() == s).ok_or(UnknownPlanner(s))
    }
}
