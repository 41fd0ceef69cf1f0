//! Planning and benchmarking for object search on weighted graphs.
//!
//! A hunt places a set of objects on the nodes of a graph according to
//! known per-object location distributions. An agent starting at a given
//! node travels between nodes, observing which objects are present at each
//! one, until every object has been found. The goal is to minimize the
//! total travel cost.
//!
//! * [`graph`]: dense metric graphs, shortest-path closure, Held–Karp routes.
//! * [`belief`]: priors, arrangement sampling, posterior updates.
//! * [`hunt`]: the observe–decide–travel loop.
//! * [`planners`]: heuristics, exhaustive expected-cost search, bounding routes.
//! * [`dqn`]: a small Q-network planner and its trainer.
//! * [`bench`]: environment generation, experiments, statistics, reports.

pub mod belief;
pub mod bench;
pub mod dqn;
pub mod envfile;
pub mod graph;
pub mod hunt;
pub mod planners;
pub mod seed;

pub use belief::{Arrangement, BeliefState, ObjectId, PriorModel};
pub use graph::{NodeId, WeightedGraph};
pub use hunt::{run_hunt, HuntInstance, HuntOutcome, HuntView, Planner};
pub use planners::{PlanError, PlannerKind};
