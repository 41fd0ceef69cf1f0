use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::belief::{Arrangement, BeliefError};
use crate::dqn::DqnPlanner;
use crate::envfile::Environment;
use crate::hunt::{default_step_limit, run_hunt, HuntError, HuntInstance, Planner};
use crate::planners::{
    offline_optimal_plan, ExhaustiveBayes, PlanError, PlannerKind, ProbProx, Probability, Proximity, RouteFollower,
};
use crate::seed::derive_seed;

use super::generate::generate_environment;
use super::BenchError;

const ARRANGEMENT_STREAM: u64 = 0x6172_7261;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub node_counts: Vec<usize>,
    pub objects_per_hunt: usize,
    pub trials: usize,
    pub hunts_per_trial: usize,
    pub planners: Vec<PlannerKind>,
    pub master_seed: u64,
    /// Exhaustive rows on larger graphs are recorded as skipped.
    pub exhaustive_max_nodes: usize,
    /// Record wall-clock planner time; otherwise the column is zero.
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn new(
        node_counts: Vec<usize>,
        trials: usize,
        hunts_per_trial: usize,
        planners: Vec<PlannerKind>,
        master_seed: u64,
    ) -> Self {
        Self {
            node_counts,
            objects_per_hunt: 4,
            trials,
            hunts_per_trial,
            planners,
            master_seed,
            exhaustive_max_nodes: 8,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.node_counts.is_empty() || self.planners.is_empty() {
            return Err(BenchError::Infeasible("node counts and planners must be non-empty".into()));
        }
        if self.trials == 0 || self.hunts_per_trial == 0 || self.objects_per_hunt == 0 {
            return Err(BenchError::Infeasible("trial, hunt and object counts must be positive".into()));
        }
        if let Some(k) = self.planners.iter().find(|k| k.is_learned()) {
            return Err(BenchError::Infeasible(format!("{k} needs a trained policy and cannot run in a sweep")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HuntCost {
    Completed(f64),
    /// Step limit reached before every object was found.
    Incomplete,
    /// Planner not run (over the exhaustive size limit).
    Skipped,
}

impl HuntCost {
    pub fn completed(self) -> Option<f64> {
        match self {
            HuntCost::Completed(c) => Some(c),
            _ => None,
        }
    }
}

/// One planner on one hunt.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub env_id: u64,
    pub trial_id: u64,
    pub hunt_id: u64,
    pub planner: PlannerKind,
    pub cost: HuntCost,
    pub optimal_cost: f64,
    pub decisions: usize,
    /// Total planner wall time in microseconds.
    pub planner_time_us: f64,
}

impl TrialResult {
    pub fn sort_key(&self) -> (u64, u64, u64, PlannerKind) {
        (self.env_id, self.trial_id, self.hunt_id, self.planner)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CellOptions {
    pub exhaustive: ExhaustiveBayes,
    /// When false, exhaustive rows are written as skipped.
    pub exhaustive_enabled: bool,
    pub dqn: Option<DqnPlanner>,
    pub record_timing: bool,
}

pub fn arrangement_seed(master_seed: u64, node_count: usize, trial_id: u64, hunt_id: u64) -> u64 {
    derive_seed(&[master_seed, ARRANGEMENT_STREAM, node_count as u64, trial_id, hunt_id])
}

pub fn make_planner(
    kind: PlannerKind,
    truth: &Arrangement,
    options: &CellOptions,
) -> Result<Box<dyn Planner + Send>, BenchError> {
    Ok(match kind {
        PlannerKind::Proximity => Box::new(Proximity),
        PlannerKind::Probability => Box::new(Probability),
        PlannerKind::ProbProx => Box::new(ProbProx),
        PlannerKind::ExhaustiveBayes => Box::new(options.exhaustive),
        PlannerKind::Salesman => Box::new(RouteFollower::salesman()),
        PlannerKind::OfflineOptimal => Box::new(RouteFollower::offline_optimal(truth.clone())),
        PlannerKind::Dqn | PlannerKind::DqnMap => match &options.dqn {
            Some(p) => Box::new(p.clone()),
            None => return Err(BenchError::Infeasible(format!("{kind} needs a policy file"))),
        },
    })
}

fn over_cap(e: &HuntError) -> bool {
    matches!(
        e,
        HuntError::Plan(PlanError::TooManyCandidates { .. })
            | HuntError::Plan(PlanError::Belief(BeliefError::EnumerationTooLarge { .. }))
            | HuntError::Belief(BeliefError::EnumerationTooLarge { .. })
    )
}

/// Runs every planner on the same arrangement.
pub fn run_cell(
    env: &Environment,
    truth: Arrangement,
    planners: &[PlannerKind],
    ids: (u64, u64, u64),
    options: &CellOptions,
) -> Result<Vec<TrialResult>, BenchError> {
    let (env_id, trial_id, hunt_id) = ids;
    let optimal_route = offline_optimal_plan(&env.graph, &truth, env.start).map_err(HuntError::from)?;
    let optimal_cost = env.graph.path_cost(env.start, &optimal_route);
    let step_limit = default_step_limit(env.graph.node_count(), env.prior.object_count());
    let instance = HuntInstance::new(env.graph.clone(), env.prior.clone(), truth, env.start)?;

    let mut rows = Vec::with_capacity(planners.len());
    for &kind in planners {
        let mut row = TrialResult {
            env_id,
            trial_id,
            hunt_id,
            planner: kind,
            cost: HuntCost::Skipped,
            optimal_cost,
            decisions: 0,
            planner_time_us: 0.0,
        };
        if kind == PlannerKind::ExhaustiveBayes && !options.exhaustive_enabled {
            rows.push(row);
            continue;
        }
        let mut planner = make_planner(kind, &instance.truth, options)?;
        match run_hunt(&instance, planner.as_mut(), step_limit) {
            Ok(outcome) => {
                row.cost =
                    if outcome.completed { HuntCost::Completed(outcome.total_cost()) } else { HuntCost::Incomplete };
                row.decisions = outcome.decisions;
                if options.record_timing {
                    row.planner_time_us = outcome.planner_time().as_secs_f64() * 1e6;
                }
            }
            Err(e) if kind == PlannerKind::ExhaustiveBayes && over_cap(&e) => {}
            Err(e) => return Err(e.into()),
        }
        rows.push(row);
    }
    Ok(rows)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Infeasible(format!("cannot start worker pool: {e}")))
}

fn sorted(mut rows: Vec<TrialResult>) -> Vec<TrialResult> {
    rows.sort_by_key(|r| r.sort_key());
    rows
}

/// Generates `trials` environments per node count and runs every planner on
/// `hunts_per_trial` arrangements of each. Rows use the node count as
/// `env_id` and the environment index as `trial_id`.
///
/// `workers = 0` uses rayon's default thread count. Output order does not
/// depend on it.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<Vec<TrialResult>, BenchError> {
    spec.validate()?;
    let mut envs = Vec::new();
    for &n in &spec.node_counts {
        for trial in 0..spec.trials as u64 {
            envs.push((n, trial, generate_environment(n, spec.objects_per_hunt, spec.master_seed, trial)?));
        }
    }
    let cells: Vec<(usize, u64)> =
        (0..envs.len()).flat_map(|e| (0..spec.hunts_per_trial as u64).map(move |h| (e, h))).collect();

    let chunks = pool(workers)?.install(|| {
        cells
            .par_iter()
            .map(|&(e, hunt)| {
                let (n, trial, env) = &envs[e];
                let options = CellOptions {
                    exhaustive_enabled: *n <= spec.exhaustive_max_nodes,
                    record_timing: spec.record_timing,
                    ..CellOptions::default()
                };
                let mut rng = ChaCha8Rng::seed_from_u64(arrangement_seed(spec.master_seed, *n, *trial, hunt));
                let truth = env.prior.sample(&mut rng);
                run_cell(env, truth, &spec.planners, (*n as u64, *trial, hunt), &options)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(sorted(chunks.into_iter().flatten().collect()))
}

/// Runs `hunts` arrangements of a single environment (trial 0).
pub fn run_on_environment(
    env: &Environment,
    env_id: u64,
    planners: &[PlannerKind],
    hunts: usize,
    master_seed: u64,
    options: &CellOptions,
    workers: usize,
) -> Result<Vec<TrialResult>, BenchError> {
    if planners.is_empty() || hunts == 0 {
        return Err(BenchError::Infeasible("need at least one planner and one hunt".into()));
    }
    let n = env.graph.node_count();
    let chunks = pool(workers)?.install(|| {
        (0..hunts as u64)
            .into_par_iter()
            .map(|hunt| {
                let mut rng = ChaCha8Rng::seed_from_u64(arrangement_seed(master_seed, n, 0, hunt));
                let truth = env.prior.sample(&mut rng);
                run_cell(env, truth, planners, (env_id, 0, hunt), options)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(sorted(chunks.into_iter().flatten().collect()))
}
