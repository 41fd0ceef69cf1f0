//! Q-learning with experience replay on a single hunt environment.
//!
//! The environment is one graph, prior and start node; every episode draws
//! a fresh arrangement. Rewards are negative travel costs.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{Arrangement, BeliefState, PriorModel};
use crate::graph::{NodeId, WeightedGraph};
use crate::hunt::{default_step_limit, run_hunt, HuntError, HuntInstance};
use crate::seed::derive_seed;

use super::adam::{Adam, AdamConfig};
use super::network::{td_loss_and_gradients, QNetwork, Transition};
use super::observation::{build_observation, ObservationEncoding};
use super::replay::{ReplayBuffer, DEFAULT_REPLAY_CAPACITY};
use super::{greedy_action, DqnError, DqnPlanner};

const INIT_STREAM: u64 = 0;
const BEHAVIOUR_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lr_start: f64,
    /// Epoch at which the learning rate reaches zero.
    pub lr_zero_epoch: f64,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch_size: usize,
    pub test_episodes: usize,
    pub epsilon_start: f64,
    pub epsilon_decay_per_epoch: f64,
    pub epsilon_floor: f64,
    pub adam: AdamConfig,
    /// Optimizer steps between target-network refreshes.
    pub target_sync_interval: usize,
    pub replay_capacity: usize,
    pub hidden_units: usize,
    pub encoding: ObservationEncoding,
    /// Train on rewards multiplied by the encoding's cost scale.
    pub scale_rewards: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            lr_start: 0.05,
            lr_zero_epoch: 40.0,
            epochs: 40,
            steps_per_epoch: 2000,
            batch_size: 64,
            test_episodes: 200,
            epsilon_start: 1.0,
            epsilon_decay_per_epoch: 0.1,
            epsilon_floor: 0.02,
            adam: AdamConfig::default(),
            target_sync_interval: 1000,
            replay_capacity: DEFAULT_REPLAY_CAPACITY,
            hidden_units: 16,
            encoding: ObservationEncoding::MAP,
            scale_rewards: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// `lr_start · max(0, 1 − epoch / lr_zero_epoch)`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr_start * (1.0 - epoch as f64 / self.lr_zero_epoch).max(0.0)
    }

    /// `max(floor, start − decay · epoch)`.
    pub fn epsilon(&self, epoch: usize) -> f64 {
        (self.epsilon_start - self.epsilon_decay_per_epoch * epoch as f64).max(self.epsilon_floor)
    }

    fn validate(&self) -> Result<(), DqnError> {
        let rates = [self.gamma, self.lr_start, self.epsilon_start, self.epsilon_decay_per_epoch, self.epsilon_floor];
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(DqnError::InvalidConfig("rates must be finite and non-negative".into()));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 || self.hidden_units == 0 {
            return Err(DqnError::InvalidConfig("batch size, replay capacity and width must be positive".into()));
        }
        if self.target_sync_interval == 0 || self.lr_zero_epoch <= 0.0 {
            return Err(DqnError::InvalidConfig("target sync interval and lr horizon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_test_return: f64,
    pub epsilon: f64,
    pub lr: f64,
}

#[derive(Clone, Debug)]
pub struct TrainedPolicy {
    /// Network from the epoch with the best mean test return.
    pub network: QNetwork,
    pub encoding: ObservationEncoding,
    pub best_epoch: usize,
    pub best_mean_return: f64,
    pub curve: Vec<EpochRecord>,
}

impl TrainedPolicy {
    pub fn planner(&self) -> DqnPlanner {
        DqnPlanner::new(self.network.clone(), self.encoding)
    }
}

/// Writes `epoch,mean_test_return,epsilon,lr` rows.
pub fn write_curve_csv<W: Write>(out: W, curve: &[EpochRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "mean_test_return", "epsilon", "lr"])?;
    for r in curve {
        w.write_record([r.epoch.to_string(), r.mean_test_return.to_string(), r.epsilon.to_string(), r.lr.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// A training environment: fixed graph, prior and start node.
#[derive(Clone, Copy)]
pub struct HuntEnv<'a> {
    pub graph: &'a WeightedGraph,
    pub prior: &'a PriorModel,
    pub start: NodeId,
    pub encoding: ObservationEncoding,
    pub step_limit: usize,
}

#[derive(Clone, Debug)]
pub struct Episode {
    pub truth: Arrangement,
    pub belief: BeliefState,
    pub current: NodeId,
    pub steps: usize,
    /// Sum of raw (unscaled) rewards so far.
    pub total_reward: f64,
}

impl Episode {
    pub fn is_done(&self) -> bool {
        self.belief.all_found()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult {
    /// Negative travel cost of the step.
    pub reward: f64,
    pub terminal: bool,
    pub truncated: bool,
}

impl<'a> HuntEnv<'a> {
    pub fn new(graph: &'a WeightedGraph, prior: &'a PriorModel, start: NodeId, encoding: ObservationEncoding) -> Self {
        let step_limit = default_step_limit(graph.node_count(), prior.object_count());
        Self { graph, prior, start, encoding, step_limit }
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Episode, DqnError> {
        let truth = self.prior.sample(rng);
        self.reset_with(truth)
    }

    pub fn reset_with(&self, truth: Arrangement) -> Result<Episode, DqnError> {
        let mut belief = BeliefState::from_prior(self.prior);
        belief.observe_truth(self.start, &truth).map_err(HuntError::from)?;
        Ok(Episode { truth, belief, current: self.start, steps: 0, total_reward: 0.0 })
    }

    pub fn observe(&self, episode: &Episode) -> Vec<f64> {
        build_observation(self.graph, &episode.belief, episode.current, self.encoding)
    }

    pub fn step(&self, episode: &mut Episode, action: NodeId) -> Result<StepResult, DqnError> {
        if !self.graph.contains(action) || action == episode.current {
            return Err(DqnError::InvalidAction(action.0));
        }
        let reward = -self.graph.cost(episode.current, action);
        episode.belief.observe_truth(action, &episode.truth).map_err(HuntError::from)?;
        episode.current = action;
        episode.steps += 1;
        episode.total_reward += reward;
        let terminal = episode.belief.all_found();
        Ok(StepResult { reward, terminal, truncated: !terminal && episode.steps >= self.step_limit })
    }
}

/// Mean return (negative realized cost) of the greedy policy over
/// `episodes` arrangements drawn from `rng`.
pub fn evaluate_policy<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    prior: &PriorModel,
    start: NodeId,
    planner: &DqnPlanner,
    episodes: usize,
    rng: &mut R,
) -> Result<f64, DqnError> {
    if episodes == 0 {
        return Ok(0.0);
    }
    let step_limit = default_step_limit(graph.node_count(), prior.object_count());
    let mut total = 0.0;
    for _ in 0..episodes {
        let truth = prior.sample(rng);
        let instance = HuntInstance::new(graph.clone(), prior.clone(), truth, start)?;
        let mut p = planner.clone();
        total -= run_hunt(&instance, &mut p, step_limit)?.total_cost();
    }
    Ok(total / episodes as f64)
}

/// Trains a Q-network on one environment and returns the best epoch's
/// network together with the learning curve.
pub fn train(
    graph: &WeightedGraph,
    prior: &PriorModel,
    start: NodeId,
    config: &TrainConfig,
) -> Result<TrainedPolicy, DqnError> {
    config.validate()?;
    HuntInstance::new(graph.clone(), prior.clone(), prior.sample(&mut ChaCha8Rng::seed_from_u64(0)), start)?;

    let l = graph.node_count();
    let env = HuntEnv::new(graph, prior, start, config.encoding);
    let reward_scale = if config.scale_rewards { config.encoding.cost_scale(graph) } else { 1.0 };

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, INIT_STREAM]));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, BEHAVIOUR_STREAM]));
    let mut net = QNetwork::for_nodes(l, config.hidden_units, &mut init_rng);
    let mut target = net.clone();
    let mut adam = Adam::new(net.param_count(), config.adam);
    let mut replay = ReplayBuffer::new(config.replay_capacity);
    let mut updates = 0usize;

    let mut best: Option<(f64, usize, QNetwork)> = None;
    let mut curve = Vec::with_capacity(config.epochs);
    let mut episode = env.reset(&mut rng)?;

    for epoch in 0..config.epochs {
        let lr = config.learning_rate(epoch);
        let epsilon = config.epsilon(epoch);

        for _ in 0..config.steps_per_epoch {
            if episode.is_done() {
                // arrangement fully visible from the start node; nothing to learn
                episode = env.reset(&mut rng)?;
                continue;
            }

            let observation = env.observe(&episode);
            let action = if l < 2 {
                return Err(DqnError::InvalidConfig("training needs at least two nodes".into()));
            } else if rng.random::<f64>() < epsilon {
                let mut a = rng.random_range(0..l - 1);
                if a >= episode.current.0 {
                    a += 1;
                }
                NodeId(a)
            } else {
                let q = net.forward(&observation)?;
                greedy_action(&q, episode.current)
            };

            let result = env.step(&mut episode, action)?;
            replay.push(Transition {
                observation,
                action: action.0,
                reward: result.reward * reward_scale,
                next_observation: env.observe(&episode),
                terminal: result.terminal,
                next_masked_action: Some(episode.current.0),
            });
            if result.terminal || result.truncated {
                episode = env.reset(&mut rng)?;
            }

            if replay.len() >= config.batch_size {
                let batch = replay.sample(config.batch_size, &mut rng);
                let (_, grads) = td_loss_and_gradients(&net, &target, &batch, config.gamma)?;
                adam.step(net.params_mut(), &grads, lr);
                updates += 1;
                if updates.is_multiple_of(config.target_sync_interval) {
                    target.clone_from(&net);
                }
            }
        }

        let planner = DqnPlanner::new(net.clone(), config.encoding);
        let mut eval_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, EVAL_STREAM, epoch as u64]));
        let mean = evaluate_policy(graph, prior, start, &planner, config.test_episodes, &mut eval_rng)?;
        curve.push(EpochRecord { epoch, mean_test_return: mean, epsilon, lr });
        if best.as_ref().is_none_or(|(b, _, _)| mean > *b) {
            best = Some((mean, epoch, net.clone()));
        }
    }

    let (best_mean_return, best_epoch, network) = best.unwrap_or((f64::NEG_INFINITY, 0, net));
    Ok(TrainedPolicy { network, encoding: config.encoding, best_epoch, best_mean_return, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_euclidean_graph;

    #[test]
    fn schedules_match_closed_forms() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate(0), 0.05);
        assert_eq!(c.learning_rate(20), 0.025);
        assert_eq!(c.learning_rate(40), 0.0);
        assert_eq!(c.learning_rate(55), 0.0);
        assert_eq!(c.epsilon(0), 1.0);
        assert!((c.epsilon(5) - 0.5).abs() < 1e-12);
        assert_eq!(c.epsilon(10), 0.02);
        assert_eq!(c.epsilon(30), 0.02);
    }

    #[test]
    fn episode_rewards_sum_to_negative_cost() {
        let g = random_euclidean_graph(6, 3).unwrap();
        let prior =
            PriorModel::new(6, vec![vec![0.0, 0.2, 0.3, 0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5, 0.5, 0.0, 0.0]]).unwrap();
        let env = HuntEnv::new(&g, &prior, NodeId(0), ObservationEncoding::MAP);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let mut ep = env.reset(&mut rng).unwrap();
            let mut sum = 0.0;
            let mut cost = 0.0;
            let mut at = NodeId(0);
            for next in [NodeId(1), NodeId(2), NodeId(3), NodeId(4)] {
                if ep.is_done() {
                    break;
                }
                sum += env.step(&mut ep, next).unwrap().reward;
                cost += g.cost(at, next);
                at = next;
            }
            assert!(ep.is_done());
            assert_eq!(sum, -cost);
            assert_eq!(ep.total_reward, -cost);
        }
    }

    #[test]
    fn step_rejects_staying() {
        let g = random_euclidean_graph(3, 3).unwrap();
        let prior = PriorModel::new(3, vec![vec![0.0, 0.5, 0.5]]).unwrap();
        let env = HuntEnv::new(&g, &prior, NodeId(0), ObservationEncoding::MAP);
        let mut ep = env.reset_with(Arrangement::new(vec![NodeId(2)])).unwrap();
        assert!(matches!(env.step(&mut ep, NodeId(0)), Err(DqnError::InvalidAction(0))));
        let r = env.step(&mut ep, NodeId(1)).unwrap();
        assert!(!r.terminal && !r.truncated);
        assert!(env.step(&mut ep, NodeId(2)).unwrap().terminal);
    }

    #[test]
    fn curve_csv_layout() {
        let mut out = Vec::new();
        write_curve_csv(&mut out, &[EpochRecord { epoch: 0, mean_test_return: -12.5, epsilon: 1.0, lr: 0.05 }])
            .unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "epoch,mean_test_return,epsilon,lr\n0,-12.5,1,0.05\n");
    }
}
