//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BinaryHeap;

use rand::Rng;
use scavenger_hunt::belief::PriorModel;
use scavenger_hunt::dqn::{td_loss_and_gradients, QNetwork, Transition};
use scavenger_hunt::graph::{NodeId, WeightedGraph};
use scavenger_hunt::ObjectId;

/// Every ordering of `items`, in lexicographic order of positions.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Cheapest open path from `start` through all distinct non-start targets,
/// by trying every ordering.
pub fn brute_force_path_cost(graph: &WeightedGraph, start: NodeId, targets: &[NodeId]) -> f64 {
    let mut rest: Vec<NodeId> = targets.iter().copied().filter(|&t| t != start).collect();
    rest.sort();
    rest.dedup();
    permutations(&rest).iter().map(|p| graph.path_cost(start, p)).fold(f64::INFINITY, f64::min)
}

#[derive(PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// All-pairs shortest paths by Dijkstra from every source, treating each
/// given edge as undirected. `None` where unreachable.
pub fn dijkstra_closure(raw: &[Vec<Option<f64>>]) -> Vec<Vec<Option<f64>>> {
    let n = raw.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if let Some(w) = raw[i][j] {
                if i != j {
                    adj[i].push((j, w));
                    adj[j].push((i, w));
                }
            }
        }
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![None; n];
            let mut heap = BinaryHeap::new();
            dist[s] = Some(0.0);
            heap.push(Entry(0.0, s));
            while let Some(Entry(d, u)) = heap.pop() {
                if dist[u].is_some_and(|best: f64| d > best) {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    let nd = d + w;
                    if dist[v].is_none_or(|cur| nd < cur) {
                        dist[v] = Some(nd);
                        heap.push(Entry(nd, v));
                    }
                }
            }
            dist
        })
        .collect()
}

/// Random prior: each object gets `1..=max_support` random nodes with
/// random positive weights.
pub fn random_prior<R: Rng>(rng: &mut R, nodes: usize, objects: usize, max_support: usize) -> PriorModel {
    let rows = (0..objects)
        .map(|_| {
            let k = rng.random_range(1..=max_support.min(nodes));
            let mut row = vec![0.0; nodes];
            for idx in rand::seq::index::sample(rng, nodes, k) {
                row[idx] = rng.random_range(0.05..1.0);
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|p| p / s).collect()
        })
        .collect();
    PriorModel::new(nodes, rows).unwrap()
}

/// Posterior over full arrangements given observations, by brute force over
/// the joint prior: `P(x | obs) ∝ P(x) · [x agrees with every observation]`.
///
/// An observation `(n, present)` says exactly the objects in `present` are
/// at `n`.
pub fn joint_posterior(prior: &PriorModel, observations: &[(NodeId, Vec<ObjectId>)]) -> Vec<(Vec<usize>, f64)> {
    let l = prior.node_count();
    let k = prior.object_count();
    let total = l.pow(k as u32);
    let mut out = Vec::new();
    let mut norm = 0.0;
    for code in 0..total {
        let mut x = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k {
            x.push(c % l);
            c /= l;
        }
        let p: f64 = x.iter().enumerate().map(|(o, &n)| prior.prob(ObjectId(o), NodeId(n))).product();
        if p == 0.0 {
            continue;
        }
        let agrees = observations
            .iter()
            .all(|(node, present)| (0..k).all(|o| (x[o] == node.0) == present.contains(&ObjectId(o))));
        if agrees {
            norm += p;
            out.push((x, p));
        }
    }
    for e in &mut out {
        e.1 /= norm;
    }
    out
}

/// Marginal of `object` at `node` under a joint posterior.
pub fn marginal(joint: &[(Vec<usize>, f64)], object: usize, node: usize) -> f64 {
    joint.iter().filter(|(x, _)| x[object] == node).map(|(_, p)| p).sum()
}

pub fn random_batch<R: Rng>(rng: &mut R, l: usize, n: usize) -> Vec<Transition> {
    (0..n)
        .map(|_| {
            let obs = |rng: &mut R| (0..2 * l).map(|_| rng.random_range(0.0..1.0)).collect::<Vec<f64>>();
            let current = rng.random_range(0..l);
            Transition {
                observation: obs(rng),
                action: rng.random_range(0..l),
                reward: rng.random_range(-1.0..0.0),
                next_observation: obs(rng),
                terminal: rng.random_bool(0.3),
                next_masked_action: if rng.random_bool(0.8) { Some(current) } else { None },
            }
        })
        .collect()
}

/// `‖g − g_fd‖ / max(‖g‖, ‖g_fd‖)` with central differences of step `h`.
pub fn gradient_relative_error(net: &QNetwork, target: &QNetwork, batch: &[Transition], gamma: f64, h: f64) -> f64 {
    let (_, grads) = td_loss_and_gradients(net, target, batch, gamma).unwrap();
    let mut probe = net.clone();
    let mut diff2 = 0.0;
    let mut g2 = 0.0;
    let mut f2 = 0.0;
    for i in 0..net.param_count() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let (up, _) = td_loss_and_gradients(&probe, target, batch, gamma).unwrap();
        probe.params_mut()[i] = orig - h;
        let (down, _) = td_loss_and_gradients(&probe, target, batch, gamma).unwrap();
        probe.params_mut()[i] = orig;
        let fd = (up - down) / (2.0 * h);
        diff2 += (grads[i] - fd).powi(2);
        g2 += grads[i].powi(2);
        f2 += fd * fd;
    }
    let scale = g2.sqrt().max(f2.sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff2.sqrt() / scale
    }
}

/// Smallest |pre-activation| of any hidden unit over the batch's observations.
pub fn relu_margin(net: &QNetwork, batch: &[Transition]) -> f64 {
    let sizes = net.sizes();
    let mut margin = f64::INFINITY;
    for t in batch {
        let mut a = t.observation.clone();
        for i in 0..sizes.len() - 2 {
            let (w, b) = net.layer(i);
            let z: Vec<f64> = (0..sizes[i + 1])
                .map(|r| b[r] + a.iter().enumerate().map(|(c, x)| w[r * sizes[i] + c] * x).sum::<f64>())
                .collect();
            margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
            a = z.into_iter().map(|v| v.max(0.0)).collect();
        }
    }
    margin
}

/// Central-difference step that stays clear of ReLU kinks.
pub fn kink_safe_step(net: &QNetwork, batch: &[Transition]) -> f64 {
    (0.01 * relu_margin(net, batch)).min(1e-5)
}
