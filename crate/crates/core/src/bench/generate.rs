use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::PriorModel;
use crate::envfile::Environment;
use crate::graph::{random_euclidean_graph, NodeId};
use crate::seed::derive_seed;

use super::BenchError;

const GRAPH_STREAM: u64 = 0x6772_6170;
const PRIOR_STREAM: u64 = 0x7072_696f;

/// Most locations a generated object can have.
pub const MAX_LOCATIONS_PER_OBJECT: usize = 3;

/// A random environment, fully determined by `(master_seed, node_count, env_id)`.
///
/// Nodes are uniform in a `100·n × 100·n` square. Each object gets 1–3
/// distinct locations with probabilities from a flat Dirichlet. The start
/// node is uniform.
pub fn generate_environment(
    node_count: usize,
    object_count: usize,
    master_seed: u64,
    env_id: u64,
) -> Result<Environment, BenchError> {
    if node_count < MAX_LOCATIONS_PER_OBJECT {
        return Err(BenchError::Infeasible(format!(
            "generated environments need at least {MAX_LOCATIONS_PER_OBJECT} nodes, got {node_count}"
        )));
    }
    if object_count == 0 {
        return Err(BenchError::Infeasible("at least one object is required".into()));
    }
    let n = node_count as u64;
    let graph = random_euclidean_graph(node_count, derive_seed(&[master_seed, GRAPH_STREAM, n, env_id]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[master_seed, PRIOR_STREAM, n, env_id]));

    let mut rows = Vec::with_capacity(object_count);
    for _ in 0..object_count {
        let k = rng.random_range(1..=MAX_LOCATIONS_PER_OBJECT);
        let nodes = sample(&mut rng, node_count, k);
        let weights = flat_dirichlet(&mut rng, k);
        let mut row = vec![0.0; node_count];
        for (node, w) in nodes.iter().zip(weights) {
            row[node] = w;
        }
        rows.push(row);
    }
    let prior = PriorModel::new(node_count, rows)?;
    let start = NodeId(rng.random_range(0..node_count));
    let object_names = (0..object_count).map(|i| format!("o{i}")).collect();
    Ok(Environment { graph, prior, object_names, start })
}

/// Uniform point on the `k`-simplex via normalized unit exponentials.
fn flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / k as f64; k]
    }
}
