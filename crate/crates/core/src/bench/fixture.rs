use crate::belief::PriorModel;
use crate::envfile::Environment;
use crate::graph::{metric_closure, NodeId, WeightedGraph};

/// Seven-location lab environment with four objects.
///
/// Node `i` is the lab's location `i + 1`. The location probabilities are the
/// lab's occurrence model; the coordinates are synthetic placements since the
/// measured corridor lengths are not available. Start is location 6, which
/// holds no object.
pub fn robot_fixture() -> Environment {
    let coords = vec![(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (20.0, 10.0), (10.0, 10.0), (0.0, 10.0), (30.0, 5.0)];
    let graph = WeightedGraph::from_coords(coords).expect("finite coordinates");
    let rows: [&[(usize, f64)]; 4] = [
        &[(2, 0.1), (3, 0.8), (7, 0.1)],
        &[(1, 0.2), (3, 0.5), (7, 0.3)],
        &[(1, 0.2), (2, 0.3), (4, 0.2), (5, 0.3)],
        &[(4, 0.5), (5, 0.5)],
    ];
    let sparse: Vec<Vec<(NodeId, f64)>> =
        rows.iter().map(|r| r.iter().map(|&(label, p)| (NodeId(label - 1), p)).collect()).collect();
    let prior = PriorModel::from_sparse(7, &sparse).expect("rows sum to one");
    Environment { graph, prior, object_names: ["A", "B", "C", "D"].map(String::from).to_vec(), start: NodeId(5) }
}

/// Three nodes on a line (`0 –1– 1 –1– 2`), one object equally likely at
/// nodes 1 and 2, start at 0.
pub fn line_fixture() -> Environment {
    let graph = metric_closure(&[
        vec![Some(0.0), Some(1.0), None],
        vec![Some(1.0), Some(0.0), Some(1.0)],
        vec![None, Some(1.0), Some(0.0)],
    ])
    .expect("connected");
    let prior = PriorModel::new(3, vec![vec![0.0, 0.5, 0.5]]).expect("valid row");
    Environment { graph, prior, object_names: vec!["A".into()], start: NodeId(0) }
}
