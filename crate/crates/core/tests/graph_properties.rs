mod common;

use proptest::prelude::*;
use scavenger_hunt::graph::{metric_closure, random_euclidean_graph, shortest_hamiltonian_path, NodeId, WeightedGraph};

fn raw_graph() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (2usize..=10).prop_flat_map(|n| {
        proptest::collection::vec(proptest::option::weighted(0.6, 0.5f64..100.0), n * n).prop_map(move |cells| {
            let mut raw = vec![vec![None; n]; n];
            for i in 0..n {
                raw[i][i] = Some(0.0);
                for j in (i + 1)..n {
                    raw[i][j] = cells[i * n + j];
                    raw[j][i] = cells[i * n + j];
                }
                // a spanning path keeps the graph connected
                if i + 1 < n && raw[i][i + 1].is_none() {
                    let w = cells[(i + 1) * n + i].unwrap_or(50.0);
                    raw[i][i + 1] = Some(w);
                    raw[i + 1][i] = Some(w);
                }
            }
            raw
        })
    })
}

proptest! {
    #[test]
    fn closure_matches_dijkstra(raw in raw_graph()) {
        let g = metric_closure(&raw).unwrap();
        let oracle = common::dijkstra_closure(&raw);
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                let want = oracle[i][j].unwrap();
                prop_assert!((g.cost(NodeId(i), NodeId(j)) - want).abs() <= 1e-9 * want.max(1.0));
            }
        }
    }

    #[test]
    fn closure_satisfies_triangle_inequality(raw in raw_graph()) {
        let g = metric_closure(&raw).unwrap();
        let n = g.node_count();
        for a in 0..n {
            prop_assert_eq!(g.cost(NodeId(a), NodeId(a)), 0.0);
            for b in 0..n {
                prop_assert_eq!(g.cost(NodeId(a), NodeId(b)), g.cost(NodeId(b), NodeId(a)));
                for c in 0..n {
                    prop_assert!(g.cost(NodeId(a), NodeId(c)) <= g.cost(NodeId(a), NodeId(b)) + g.cost(NodeId(b), NodeId(c)) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn closure_is_idempotent(raw in raw_graph()) {
        let g = metric_closure(&raw).unwrap();
        let again: Vec<Vec<Option<f64>>> = g.to_matrix().into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        let h = metric_closure(&again).unwrap();
        for (a, b) in h.to_matrix().concat().iter().zip(g.to_matrix().concat()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn euclidean_costs_are_point_distances(n in 1usize..=12, seed in any::<u64>()) {
        let g = random_euclidean_graph(n, seed).unwrap();
        let pts = g.coords().unwrap().to_vec();
        let side = 100.0 * n as f64;
        for (i, &(xi, yi)) in pts.iter().enumerate() {
            prop_assert!((0.0..side).contains(&xi) && (0.0..side).contains(&yi));
            for (j, &(xj, yj)) in pts.iter().enumerate() {
                let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
                prop_assert!((g.cost(NodeId(i), NodeId(j)) - d).abs() <= 1e-9);
            }
        }
        prop_assert_eq!(random_euclidean_graph(n, seed).unwrap(), g);
    }

    #[test]
    fn held_karp_equals_brute_force(
        n in 2usize..=9,
        seed in any::<u64>(),
        start in 0usize..9,
        picks in proptest::collection::vec(0usize..9, 1..=8),
    ) {
        let g = random_euclidean_graph(n, seed).unwrap();
        let start = NodeId(start % n);
        let targets: Vec<NodeId> = picks.iter().map(|&p| NodeId(p % n)).collect();
        let path = shortest_hamiltonian_path(&g, start, &targets).unwrap();
        prop_assert_eq!(path.cost, common::brute_force_path_cost(&g, start, &targets));
        prop_assert_eq!(path.cost, g.path_cost(start, &path.nodes));
        let mut want: Vec<NodeId> = targets.clone();
        want.sort();
        want.dedup();
        let mut got = path.nodes.clone();
        got.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn scaling_costs_scales_paths(seed in any::<u64>(), factor in 0.1f64..10.0) {
        let g = random_euclidean_graph(7, seed).unwrap();
        let targets: Vec<NodeId> = (1..7).map(NodeId).collect();
        let a = shortest_hamiltonian_path(&g, NodeId(0), &targets).unwrap();
        let b = shortest_hamiltonian_path(&g.scaled(factor), NodeId(0), &targets).unwrap();
        prop_assert!((b.cost - factor * a.cost).abs() <= 1e-9 * b.cost.max(1.0));
    }
}

#[test]
fn ties_pick_the_lexicographically_smallest_path() {
    // unit square: 0 → {1, 2, 3} costs 3 both clockwise and anticlockwise
    let g = WeightedGraph::from_coords(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
    let p = shortest_hamiltonian_path(&g, NodeId(0), &[NodeId(3), NodeId(2), NodeId(1)]).unwrap();
    assert_eq!(p.nodes, vec![NodeId(1), NodeId(2), NodeId(3)]);
    assert_eq!(p.cost, 3.0);
}
