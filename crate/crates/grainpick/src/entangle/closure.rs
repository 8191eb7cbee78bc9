//! Probabilistic pick closure: BFS from seed bodies through entanglement
//! edges that independently hold or slip.

use super::EntanglementGraph;
use rand::Rng;
use std::collections::BTreeSet;

/// Probability that an interlock of a given depth survives the pull.
#[derive(Debug, Clone, Copy)]
pub struct LinkModel {
    /// Depth scale of the holding law (mm). Smaller values make shallow
    /// interlocks hold more often.
    pub d0_mm: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel { d0_mm: 2.0 }
    }
}

impl LinkModel {
    /// p_hold(depth) = 1 - exp(-depth / d0): zero at zero depth, saturating.
    pub fn p_hold(&self, depth_mm: f64) -> f64 {
        1.0 - (-depth_mm / self.d0_mm).exp()
    }
}

/// Bodies retrieved when the seeds are pulled: seeds plus everything
/// reachable through holding edges.
///
/// One uniform draw is made per edge in edge order before traversal, so two
/// closures with the same seed stream are coupled: a pointwise larger
/// p_hold can only add held edges.
pub fn pick_closure<R: Rng>(
    graph: &EntanglementGraph,
    seeds: &BTreeSet<usize>,
    link_model: &LinkModel,
    rng: &mut R,
) -> BTreeSet<usize> {
    let draws: Vec<f64> = graph.edges.iter().map(|_| rng.gen::<f64>()).collect();
    let held: Vec<bool> = graph
        .edges
        .iter()
        .zip(&draws)
        .map(|(e, u)| *u < link_model.p_hold(e.depth_mm))
        .collect();

    let adj = graph.adjacency();
    let mut picked: BTreeSet<usize> = seeds.clone();
    let mut queue: Vec<usize> = seeds.iter().copied().collect();
    while let Some(node) = queue.pop() {
        if node >= adj.len() {
            continue;
        }
        for &(next, edge_idx) in &adj[node] {
            if held[edge_idx] && picked.insert(next) {
                queue.push(next);
            }
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::{Edge, EdgeKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_graph(depths: &[f64]) -> EntanglementGraph {
        EntanglementGraph {
            n_nodes: depths.len() + 1,
            edges: depths
                .iter()
                .enumerate()
                .map(|(i, &d)| Edge {
                    body_a: i,
                    body_b: i + 1,
                    depth_mm: d,
                    kind: EdgeKind::GrainGrain,
                })
                .collect(),
        }
    }

    #[test]
    fn certain_hold_picks_components() {
        let graph = chain_graph(&[1e9, 1e9, 1e9]);
        let seeds: BTreeSet<usize> = [0].into();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let picked = pick_closure(&graph, &seeds, &LinkModel { d0_mm: 2.0 }, &mut rng);
        assert_eq!(picked, [0, 1, 2, 3].into());
    }

    #[test]
    fn zero_hold_keeps_only_seeds() {
        let graph = chain_graph(&[0.0, 0.0]);
        let seeds: BTreeSet<usize> = [1].into();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let picked = pick_closure(&graph, &seeds, &LinkModel { d0_mm: 2.0 }, &mut rng);
        assert_eq!(picked, [1].into());
    }

    #[test]
    fn closure_always_contains_seeds() {
        let graph = chain_graph(&[0.5, 1.5, 0.2, 3.0]);
        for seed in 0..5usize {
            let seeds: BTreeSet<usize> = [seed].into();
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let picked = pick_closure(&graph, &seeds, &LinkModel::default(), &mut rng);
            assert!(picked.contains(&seed));
        }
    }

    #[test]
    fn single_edge_matches_bernoulli_mean() {
        let model = LinkModel { d0_mm: 2.0 };
        // depth chosen so p_hold = 0.7.
        let depth = -2.0 * (1.0f64 - 0.7).ln();
        let graph = chain_graph(&[depth]);
        let seeds: BTreeSet<usize> = [0].into();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            if pick_closure(&graph, &seeds, &model, &mut rng).contains(&1) {
                hits += 1;
            }
        }
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.7).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn coupled_streams_are_monotone_in_p_hold() {
        let graph = chain_graph(&[0.4, 1.0, 2.5, 0.8, 1.7]);
        let seeds: BTreeSet<usize> = [0].into();
        // Smaller d0 -> pointwise larger p_hold.
        let strong = LinkModel { d0_mm: 0.5 };
        let weak = LinkModel { d0_mm: 4.0 };
        for seed in 0..200u64 {
            let mut rng_a = ChaCha8Rng::seed_from_u64(seed);
            let mut rng_b = ChaCha8Rng::seed_from_u64(seed);
            let picked_strong = pick_closure(&graph, &seeds, &strong, &mut rng_a);
            let picked_weak = pick_closure(&graph, &seeds, &weak, &mut rng_b);
            assert!(
                picked_strong.is_superset(&picked_weak),
                "seed {seed}: {picked_strong:?} vs {picked_weak:?}"
            );
        }
    }
}
