//! Seeded random walks over a semantic network.
//!
//! A walk starts at the cue and takes `length` steps; each step either
//! jumps back to the cue (probability `jump_prob`) or crosses an incident
//! edge of the current node, chosen uniformly or in proportion to edge
//! weight. Only the first visit to a non-cue node counts as producing a
//! word; the inter-item retrieval time (IRT) between consecutive novel
//! words is the number of steps separating their first visits, so revisits
//! in between lengthen it.
//!
//! Walks are deterministic given the network and a [`WalkConfig`]; batches
//! use per-walk seeds `base_seed + index` and may run in parallel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::network::SemanticNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Number of steps (the trace holds `length + 1` nodes).
    pub length: usize,
    /// Choose edges in proportion to weight instead of uniformly.
    pub weighted: bool,
    /// Probability of jumping back to the cue at each step.
    pub jump_prob: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            length: 0,
            weighted: false,
            jump_prob: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkStatus {
    Completed,
    /// The walk hit an edgeless node with no jump probability; `at_step` is
    /// the step that could not be taken. Possible only when the walk runs
    /// outside an extracted cue component.
    Stranded { at_step: usize },
}

/// Node sequence of one walk plus the derived novel-word record.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace {
    /// Visited node names; `nodes[0]` is the cue, index equals step.
    pub nodes: Vec<String>,
    /// (word, step of first visit) per novel non-cue word, in visit order.
    pub novel: Vec<(String, usize)>,
    pub status: WalkStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrtItem {
    pub word: String,
    /// Steps since the previous novel word (or since the cue for the first).
    pub irt: usize,
}

/// Novel words with their inter-item retrieval times.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IrtSequence {
    pub items: Vec<IrtItem>,
}

impl IrtSequence {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.word.as_str())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn mean_irt(&self) -> Option<f64> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items.iter().map(|i| i.irt as f64).sum::<f64>() / self.items.len() as f64)
        }
    }
}

/// Runs one walk. An edgeless start (and `jump_prob = 0`) strands the walk
/// immediately rather than erroring; the status reports it.
pub fn walk(net: &SemanticNetwork, cfg: &WalkConfig) -> WalkTrace {
    let adjacency = net.adjacency();
    let cue = net.cue_index();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut nodes = Vec::with_capacity(cfg.length + 1);
    let mut visited = vec![false; net.node_count()];
    let mut novel = Vec::new();
    let mut current = cue;
    visited[cue] = true;
    nodes.push(net.node_name(cue).to_string());

    let mut status = WalkStatus::Completed;
    for step in 1..=cfg.length {
        let jump = cfg.jump_prob > 0.0 && rng.random_bool(cfg.jump_prob);
        let next = if jump {
            cue
        } else {
            let neighbors = &adjacency[current];
            if neighbors.is_empty() {
                if cfg.jump_prob > 0.0 {
                    cue // the only possible move
                } else {
                    status = WalkStatus::Stranded { at_step: step };
                    break;
                }
            } else if cfg.weighted {
                let total: f64 = neighbors.iter().map(|(_, w)| w).sum();
                if total > 0.0 {
                    let mut x = rng.random_range(0.0..total);
                    let mut chosen = neighbors[neighbors.len() - 1].0;
                    for &(node, weight) in neighbors {
                        if x < weight {
                            chosen = node;
                            break;
                        }
                        x -= weight;
                    }
                    chosen
                } else {
                    // All-zero weights carry no preference; fall back to uniform.
                    neighbors[rng.random_range(0..neighbors.len())].0
                }
            } else {
                neighbors[rng.random_range(0..neighbors.len())].0
            }
        };

        nodes.push(net.node_name(next).to_string());
        if !visited[next] {
            visited[next] = true;
            novel.push((net.node_name(next).to_string(), step));
        }
        current = next;
    }

    WalkTrace { nodes, novel, status }
}

/// `reps` independent walks with per-walk seeds `cfg.seed + index`, run in
/// parallel and returned in index order.
pub fn run_walks(net: &SemanticNetwork, cfg: &WalkConfig, reps: usize) -> Vec<WalkTrace> {
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let cfg = WalkConfig {
                seed: cfg.seed.wrapping_add(i as u64),
                ..*cfg
            };
            walk(net, &cfg)
        })
        .collect()
}

/// Inter-item retrieval times from a trace's first-visit record.
pub fn irts(trace: &WalkTrace) -> IrtSequence {
    let mut items = Vec::with_capacity(trace.novel.len());
    let mut prev_step = 0usize;
    for (word, step) in &trace.novel {
        items.push(IrtItem {
            word: word.clone(),
            irt: step - prev_step,
        });
        prev_step = *step;
    }
    IrtSequence { items }
}

/// Number of novel words produced (the cue is given, never produced).
pub fn words_produced(trace: &WalkTrace) -> usize {
    trace.novel.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn net(cue: &str, edges: &[(&str, &str, f64)]) -> SemanticNetwork {
        SemanticNetwork::from_edges(
            cue,
            0.0,
            0.0,
            Vec::new(),
            edges
                .iter()
                .map(|(u, v, w)| (u.to_string(), v.to_string(), *w)),
        )
        .unwrap()
    }

    fn cfg(length: usize, weighted: bool, seed: u64) -> WalkConfig {
        WalkConfig {
            length,
            weighted,
            jump_prob: 0.0,
            seed,
        }
    }

    #[test]
    fn zero_length_walk() {
        let g = net("q", &[("q", "a", 0.5)]);
        let t = walk(&g, &cfg(0, false, 1));
        assert_eq!(t.nodes, vec!["q"]);
        assert!(t.novel.is_empty());
        assert_eq!(t.status, WalkStatus::Completed);
        assert_eq!(words_produced(&t), 0);
    }

    #[test]
    fn two_node_walk_alternates() {
        let g = net("q", &[("q", "a", 0.5)]);
        for seed in 0..5 {
            let t = walk(&g, &cfg(7, false, seed));
            let expect: Vec<&str> = (0..=7).map(|i| if i % 2 == 0 { "q" } else { "a" }).collect();
            assert_eq!(t.nodes, expect);
            assert_eq!(t.novel, vec![("a".to_string(), 1)]);
        }
    }

    #[test]
    fn star_graph_unweighted_frequencies() {
        let g = net("q", &[("q", "a", 0.5), ("q", "b", 0.5), ("q", "c", 0.5)]);
        let t = walk(&g, &cfg(10_000, false, 42));
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for n in &t.nodes[1..] {
            *counts.entry(n.as_str()).or_default() += 1;
        }
        let leaf_visits = (counts["a"] + counts["b"] + counts["c"]) as f64;
        for leaf in ["a", "b", "c"] {
            let freq = counts[leaf] as f64 / leaf_visits;
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "{leaf}: {freq}");
        }
    }

    #[test]
    fn weighted_selection_frequency() {
        // From q, edge to a carries twice the weight of the edge to b.
        let g = net("q", &[("q", "a", 0.6), ("q", "b", 0.3)]);
        let t = walk(&g, &cfg(100_000, true, 7));
        let a = t.nodes.iter().filter(|n| *n == "a").count() as f64;
        let b = t.nodes.iter().filter(|n| *n == "b").count() as f64;
        let freq = a / (a + b);
        assert!((freq - 2.0 / 3.0).abs() < 0.02, "{freq}");
    }

    #[test]
    fn stranded_walk_reports_step() {
        // Network with an edge (so from_edges accepts it) but an isolated cue.
        let g = SemanticNetwork::from_edges(
            "q",
            0.0,
            0.0,
            ["q".to_string()],
            [("a".to_string(), "b".to_string(), 0.5)],
        )
        .unwrap();
        let t = walk(&g, &cfg(5, false, 1));
        assert_eq!(t.status, WalkStatus::Stranded { at_step: 1 });
        assert_eq!(t.nodes, vec!["q"]);

        // With jump probability the cue is the only possible move.
        let t = walk(
            &g,
            &WalkConfig {
                length: 3,
                weighted: false,
                jump_prob: 0.5,
                seed: 1,
            },
        );
        assert_eq!(t.status, WalkStatus::Completed);
        assert_eq!(t.nodes, vec!["q"; 4]);
        assert!(t.novel.is_empty());
    }

    #[test]
    fn jump_prob_one_pins_walk_to_cue() {
        let g = net("q", &[("q", "a", 0.5)]);
        let t = walk(
            &g,
            &WalkConfig {
                length: 6,
                weighted: false,
                jump_prob: 1.0,
                seed: 3,
            },
        );
        assert_eq!(t.nodes, vec!["q"; 7]);
        assert!(irts(&t).is_empty());
    }

    #[test]
    fn irts_all_novel() {
        let t = WalkTrace {
            nodes: vec!["q".into(), "a".into(), "b".into(), "c".into()],
            novel: vec![("a".into(), 1), ("b".into(), 2), ("c".into(), 3)],
            status: WalkStatus::Completed,
        };
        let seq = irts(&t);
        assert_eq!(
            seq.items,
            vec![
                IrtItem { word: "a".into(), irt: 1 },
                IrtItem { word: "b".into(), irt: 1 },
                IrtItem { word: "c".into(), irt: 1 },
            ]
        );
    }

    #[test]
    fn irts_count_revisit_steps() {
        // Hand-trace: first visits at steps 1 (a) and 4 (b).
        let t = WalkTrace {
            nodes: vec!["q".into(), "a".into(), "q".into(), "a".into(), "b".into()],
            novel: vec![("a".into(), 1), ("b".into(), 4)],
            status: WalkStatus::Completed,
        };
        let seq = irts(&t);
        assert_eq!(
            seq.items,
            vec![
                IrtItem { word: "a".into(), irt: 1 },
                IrtItem { word: "b".into(), irt: 3 },
            ]
        );
        // Cumulative IRTs reconstruct the first-visit steps.
        let mut cum = 0;
        for (item, (_, step)) in seq.items.iter().zip(&t.novel) {
            cum += item.irt;
            assert_eq!(cum, *step);
        }
    }

    #[test]
    fn irts_empty_without_novel_words() {
        let t = WalkTrace {
            nodes: vec!["q".into(), "q".into(), "q".into()],
            novel: vec![],
            status: WalkStatus::Completed,
        };
        assert!(irts(&t).is_empty());
    }

    #[test]
    fn complete_graph_visits_everyone() {
        let words = ["a", "b", "c", "d"];
        let mut edges = vec![];
        for (i, u) in words.iter().enumerate() {
            edges.push(("q", *u, 0.5));
            for v in &words[i + 1..] {
                edges.push((*u, *v, 0.5));
            }
        }
        let g = net("q", &edges);
        let t = walk(&g, &cfg(500, false, 9));
        assert_eq!(words_produced(&t), 4);
    }

    #[test]
    fn walks_are_deterministic() {
        let g = net(
            "q",
            &[("q", "a", 0.9), ("a", "b", 0.8), ("b", "c", 0.7), ("q", "c", 0.6)],
        );
        let c = cfg(50, true, 123);
        assert_eq!(walk(&g, &c), walk(&g, &c));
        let batch1 = run_walks(&g, &c, 8);
        let batch2 = run_walks(&g, &c, 8);
        assert_eq!(batch1, batch2);
        // Batch walk i equals a single walk with seed + i.
        for (i, t) in batch1.iter().enumerate() {
            let solo = walk(&g, &cfg(50, true, 123 + i as u64));
            assert_eq!(t, &solo);
        }
    }

    #[test]
    fn novel_steps_are_first_occurrences() {
        let g = net(
            "q",
            &[("q", "a", 0.5), ("a", "b", 0.5), ("b", "q", 0.5), ("b", "c", 0.5)],
        );
        let t = walk(&g, &cfg(200, false, 11));
        for (word, step) in &t.novel {
            let first = t.nodes.iter().position(|n| n == word).unwrap();
            assert_eq!(first, *step);
            assert_ne!(word, "q");
        }
        assert_eq!(t.nodes.len(), 201);
        assert_eq!(t.nodes[0], "q");
    }
}
