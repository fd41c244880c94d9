//! Louvain modularity maximization, the alternative detector.
//!
//! Directed graphs are symmetrized: a reciprocal pair becomes one edge of
//! weight 2.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::SocialGraph;
use crate::seed;

#[derive(Debug, Clone)]
pub struct Louvain {
    pub max_passes: usize,
    pub min_gain: f64,
}

impl Default for Louvain {
    fn default() -> Self {
        Louvain {
            max_passes: 100,
            min_gain: 1e-12,
        }
    }
}

struct WeightedLevel {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl WeightedLevel {
    fn from_graph(graph: &SocialGraph) -> Self {
        let n = graph.vertex_count();
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (a, b) in graph.edge_indices() {
            *maps[a].entry(b).or_insert(0.0) += 1.0;
            *maps[b].entry(a).or_insert(0.0) += 1.0;
        }
        WeightedLevel {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops: vec![0.0; n],
        }
    }

    fn strength(&self, a: usize) -> f64 {
        self.adj[a].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[a]
    }

    fn aggregate(&self, modules: &[usize], k: usize) -> Self {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        let mut self_loops = vec![0.0; k];
        for (a, links) in self.adj.iter().enumerate() {
            let ma = modules[a];
            self_loops[ma] += self.self_loops[a];
            for &(b, w) in links {
                let mb = modules[b];
                if ma == mb {
                    // Each internal edge is seen from both ends.
                    self_loops[ma] += w / 2.0;
                } else {
                    *maps[ma].entry(mb).or_insert(0.0) += w;
                }
            }
        }
        WeightedLevel {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
        }
    }
}

/// Newman modularity of a module assignment on the symmetrized graph.
pub fn modularity(graph: &SocialGraph, modules: &[usize]) -> f64 {
    let level = WeightedLevel::from_graph(graph);
    let two_m: f64 = (0..level.adj.len()).map(|a| level.strength(a)).sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let k = modules.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for (a, links) in level.adj.iter().enumerate() {
        total[modules[a]] += level.strength(a);
        for &(b, w) in links {
            if modules[a] == modules[b] {
                internal[modules[a]] += w;
            }
        }
    }
    (0..k)
        .map(|c| internal[c] / two_m - (total[c] / two_m).powi(2))
        .sum()
}

impl Louvain {
    /// Module label per vertex index.
    pub fn run(&self, graph: &SocialGraph, seed: u64) -> Vec<usize> {
        let mut rng = seed::rng(seed, &[]);
        let mut level = WeightedLevel::from_graph(graph);
        let two_m: f64 = (0..level.adj.len()).map(|a| level.strength(a)).sum();
        let mut leaf: Vec<usize> = (0..graph.vertex_count()).collect();
        if two_m == 0.0 {
            return leaf;
        }
        loop {
            let n = level.adj.len();
            let mut modules: Vec<usize> = (0..n).collect();
            let strength: Vec<f64> = (0..n).map(|a| level.strength(a)).collect();
            let mut total = strength.clone();
            let mut order: Vec<usize> = (0..n).collect();
            let mut weight_to = vec![0.0; n];
            let mut seen = vec![false; n];
            let mut touched = Vec::new();
            let mut moved_any = false;
            for _ in 0..self.max_passes {
                order.shuffle(&mut rng);
                let mut moved = false;
                for &a in &order {
                    let from = modules[a];
                    touched.clear();
                    for &(b, w) in &level.adj[a] {
                        let m = modules[b];
                        if !seen[m] {
                            seen[m] = true;
                            touched.push(m);
                        }
                        weight_to[m] += w;
                    }
                    total[from] -= strength[a];
                    let gain = |m: usize, w: f64| w - total[m] * strength[a] / two_m;
                    let stay = gain(from, weight_to[from]);
                    let mut best = (from, stay);
                    for &m in &touched {
                        let g = gain(m, weight_to[m]);
                        if g > best.1 + self.min_gain {
                            best = (m, g);
                        }
                    }
                    total[best.0] += strength[a];
                    if best.0 != from {
                        modules[a] = best.0;
                        moved = true;
                        moved_any = true;
                    }
                    for &m in &touched {
                        weight_to[m] = 0.0;
                        seen[m] = false;
                    }
                }
                if !moved {
                    break;
                }
            }
            let dense = super::densify(&modules);
            let k = dense.iter().copied().max().map_or(0, |m| m + 1);
            for v in leaf.iter_mut() {
                *v = dense[*v];
            }
            if !moved_any || k == n {
                break;
            }
            level = level.aggregate(&dense, k);
        }
        leaf
    }
}

#[cfg(test)]
mod tests {
    use super::super::testgraphs::*;
    use super::*;

    #[test]
    fn modularity_of_clique_split() {
        let g = two_cliques(5);
        let split: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let one = vec![0; 10];
        assert!(modularity(&g, &split) > modularity(&g, &one));
        assert!(modularity(&g, &one).abs() < 1e-12);
    }

    #[test]
    fn louvain_finds_cliques() {
        let g = two_cliques(5);
        let modules = Louvain::default().run(&g, 7);
        assert!(modules[..5].iter().all(|&m| m == modules[0]));
        assert!(modules[5..].iter().all(|&m| m == modules[5]));
        assert_ne!(modules[0], modules[5]);
    }
}
