//! Two-level map equation and a Louvain-style optimizer for it.
//!
//! Node visit rates are degree-proportional on undirected graphs and come
//! from PageRank with uniform teleportation on directed graphs. Teleportation
//! out of a module counts toward that module's exit rate.

use rand::seq::SliceRandom;

use super::{densify, Partition, SocialGraph};
use crate::error::{Error, Result};
use crate::seed;

const PAGERANK_TOLERANCE: f64 = 1e-12;
const PAGERANK_MAX_ITERATIONS: usize = 1000;

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Random-walk flow on a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleportModel {
    /// Teleportation probability for directed graphs.
    pub rate: f64,
}

impl Default for TeleportModel {
    fn default() -> Self {
        TeleportModel { rate: 0.15 }
    }
}

/// Stationary visit rates and link flows of a graph.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    /// Stationary visit rate per node, summing to 1 (or 0 for an edgeless
    /// undirected graph).
    pub node_flow: Vec<f64>,
    /// Flow leaving each node by teleportation; zero for undirected graphs.
    pub teleport_flow: Vec<f64>,
    /// Outgoing link flows `(target, flow)` per node.
    pub links: Vec<Vec<(usize, f64)>>,
}

impl FlowNetwork {
    pub fn from_graph(graph: &SocialGraph, teleport: TeleportModel) -> Result<Self> {
        let n = graph.vertex_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in graph.edge_indices() {
            out[a].push(b);
            if !graph.is_directed() {
                out[b].push(a);
            }
        }
        if graph.is_directed() {
            Ok(Self::directed(&out, teleport.rate))
        } else {
            Ok(Self::undirected(&out))
        }
    }

    fn undirected(adj: &[Vec<usize>]) -> Self {
        let total: usize = adj.iter().map(Vec::len).sum();
        let n = adj.len();
        if total == 0 {
            return FlowNetwork {
                node_flow: vec![0.0; n],
                teleport_flow: vec![0.0; n],
                links: vec![Vec::new(); n],
            };
        }
        let unit = 1.0 / total as f64;
        FlowNetwork {
            node_flow: adj.iter().map(|a| a.len() as f64 * unit).collect(),
            teleport_flow: vec![0.0; n],
            links: adj
                .iter()
                .map(|a| a.iter().map(|&b| (b, unit)).collect())
                .collect(),
        }
    }

    fn directed(out: &[Vec<usize>], tau: f64) -> Self {
        let n = out.len();
        let nf = n as f64;
        let mut p = vec![1.0 / nf; n];
        let mut next = vec![0.0; n];
        for _ in 0..PAGERANK_MAX_ITERATIONS {
            let mut teleported = 0.0;
            next.iter_mut().for_each(|x| *x = 0.0);
            for (a, targets) in out.iter().enumerate() {
                if targets.is_empty() {
                    teleported += p[a];
                } else {
                    teleported += tau * p[a];
                    let share = (1.0 - tau) * p[a] / targets.len() as f64;
                    for &b in targets {
                        next[b] += share;
                    }
                }
            }
            let base = teleported / nf;
            next.iter_mut().for_each(|x| *x += base);
            let norm: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= norm);
            let delta: f64 = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut p, &mut next);
            if delta < PAGERANK_TOLERANCE {
                break;
            }
        }
        let teleport_flow = out
            .iter()
            .zip(&p)
            .map(|(t, &pa)| if t.is_empty() { pa } else { tau * pa })
            .collect();
        let links = out
            .iter()
            .zip(&p)
            .map(|(t, &pa)| {
                let share = (1.0 - tau) * pa / t.len().max(1) as f64;
                t.iter().map(|&b| (b, share)).collect()
            })
            .collect();
        FlowNetwork {
            node_flow: p,
            teleport_flow,
            links,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_flow.len()
    }

    /// Entropy of the visit rates in bits; the codelength of the one-module
    /// partition.
    pub fn visit_entropy(&self) -> f64 {
        -self.node_flow.iter().map(|&p| plogp(p)).sum::<f64>()
    }

    /// Two-level map equation `L(M)` in bits for a module label per node.
    pub fn codelength(&self, modules: &[usize]) -> f64 {
        let n = self.node_count();
        let k = modules.iter().copied().max().map_or(0, |m| m + 1);
        let mut flow = vec![0.0; k];
        let mut tele = vec![0.0; k];
        let mut size = vec![0.0; k];
        let mut exit = vec![0.0; k];
        for a in 0..n {
            let m = modules[a];
            flow[m] += self.node_flow[a];
            tele[m] += self.teleport_flow[a];
            size[m] += 1.0;
            for &(b, f) in &self.links[a] {
                if modules[b] != m {
                    exit[m] += f;
                }
            }
        }
        let nf = n as f64;
        let q: Vec<f64> = (0..k)
            .map(|m| tele[m] * (1.0 - size[m] / nf) + exit[m])
            .collect();
        let total_q: f64 = q.iter().sum();
        plogp(total_q)
            - 2.0 * q.iter().map(|&x| plogp(x)).sum::<f64>()
            - self.node_flow.iter().map(|&p| plogp(p)).sum::<f64>()
            + (0..k).map(|m| plogp(q[m] + flow[m])).sum::<f64>()
    }
}

/// Codelength of `partition` on `graph` with the default teleportation.
pub fn map_equation_codelength(graph: &SocialGraph, partition: &Partition) -> Result<f64> {
    let net = FlowNetwork::from_graph(graph, TeleportModel::default())?;
    let modules = partition.assignment(graph)?;
    Ok(net.codelength(&modules))
}

/// Map-equation optimizer: repeated local moving and module aggregation,
/// restarted with independent seeds, keeping the shortest description.
#[derive(Debug, Clone)]
pub struct MapEquation {
    pub restarts: usize,
    pub teleport: TeleportModel,
    pub max_passes: usize,
    /// A move must shorten the codelength by more than this.
    pub min_improvement: f64,
}

impl Default for MapEquation {
    fn default() -> Self {
        MapEquation {
            restarts: 10,
            teleport: TeleportModel::default(),
            max_passes: 100,
            min_improvement: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapEquationResult {
    /// Module label per vertex index.
    pub modules: Vec<usize>,
    pub codelength: f64,
    pub one_module_codelength: f64,
}

/// Current level of the coarsened network.
struct Level {
    flow: Vec<f64>,
    tele: Vec<f64>,
    size: Vec<f64>,
    out: Vec<Vec<(usize, f64)>>,
    inn: Vec<Vec<(usize, f64)>>,
    out_total: Vec<f64>,
}

impl Level {
    fn leaf(net: &FlowNetwork) -> Self {
        let n = net.node_count();
        let mut inn = vec![Vec::new(); n];
        for (a, links) in net.links.iter().enumerate() {
            for &(b, f) in links {
                inn[b].push((a, f));
            }
        }
        Level {
            flow: net.node_flow.clone(),
            tele: net.teleport_flow.clone(),
            size: vec![1.0; n],
            out_total: net
                .links
                .iter()
                .map(|l| l.iter().map(|&(_, f)| f).sum())
                .collect(),
            out: net.links.clone(),
            inn,
        }
    }

    fn len(&self) -> usize {
        self.flow.len()
    }

    /// Collapses each module into a node; `modules` must be dense `0..k`.
    fn aggregate(&self, modules: &[usize], k: usize) -> Level {
        let mut flow = vec![0.0; k];
        let mut tele = vec![0.0; k];
        let mut size = vec![0.0; k];
        let mut out_maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for a in 0..self.len() {
            let m = modules[a];
            flow[m] += self.flow[a];
            tele[m] += self.tele[a];
            size[m] += self.size[a];
            for &(b, f) in &self.out[a] {
                let mb = modules[b];
                if mb != m {
                    *out_maps[m].entry(mb).or_insert(0.0) += f;
                }
            }
        }
        let out: Vec<Vec<(usize, f64)>> = out_maps
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let mut inn = vec![Vec::new(); k];
        for (a, links) in out.iter().enumerate() {
            for &(b, f) in links {
                inn[b].push((a, f));
            }
        }
        Level {
            flow,
            tele,
            size,
            out_total: out
                .iter()
                .map(|l| l.iter().map(|&(_, f)| f).sum())
                .collect(),
            out,
            inn,
        }
    }
}

/// Per-module sums the move delta needs.
struct ModuleState {
    flow: Vec<f64>,
    tele: Vec<f64>,
    size: Vec<f64>,
    exit: Vec<f64>,
    members: Vec<usize>,
    total_q: f64,
    total_leaves: f64,
}

impl ModuleState {
    fn singletons(level: &Level, total_leaves: f64) -> Self {
        let mut s = ModuleState {
            flow: level.flow.clone(),
            tele: level.tele.clone(),
            size: level.size.clone(),
            exit: level.out_total.clone(),
            members: vec![1; level.len()],
            total_q: 0.0,
            total_leaves,
        };
        s.total_q = (0..level.len()).map(|m| s.q(m)).sum();
        s
    }

    fn exit_rate(&self, tele: f64, size: f64, exit: f64) -> f64 {
        (tele * (1.0 - size / self.total_leaves) + exit).max(0.0)
    }

    fn q(&self, m: usize) -> f64 {
        self.exit_rate(self.tele[m], self.size[m], self.exit[m])
    }
}

struct Move {
    target: usize,
    delta: f64,
    exit_source: f64,
    exit_target: f64,
}

impl MapEquation {
    pub fn with_restarts(restarts: usize) -> Self {
        MapEquation {
            restarts,
            ..Default::default()
        }
    }

    pub fn run(&self, graph: &SocialGraph, seed: u64) -> Result<MapEquationResult> {
        let net = FlowNetwork::from_graph(graph, self.teleport)?;
        let one_module = net.visit_entropy();
        let mut best: Option<(Vec<usize>, f64)> = None;
        for trial in 0..self.restarts.max(1) {
            let modules = self.trial(&net, seed::derive(seed, &[trial as u64]), None);
            let length = net.codelength(&modules);
            if best.as_ref().is_none_or(|(_, l)| length < *l) {
                best = Some((modules, length));
            }
        }
        let (mut modules, mut codelength) = best.expect("at least one trial");
        if one_module <= codelength + self.min_improvement {
            // Isolated vertices stay singletons.
            let degree = graph.degrees();
            modules = (0..net.node_count())
                .map(|a| if degree[a] == 0 { a + 1 } else { 0 })
                .collect();
            codelength = net.codelength(&modules);
        }
        Ok(MapEquationResult {
            modules: densify(&modules),
            codelength,
            one_module_codelength: one_module,
        })
    }

    /// One optimization trial from singleton modules. With `trace`, the leaf
    /// assignment after every accepted move is appended.
    pub fn trial(
        &self,
        net: &FlowNetwork,
        seed: u64,
        mut trace: Option<&mut Vec<Vec<usize>>>,
    ) -> Vec<usize> {
        let mut rng = seed::rng(seed, &[]);
        let total_leaves = net.node_count() as f64;
        let mut level = Level::leaf(net);
        // Level node each leaf currently belongs to.
        let mut leaf_node: Vec<usize> = (0..net.node_count()).collect();
        loop {
            let mut modules: Vec<usize> = (0..level.len()).collect();
            let moved = self.local_moves(
                &level,
                &mut modules,
                total_leaves,
                &mut rng,
                &leaf_node,
                trace.as_deref_mut(),
            );
            let dense = densify(&modules);
            let k = dense.iter().copied().max().map_or(0, |m| m + 1);
            for node in leaf_node.iter_mut() {
                *node = dense[*node];
            }
            if !moved || k == level.len() {
                break;
            }
            level = level.aggregate(&dense, k);
        }
        leaf_node
    }

    fn local_moves(
        &self,
        level: &Level,
        modules: &mut [usize],
        total_leaves: f64,
        rng: &mut seed::Rng,
        leaf_node: &[usize],
        mut trace: Option<&mut Vec<Vec<usize>>>,
    ) -> bool {
        let n = level.len();
        let mut state = ModuleState::singletons(level, total_leaves);
        let mut free: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut out_to = vec![0.0; n];
        let mut in_from = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any = false;

        for _ in 0..self.max_passes {
            order.shuffle(rng);
            let mut moved = false;
            for &a in &order {
                let from = modules[a];
                touched.clear();
                for &(b, f) in &level.out[a] {
                    let m = modules[b];
                    if !seen[m] {
                        seen[m] = true;
                        touched.push(m);
                    }
                    out_to[m] += f;
                }
                for &(b, f) in &level.inn[a] {
                    let m = modules[b];
                    if !seen[m] {
                        seen[m] = true;
                        touched.push(m);
                    }
                    in_from[m] += f;
                }
                let mut candidates: Vec<usize> =
                    touched.iter().copied().filter(|&m| m != from).collect();
                if state.members[from] > 1 {
                    if let Some(&empty) = free.last() {
                        candidates.push(empty);
                    }
                }
                let best = self.best_move(level, &state, a, from, &candidates, &out_to, &in_from);
                for &m in &touched {
                    out_to[m] = 0.0;
                    in_from[m] = 0.0;
                    seen[m] = false;
                }
                let Some(mv) = best else { continue };

                let to = mv.target;
                if free.last() == Some(&to) {
                    free.pop();
                }
                let old_q = state.q(from) + state.q(to);
                state.flow[from] -= level.flow[a];
                state.tele[from] -= level.tele[a];
                state.size[from] -= level.size[a];
                state.exit[from] = mv.exit_source;
                state.members[from] -= 1;
                state.flow[to] += level.flow[a];
                state.tele[to] += level.tele[a];
                state.size[to] += level.size[a];
                state.exit[to] = mv.exit_target;
                state.members[to] += 1;
                state.total_q += state.q(from) + state.q(to) - old_q;
                if state.members[from] == 0 {
                    free.push(from);
                }
                modules[a] = to;
                moved = true;
                any = true;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(leaf_node.iter().map(|&node| modules[node]).collect());
                }
                debug_assert!(mv.delta < 0.0);
            }
            if !moved {
                break;
            }
        }
        any
    }

    #[allow(clippy::too_many_arguments)]
    fn best_move(
        &self,
        level: &Level,
        state: &ModuleState,
        a: usize,
        from: usize,
        candidates: &[usize],
        out_to: &[f64],
        in_from: &[f64],
    ) -> Option<Move> {
        let (fa, ta, sa, ota) = (
            level.flow[a],
            level.tele[a],
            level.size[a],
            level.out_total[a],
        );
        let q_from = state.q(from);
        let exit_from = state.exit[from] - (ota - out_to[from]) + in_from[from];
        let q_from_new = state.exit_rate(state.tele[from] - ta, state.size[from] - sa, exit_from);
        let p_from = state.flow[from];
        let mut best: Option<Move> = None;
        for &to in candidates {
            let q_to = state.q(to);
            let exit_to = state.exit[to] + (ota - out_to[to]) - in_from[to];
            let q_to_new = state.exit_rate(state.tele[to] + ta, state.size[to] + sa, exit_to);
            let p_to = state.flow[to];
            let total_new = state.total_q - q_from - q_to + q_from_new + q_to_new;
            let delta = plogp(total_new)
                - plogp(state.total_q)
                - 2.0 * (plogp(q_from_new) + plogp(q_to_new) - plogp(q_from) - plogp(q_to))
                + plogp(q_from_new + p_from - fa)
                + plogp(q_to_new + p_to + fa)
                - plogp(q_from + p_from)
                - plogp(q_to + p_to);
            if delta < -self.min_improvement && best.as_ref().is_none_or(|b| delta < b.delta) {
                best = Some(Move {
                    target: to,
                    delta,
                    exit_source: exit_from,
                    exit_target: exit_to,
                });
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::super::testgraphs::*;
    use super::super::{detect_communities, Method};
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    /// All set partitions of `0..n` as label vectors (restricted growth
    /// strings).
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for label in 0..=max + 1 {
                cur.push(label);
                rec(i + 1, n, cur, max.max(label), out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            let mut cur = vec![0];
            rec(1, n, &mut cur, 0, &mut out);
        }
        out
    }

    #[test]
    fn single_edge_is_one_bit() {
        let g = undirected(2, &[(0, 1)]);
        let l = map_equation_codelength(&g, &Partition::single(&g)).unwrap();
        assert!(close(l, 1.0, 1e-12));
    }

    #[test]
    fn one_module_equals_visit_entropy() {
        let g = two_cliques(5);
        let net = FlowNetwork::from_graph(&g, TeleportModel::default()).unwrap();
        let l = map_equation_codelength(&g, &Partition::single(&g)).unwrap();
        assert!(close(l, net.visit_entropy(), 1e-12));

        let (d, _) = SocialGraph::from_edges(
            true,
            Vec::new(),
            [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]
                .map(|(x, y)| (x.to_string(), y.to_string())),
        );
        let dnet = FlowNetwork::from_graph(&d, TeleportModel::default()).unwrap();
        assert!(close(dnet.node_flow.iter().sum::<f64>(), 1.0, 1e-12));
        let l = map_equation_codelength(&d, &Partition::single(&d)).unwrap();
        assert!(close(l, dnet.visit_entropy(), 1e-12));
    }

    #[test]
    fn empty_graph_codelength_errors() {
        let g = SocialGraph::empty(false);
        assert!(map_equation_codelength(&g, &Partition::new(Vec::<Vec<String>>::new())).is_err());
    }

    #[test]
    fn clique_split_is_shorter_than_one_module() {
        let g = two_cliques(5);
        let split = Partition::new([
            (0..5).map(named).collect::<Vec<_>>(),
            (5..10).map(named).collect(),
        ]);
        let one = map_equation_codelength(&g, &Partition::single(&g)).unwrap();
        let two = map_equation_codelength(&g, &split).unwrap();
        assert!(two < one, "{two} !< {one}");
    }

    #[test]
    fn exhaustive_minimum_is_the_clique_split() {
        let g = two_cliques(5);
        let net = FlowNetwork::from_graph(&g, TeleportModel::default()).unwrap();
        let parts = all_partitions(10);
        assert_eq!(parts.len(), 115_975);
        let best = parts
            .iter()
            .min_by(|a, b| net.codelength(a).partial_cmp(&net.codelength(b)).unwrap())
            .unwrap();
        let expected: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        assert_eq!(best, &expected);

        let found = detect_communities(&g, Method::MapEquation, 11).unwrap();
        assert_eq!(found, Partition::from_assignment(&g, &expected));
    }

    #[test]
    fn single_clique_is_one_module() {
        let g = undirected(5, &clique_edges(0..5));
        let p = detect_communities(&g, Method::MapEquation, 2).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn accepted_moves_strictly_shorten() {
        let g = two_cliques(6);
        let net = FlowNetwork::from_graph(&g, TeleportModel::default()).unwrap();
        let opt = MapEquation::default();
        for seed in 0..5 {
            let mut trace = Vec::new();
            opt.trial(&net, seed, Some(&mut trace));
            assert!(!trace.is_empty());
            let mut prev = net.codelength(&(0..net.node_count()).collect::<Vec<_>>());
            for snapshot in &trace {
                let l = net.codelength(snapshot);
                assert!(l < prev, "move did not shorten: {l} >= {prev}");
                prev = l;
            }
        }
    }

    #[test]
    fn directed_detection_is_deterministic() {
        let mut pairs = Vec::new();
        for (a, b) in two_cliques(5).edges() {
            pairs.push((a.to_string(), b.to_string()));
            pairs.push((b.to_string(), a.to_string()));
        }
        let (g, _) = SocialGraph::from_edges(true, Vec::new(), pairs);
        let p1 = detect_communities(&g, Method::MapEquation, 5).unwrap();
        let p2 = detect_communities(&g, Method::MapEquation, 5).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.len(), 2);
    }

    #[test]
    fn result_codelength_not_worse_than_one_module() {
        let g = two_cliques(4);
        let r = MapEquation::default().run(&g, 1).unwrap();
        assert!(r.codelength <= r.one_module_codelength + 1e-12);
    }
}
