//! Social graphs, k-core extraction, community detection and null
//! partitions.

mod mapequation;
mod modularity;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

pub use mapequation::{map_equation_codelength, FlowNetwork, MapEquation, TeleportModel};
pub use modularity::{modularity, Louvain};

/// Who-follows-whom graph over one neighborhood.
///
/// Vertices are kept sorted by name; undirected edges are stored once with
/// the smaller vertex index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    directed: bool,
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl SocialGraph {
    /// Builds a graph from vertex names and named edges. Edge endpoints are
    /// added to the vertex set; self-loops are skipped and counted.
    pub fn from_edges<V, E>(directed: bool, vertices: V, edges: E) -> (Self, usize)
    where
        V: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let edges: Vec<(String, String)> = edges.into_iter().collect();
        let mut names: BTreeSet<String> = vertices.into_iter().collect();
        for (u, v) in &edges {
            names.insert(u.clone());
            names.insert(v.clone());
        }
        let vertices: Vec<String> = names.into_iter().collect();
        let index: HashMap<String, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut graph = SocialGraph {
            directed,
            vertices,
            index,
            edges: BTreeSet::new(),
        };
        let mut self_loops = 0;
        for (u, v) in edges {
            let (a, b) = (graph.index[&u], graph.index[&v]);
            if a == b {
                self_loops += 1;
            } else {
                graph.insert(a, b);
            }
        }
        (graph, self_loops)
    }

    pub fn empty(directed: bool) -> Self {
        Self::from_edges(directed, Vec::new(), Vec::new()).0
    }

    fn insert(&mut self, a: usize, b: usize) {
        let e = if self.directed {
            (a, b)
        } else {
            (a.min(b), a.max(b))
        };
        self.edges.insert(e);
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Edges as index pairs; canonical `(min, max)` order when undirected.
    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.vertices[a].as_str(), self.vertices[b].as_str()))
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        match (self.vertex_index(u), self.vertex_index(v)) {
            (Some(a), Some(b)) => {
                let e = if self.directed {
                    (a, b)
                } else {
                    (a.min(b), a.max(b))
                };
                self.edges.contains(&e)
            }
            _ => false,
        }
    }

    /// Total degree per vertex (in + out for directed graphs).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Neighbors ignoring direction, one entry per incident edge.
    pub fn incident_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Subgraph induced on the vertices with `keep[i] == true`.
    pub fn induced(&self, keep: &[bool]) -> SocialGraph {
        let vertices = self
            .vertices
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v.clone());
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| keep[a] && keep[b])
            .map(|&(a, b)| (self.vertices[a].clone(), self.vertices[b].clone()));
        SocialGraph::from_edges(self.directed, vertices, edges).0
    }
}

/// Directed follow graph plus its mutual (reciprocal-only) undirected graph.
#[derive(Debug, Clone)]
pub struct GraphPair {
    pub directed: SocialGraph,
    pub undirected: SocialGraph,
    pub dropped_self_loops: usize,
}

/// Builds the directed graph and the undirected graph holding `{u, v}` iff
/// both `(u, v)` and `(v, u)` are present. Both share one vertex set.
pub fn build_graphs<I>(pairs: I) -> GraphPair
where
    I: IntoIterator<Item = (String, String)>,
{
    let pairs: Vec<(String, String)> = pairs.into_iter().collect();
    let (directed, dropped_self_loops) = SocialGraph::from_edges(true, Vec::new(), pairs);
    let mutual: Vec<(String, String)> = directed
        .edge_indices()
        .filter(|&(a, b)| a < b && directed.edges.contains(&(b, a)))
        .map(|(a, b)| (directed.vertices[a].clone(), directed.vertices[b].clone()))
        .collect();
    let (undirected, _) = SocialGraph::from_edges(false, directed.vertices.iter().cloned(), mutual);
    GraphPair {
        directed,
        undirected,
        dropped_self_loops,
    }
}

/// Reads a `src<TAB>dst` edge list. Blank lines are skipped.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Record {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(src), Some(dst), None) if !src.is_empty() && !dst.is_empty() => {
                pairs.push((src.to_string(), dst.to_string()));
            }
            _ => {
                return Err(Error::Record {
                    line: idx + 1,
                    message: "expected `src<TAB>dst`".into(),
                })
            }
        }
    }
    Ok(pairs)
}

/// Maximal subgraph whose vertices all have degree at least `k` (in + out
/// for directed graphs), found by repeated peeling.
pub fn k_core(graph: &SocialGraph, k: usize) -> SocialGraph {
    let mut degree = graph.degrees();
    let adj = graph.incident_lists();
    let mut alive = vec![true; graph.vertex_count()];
    let mut stack: Vec<usize> = (0..degree.len()).filter(|&v| degree[v] < k).collect();
    for &v in &stack {
        alive[v] = false;
    }
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if alive[u] {
                degree[u] -= 1;
                if degree[u] < k {
                    alive[u] = false;
                    stack.push(u);
                }
            }
        }
    }
    graph.induced(&alive)
}

/// Disjoint, non-empty communities covering a graph's vertices.
///
/// Communities are ordered by their smallest member so equal partitions
/// compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    communities: Vec<BTreeSet<String>>,
}

impl Partition {
    /// Canonicalizes arbitrary groupings; empty groups are dropped.
    pub fn new<I, C>(groups: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = String>,
    {
        let mut communities: Vec<BTreeSet<String>> = groups
            .into_iter()
            .map(|c| c.into_iter().collect::<BTreeSet<_>>())
            .filter(|c| !c.is_empty())
            .collect();
        communities.sort();
        Partition { communities }
    }

    /// Groups the graph's vertices by the module label at their index.
    pub fn from_assignment(graph: &SocialGraph, modules: &[usize]) -> Self {
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (v, &m) in modules.iter().enumerate() {
            groups.entry(m).or_default().push(graph.vertices[v].clone());
        }
        Partition::new(groups.into_values())
    }

    pub fn single(graph: &SocialGraph) -> Self {
        Partition::new([graph.vertices.clone()])
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn communities(&self) -> &[BTreeSet<String>] {
        &self.communities
    }

    /// Vertex name to community index.
    pub fn membership(&self) -> HashMap<String, usize> {
        self.communities
            .iter()
            .enumerate()
            .flat_map(|(c, members)| members.iter().map(move |m| (m.clone(), c)))
            .collect()
    }

    /// Module index per graph vertex, or an error if the partition does not
    /// cover exactly the graph's vertices.
    pub fn assignment(&self, graph: &SocialGraph) -> Result<Vec<usize>> {
        let mut out = vec![usize::MAX; graph.vertex_count()];
        let mut covered = 0;
        for (c, members) in self.communities.iter().enumerate() {
            for m in members {
                let v = graph
                    .vertex_index(m)
                    .ok_or_else(|| Error::invalid(format!("partition member {m} not in graph")))?;
                if out[v] != usize::MAX {
                    return Err(Error::invalid(format!("vertex {m} in two communities")));
                }
                out[v] = c;
                covered += 1;
            }
        }
        if covered != graph.vertex_count() {
            return Err(Error::invalid("partition does not cover every vertex"));
        }
        Ok(out)
    }

    /// `user_id,community_id` rows, sorted by user.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, usize)> = self.membership().into_iter().collect();
        rows.sort();
        let mut out = String::from("user_id,community_id\n");
        for (u, c) in rows {
            out.push_str(&format!("{u},{c}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let (user, community) = line.rsplit_once(',').ok_or(Error::Record {
                line: idx + 1,
                message: "expected `user_id,community_id`".into(),
            })?;
            let community: usize = community.trim().parse().map_err(|_| Error::Record {
                line: idx + 1,
                message: format!("bad community id {community:?}"),
            })?;
            groups.entry(community).or_default().push(user.to_string());
        }
        Ok(Partition::new(groups.into_values()))
    }
}

/// Community detection objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MapEquation,
    Modularity,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map-equation" | "infomap" => Ok(Method::MapEquation),
            "modularity" | "louvain" => Ok(Method::Modularity),
            other => Err(Error::Config(format!("unknown community method {other:?}"))),
        }
    }
}

/// Detects structural communities. Deterministic for a given
/// `(graph, method, seed)`; vertices without edges end up as singletons.
pub fn detect_communities(graph: &SocialGraph, method: Method, seed: u64) -> Result<Partition> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let modules = match method {
        Method::MapEquation => MapEquation::default().run(graph, seed)?.modules,
        Method::Modularity => Louvain::default().run(graph, seed),
    };
    Ok(Partition::from_assignment(graph, &modules))
}

/// Relabels modules to `0..k` in order of first appearance.
pub(crate) fn densify(modules: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    modules
        .iter()
        .map(|&m| {
            let next = map.len();
            *map.entry(m).or_insert(next)
        })
        .collect()
}

/// Shuffles `items` with a seeded generator and cuts them into consecutive
/// groups of the requested sizes.
pub fn null_partition<T: Clone>(sizes: &[usize], items: &[T], seed: u64) -> Result<Vec<Vec<T>>> {
    let total: usize = sizes.iter().sum();
    if total != items.len() {
        return Err(Error::invalid(format!(
            "group sizes sum to {total} but there are {} items",
            items.len()
        )));
    }
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut seed::rng(seed, &[]));
    let mut rest = shuffled.as_slice();
    Ok(sizes
        .iter()
        .map(|&s| {
            let (head, tail) = rest.split_at(s);
            rest = tail;
            head.to_vec()
        })
        .collect())
}
