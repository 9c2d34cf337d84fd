//! Finite directed multigraphs and their irreducible structure.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// An edge between vertex indices, optionally named (edge-labelled codes refer
/// to edges by name).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub name: Option<String>,
}

/// A finite directed multigraph on named vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

impl FiniteGraph {
    pub fn new() -> FiniteGraph {
        FiniteGraph::default()
    }

    /// Build from vertex names and index pairs.
    pub fn from_edges(vertices: Vec<String>, edges: &[(usize, usize)]) -> FiniteGraph {
        let mut g = FiniteGraph::new();
        for v in vertices {
            g.add_vertex(&v);
        }
        for &(a, b) in edges {
            g.add_edge(a, b, None);
        }
        g
    }

    /// Build from name pairs, creating vertices in order of first appearance.
    pub fn from_named_edges(edges: &[(&str, &str)]) -> FiniteGraph {
        let mut g = FiniteGraph::new();
        for (a, b) in edges {
            let a = g.add_vertex(a);
            let b = g.add_vertex(b);
            g.add_edge(a, b, None);
        }
        g
    }

    /// Add a vertex, or return the index of an existing one with this name.
    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn add_edge(&mut self, from: usize, to: usize, name: Option<String>) -> usize {
        assert!(from < self.vertices.len() && to < self.vertices.len(), "edge endpoint out of range");
        self.edges.push(Edge { from, to, name });
        self.edges.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Display name of an edge: its declared name or `e<index>`.
    pub fn edge_name(&self, e: usize) -> String {
        self.edges[e].name.clone().unwrap_or_else(|| format!("e{e}"))
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        (0..self.edges.len()).find(|&e| self.edge_name(e) == name)
    }

    /// Successor lists with multiplicity.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            out[e.from].push(e.to);
        }
        out
    }

    /// Outgoing edge indices per vertex.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        out
    }

    /// Adjacency matrix with multiplicities.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.vertices.len();
        let mut a = vec![vec![0u64; n]; n];
        for e in &self.edges {
            a[e.from][e.to] += 1;
        }
        a
    }

    /// Subgraph induced on the given vertices (kept in the given order).
    pub fn induced(&self, keep: &[usize]) -> FiniteGraph {
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut g = FiniteGraph::new();
        for &v in keep {
            map[v] = g.add_vertex(&self.vertices[v]);
        }
        for e in &self.edges {
            if map[e.from] != usize::MAX && map[e.to] != usize::MAX {
                g.add_edge(map[e.from], map[e.to], e.name.clone());
            }
        }
        g
    }

    /// Same graph with vertices renamed by `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> FiniteGraph {
        let mut g = FiniteGraph::new();
        for v in &self.vertices {
            let i = g.add_vertex(&f(v));
            assert_eq!(i, g.vertex_count() - 1, "renaming must stay injective");
        }
        for e in &self.edges {
            g.add_edge(e.from, e.to, e.name.clone());
        }
        g
    }

    /// The edge graph: one vertex per edge (named as the edge), and a
    /// transition e -> f whenever e ends where f starts.
    pub fn edge_graph(&self) -> FiniteGraph {
        let mut g = FiniteGraph::new();
        for e in 0..self.edges.len() {
            g.add_vertex(&self.edge_name(e));
        }
        let out = self.out_edges();
        for (i, e) in self.edges.iter().enumerate() {
            for &f in &out[e.to] {
                g.add_edge(i, f, None);
            }
        }
        g
    }

    fn petgraph(&self) -> DiGraph<(), ()> {
        let mut pg = DiGraph::with_capacity(self.vertices.len(), self.edges.len());
        for _ in &self.vertices {
            pg.add_node(());
        }
        for e in &self.edges {
            pg.add_edge((e.from as u32).into(), (e.to as u32).into(), ());
        }
        pg
    }

    /// Strongly connected components that contain a cycle, each as a sorted
    /// list of vertex indices; components are ordered by smallest vertex.
    pub fn scc_with_cycles(&self) -> Vec<Vec<usize>> {
        let mut has_loop = vec![false; self.vertices.len()];
        for e in &self.edges {
            if e.from == e.to {
                has_loop[e.from] = true;
            }
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&self.petgraph())
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .filter(|c| c.len() > 1 || has_loop[c[0]])
            .collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// Is the graph strongly connected with at least one edge?
    pub fn is_irreducible(&self) -> bool {
        let comps = self.scc_with_cycles();
        comps.len() == 1 && comps[0].len() == self.vertices.len()
    }

    /// Strongly connected with every vertex of out-degree one: a single cycle.
    pub fn is_single_cycle(&self) -> bool {
        self.is_irreducible() && self.edges.len() == self.vertices.len()
    }

    /// Breadth-first distances from `start`; unreachable vertices get `None`.
    pub fn bfs_distances(&self, start: usize) -> Vec<Option<usize>> {
        let succ = self.successors();
        let mut dist = vec![None; self.vertices.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &succ[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// A named irreducible piece of a presentation.
#[derive(Clone, Debug)]
pub struct Component {
    pub id: String,
    pub graph: FiniteGraph,
}

/// The irreducible components (strongly connected pieces with a cycle).
pub fn irreducible_components(g: &FiniteGraph) -> Vec<Component> {
    g.scc_with_cycles()
        .into_iter()
        .enumerate()
        .map(|(i, c)| Component { id: format!("c{i}:{}", g.vertex_name(c[0])), graph: g.induced(&c) })
        .collect()
}

/// Period of an irreducible graph: gcd of `dist(u) + 1 - dist(v)` over edges.
pub fn period_of_component(c: &FiniteGraph) -> u64 {
    assert!(c.vertex_count() > 0, "period of an empty graph");
    let dist = c.bfs_distances(0);
    let mut g: u64 = 0;
    for e in c.edges() {
        if let (Some(du), Some(dv)) = (dist[e.from], dist[e.to]) {
            let diff = (du as i64 + 1 - dv as i64).unsigned_abs();
            g = g.gcd(&diff);
        }
    }
    g
}

/// Partition into cyclic classes `D_0..D_{p-1}`; every edge goes from `D_i`
/// to `D_{i+1 mod p}`.
pub fn cyclic_classes(c: &FiniteGraph, p: u64) -> Vec<Vec<usize>> {
    let dist = c.bfs_distances(0);
    let mut classes = vec![Vec::new(); p as usize];
    for (v, d) in dist.iter().enumerate() {
        let d = d.expect("cyclic classes need a strongly connected graph");
        classes[(d as u64 % p) as usize].push(v);
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize, prefix: &str) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("{prefix}{i}"), format!("{prefix}{}", (i + 1) % n))).collect()
    }

    fn graph_of(pairs: &[(String, String)]) -> FiniteGraph {
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        FiniteGraph::from_named_edges(&refs)
    }

    #[test]
    fn components_of_disjoint_cycles() {
        let mut pairs = cycle(3, "a");
        pairs.extend(cycle(3, "b"));
        let g = graph_of(&pairs);
        let comps = irreducible_components(&g);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.graph.is_single_cycle()));
    }

    #[test]
    fn wandering_path_has_no_component() {
        let g = FiniteGraph::from_named_edges(&[("a", "b")]);
        assert!(irreducible_components(&g).is_empty());
    }

    #[test]
    fn golden_mean_is_one_component() {
        let g = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]);
        let comps = irreducible_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].graph, g);
        assert_eq!(period_of_component(&g), 1);
    }

    #[test]
    fn periods_and_classes() {
        let g = FiniteGraph::from_named_edges(&[("a", "a")]);
        assert_eq!(period_of_component(&g), 1);
        let c3 = graph_of(&cycle(3, "v"));
        assert_eq!(period_of_component(&c3), 3);
        let classes = cyclic_classes(&c3, 3);
        assert!(classes.iter().all(|c| c.len() == 1));
        // Bipartite: a,b on one side, c,d on the other.
        let bip = FiniteGraph::from_named_edges(&[("a", "c"), ("c", "b"), ("b", "d"), ("d", "a"), ("a", "d")]);
        assert_eq!(period_of_component(&bip), 2);
        let classes = cyclic_classes(&bip, 2);
        assert_eq!(classes, vec![vec![0, 2], vec![1, 3]]);
        let one = cyclic_classes(&FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]), 1);
        assert_eq!(one, vec![vec![0, 1]]);
    }

    #[test]
    fn edge_graph_of_golden_mean() {
        let g = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]);
        let eg = g.edge_graph();
        assert_eq!(eg.vertex_count(), 3);
        // e0: a->a, e1: a->b, e2: b->a. e0->{e0,e1}, e1->{e2}, e2->{e0,e1}.
        assert_eq!(eg.edge_count(), 5);
    }
}
