//! One-block factor codes and the fiber-product oracles behind them.
//!
//! A code labels the symbols of a finite vertex presentation. Two points with
//! the same image correspond to a bi-infinite path in the label fiber
//! product, so injectivity, finite-to-one-ness and Bowen-type relations all
//! reduce to questions about the pruned fiber product graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::entropy::{EntropyOrdering, ExtendedEntropy};
use crate::error::{invalid, Error, Result};
use crate::graph::FiniteGraph;
use crate::perron::perron_entropy;

/// A one-block code on a finite presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCode {
    /// Vertex presentation whose vertices are the code's symbols.
    domain: FiniteGraph,
    /// Output label per domain vertex.
    labels: Vec<String>,
    /// The graph as given; differs from `domain` in edge mode.
    source: FiniteGraph,
    edge_mode: bool,
}

impl BlockCode {
    /// Labels on vertices, in vertex order.
    pub fn vertex_labeled(g: FiniteGraph, labels: Vec<String>) -> Result<BlockCode> {
        if labels.len() != g.vertex_count() {
            return invalid("every vertex needs exactly one label");
        }
        Ok(BlockCode { domain: g.clone(), labels, source: g, edge_mode: false })
    }

    /// Labels on edges, in edge order; the domain becomes the edge graph.
    pub fn edge_labeled(g: FiniteGraph, labels: Vec<String>) -> Result<BlockCode> {
        if labels.len() != g.edge_count() {
            return invalid("every edge needs exactly one label");
        }
        Ok(BlockCode { domain: g.edge_graph(), labels, source: g, edge_mode: true })
    }

    /// Labels keyed by symbol name: vertex names give a vertex code, edge
    /// names an edge code.
    pub fn from_label_map(g: FiniteGraph, map: &BTreeMap<String, String>) -> Result<BlockCode> {
        let all_vertices = map.keys().all(|s| g.vertex_index(s).is_some());
        if all_vertices {
            let mut labels = Vec::with_capacity(g.vertex_count());
            for v in g.vertices() {
                match map.get(v) {
                    Some(l) => labels.push(l.clone()),
                    None => return invalid(format!("vertex {v} has no label")),
                }
            }
            return BlockCode::vertex_labeled(g, labels);
        }
        let names: Vec<String> = (0..g.edge_count()).map(|e| g.edge_name(e)).collect();
        let known: HashSet<&String> = names.iter().collect();
        if let Some(bad) = map.keys().find(|s| !known.contains(s)) {
            return invalid(format!("label for unknown symbol {bad}"));
        }
        let mut labels = Vec::with_capacity(names.len());
        for n in &names {
            match map.get(n) {
                Some(l) => labels.push(l.clone()),
                None => return invalid(format!("edge {n} has no label")),
            }
        }
        BlockCode::edge_labeled(g, labels)
    }

    /// The identity code on a graph's vertices.
    pub fn identity(g: FiniteGraph) -> BlockCode {
        let labels = g.vertices().to_vec();
        BlockCode::vertex_labeled(g, labels).unwrap()
    }

    pub fn domain(&self) -> &FiniteGraph {
        &self.domain
    }

    pub fn source(&self) -> &FiniteGraph {
        &self.source
    }

    pub fn is_edge_mode(&self) -> bool {
        self.edge_mode
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn symbol(&self, v: usize) -> &str {
        self.domain.vertex_name(v)
    }

    pub fn symbol_index(&self, s: &str) -> Option<usize> {
        self.domain.vertex_index(s)
    }

    /// Distinct labels in sorted order.
    pub fn alphabet(&self) -> Vec<String> {
        let s: BTreeSet<&String> = self.labels.iter().collect();
        s.into_iter().cloned().collect()
    }

    /// The whole domain as a subsystem.
    pub fn whole(&self) -> SubSystem {
        SubSystem { graph: self.domain.clone(), to_domain: (0..self.domain.vertex_count()).collect() }
    }
}

/// A finite graph mapped vertex-by-vertex into a code's domain, every edge
/// going to a domain edge. Its points are the images of its paths.
#[derive(Clone, Debug)]
pub struct SubSystem {
    pub graph: FiniteGraph,
    pub to_domain: Vec<usize>,
}

impl SubSystem {
    /// Interpret a graph whose vertex names are domain symbols, optionally
    /// suffixed with `@tag` to allow several copies of one symbol.
    pub fn from_graph(code: &BlockCode, g: FiniteGraph) -> Result<SubSystem> {
        let mut to_domain = Vec::with_capacity(g.vertex_count());
        for v in g.vertices() {
            let sym = v.split('@').next().unwrap();
            match code.symbol_index(sym) {
                Some(i) => to_domain.push(i),
                None => return invalid(format!("subsystem vertex {v} is not a domain symbol")),
            }
        }
        let sub = SubSystem { graph: g, to_domain };
        sub.check_within(code)?;
        Ok(sub)
    }

    pub fn check_within(&self, code: &BlockCode) -> Result<()> {
        let dom: HashSet<(usize, usize)> = code.domain.edges().iter().map(|e| (e.from, e.to)).collect();
        for e in self.graph.edges() {
            let (a, b) = (self.to_domain[e.from], self.to_domain[e.to]);
            if !dom.contains(&(a, b)) {
                return invalid(format!(
                    "subsystem edge {} -> {} is not a domain transition",
                    self.graph.vertex_name(e.from),
                    self.graph.vertex_name(e.to)
                ));
            }
        }
        Ok(())
    }
}

/// A reflexive symmetric relation on symbols; only off-diagonal pairs are
/// stored, each once with the smaller name first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolRelation {
    pairs: BTreeSet<(String, String)>,
}

impl SymbolRelation {
    /// The equality relation.
    pub fn equality() -> SymbolRelation {
        SymbolRelation::default()
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> SymbolRelation {
        let mut r = SymbolRelation::default();
        for (a, b) in pairs {
            r.insert(a.as_ref(), b.as_ref());
        }
        r
    }

    pub fn insert(&mut self, a: &str, b: &str) {
        if a == b {
            return;
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.pairs.insert((x.to_string(), y.to_string()));
    }

    pub fn related(&self, a: &str, b: &str) -> bool {
        if a == b {
            return true;
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.pairs.contains(&(x.to_string(), y.to_string()))
    }

    /// Off-diagonal pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The pruned label fiber product of a subsystem: pairs of vertices with
/// equal labels lying on some bi-infinite path of pairs.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    /// Surviving pairs, as subsystem vertex indices.
    pub pairs: Vec<(usize, usize)>,
    /// Graph on the surviving pairs, named `a,b` by subsystem vertex name.
    pub graph: FiniteGraph,
    pub pruned: bool,
}

struct PairSpace {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    class: Vec<usize>,
    pos: Vec<usize>,
    members: Vec<Vec<usize>>,
    offset: Vec<usize>,
}

impl PairSpace {
    fn new(g: &FiniteGraph, labels: &[&str]) -> PairSpace {
        let n = g.vertex_count();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for e in g.edges() {
            succ[e.from].push(e.to);
            pred[e.to].push(e.from);
        }
        for l in succ.iter_mut().chain(pred.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut class = vec![0; n];
        let mut pos = vec![0; n];
        for v in 0..n {
            let c = *ids.entry(labels[v]).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            class[v] = c;
            pos[v] = members[c].len();
            members[c].push(v);
        }
        let mut offset = Vec::with_capacity(members.len() + 1);
        let mut acc = 0;
        for m in &members {
            offset.push(acc);
            acc += m.len() * m.len();
        }
        offset.push(acc);
        PairSpace { succ, pred, class, pos, members, offset }
    }

    fn size(&self) -> usize {
        *self.offset.last().unwrap()
    }

    fn id(&self, u: usize, v: usize) -> Option<usize> {
        let c = self.class[u];
        if c != self.class[v] {
            return None;
        }
        Some(self.offset[c] + self.pos[u] * self.members[c].len() + self.pos[v])
    }

    fn decode(&self, id: usize) -> (usize, usize) {
        let c = self.offset.partition_point(|&o| o <= id) - 1;
        let k = self.members[c].len();
        let r = id - self.offset[c];
        (self.members[c][r / k], self.members[c][r % k])
    }

    fn for_each_succ(&self, u: usize, v: usize, mut f: impl FnMut(usize)) {
        for &a in &self.succ[u] {
            for &b in &self.succ[v] {
                if let Some(id) = self.id(a, b) {
                    f(id);
                }
            }
        }
    }

    fn for_each_pred(&self, u: usize, v: usize, mut f: impl FnMut(usize)) {
        for &a in &self.pred[u] {
            for &b in &self.pred[v] {
                if let Some(id) = self.id(a, b) {
                    f(id);
                }
            }
        }
    }

    /// Pairs surviving repeated removal of pairs without a successor or predecessor.
    fn prune(&self) -> Vec<bool> {
        let total = self.size();
        let mut alive = vec![true; total];
        let mut outd = vec![0u32; total];
        let mut ind = vec![0u32; total];
        for id in 0..total {
            let (u, v) = self.decode(id);
            self.for_each_succ(u, v, |s| {
                outd[id] += 1;
                ind[s] += 1;
            });
        }
        let mut queue: VecDeque<usize> = (0..total).filter(|&i| outd[i] == 0 || ind[i] == 0).collect();
        for &i in &queue {
            alive[i] = false;
        }
        while let Some(id) = queue.pop_front() {
            let (u, v) = self.decode(id);
            self.for_each_pred(u, v, |p| {
                if alive[p] {
                    outd[p] -= 1;
                    if outd[p] == 0 {
                        alive[p] = false;
                        queue.push_back(p);
                    }
                }
            });
            self.for_each_succ(u, v, |s| {
                if alive[s] {
                    ind[s] -= 1;
                    if ind[s] == 0 {
                        alive[s] = false;
                        queue.push_back(s);
                    }
                }
            });
        }
        alive
    }
}

fn sub_labels<'a>(code: &'a BlockCode, sub: &SubSystem) -> Vec<&'a str> {
    sub.to_domain.iter().map(|&d| code.label(d)).collect()
}

/// Pruned fiber product of the code restricted to a subsystem.
pub fn fiber_product(code: &BlockCode, sub: &SubSystem) -> FiberProduct {
    let labels = sub_labels(code, sub);
    let space = PairSpace::new(&sub.graph, &labels);
    let alive = space.prune();
    let ids: Vec<usize> = (0..alive.len()).filter(|&i| alive[i]).collect();
    let pairs: Vec<(usize, usize)> = ids.iter().map(|&i| space.decode(i)).collect();
    let mut graph = FiniteGraph::new();
    let mut slot = HashMap::new();
    for (k, &(u, v)) in pairs.iter().enumerate() {
        graph.add_vertex(&format!("{},{}", sub.graph.vertex_name(u), sub.graph.vertex_name(v)));
        slot.insert(ids[k], k);
    }
    for (k, &(u, v)) in pairs.iter().enumerate() {
        space.for_each_succ(u, v, |s| {
            if let Some(&t) = slot.get(&s) {
                graph.add_edge(k, t, None);
            }
        });
    }
    FiberProduct { pairs, graph, pruned: true }
}

/// Two points given as `past^inf middle future^inf` in a pair graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointPair {
    pub past: Vec<(usize, usize)>,
    pub middle: Vec<(usize, usize)>,
    pub future: Vec<(usize, usize)>,
}

impl PointPair {
    pub fn is_periodic(&self) -> bool {
        self.middle.is_empty() && self.past == self.future
    }

    /// The two points as symbol strings and their common label word, using
    /// the subsystem's domain symbols.
    pub fn render(&self, code: &BlockCode, sub: &SubSystem) -> (String, String, String) {
        let sym = |v: usize| code.symbol(sub.to_domain[v]).to_string();
        let lab = |v: usize| code.label(sub.to_domain[v]).to_string();
        let part = |seq: &[(usize, usize)], f: &dyn Fn(usize) -> String, left: bool| -> String {
            seq.iter().map(|&(u, v)| f(if left { u } else { v })).collect::<Vec<_>>().join(" ")
        };
        let point = |left: bool| {
            if self.is_periodic() {
                format!("({})^inf", part(&self.future, &sym, left))
            } else {
                format!(
                    "({})^-inf {} ({})^inf",
                    part(&self.past, &sym, left),
                    part(&self.middle, &sym, left),
                    part(&self.future, &sym, left)
                )
            }
        };
        let labels = if self.is_periodic() {
            format!("({})^inf", part(&self.future, &lab, true))
        } else {
            format!(
                "({})^-inf {} ({})^inf",
                part(&self.past, &lab, true),
                part(&self.middle, &lab, true),
                part(&self.future, &lab, true)
            )
        };
        (point(true), point(false), labels)
    }
}

/// A bi-infinite path through `start` in the fiber product, periodic when
/// possible. `start` must be a vertex of `fp.graph`.
fn point_pair_through(fp: &FiberProduct, start: usize) -> PointPair {
    let g = &fp.graph;
    let succ = g.successors();
    let mut pred = vec![Vec::new(); g.vertex_count()];
    for e in g.edges() {
        pred[e.to].push(e.from);
    }
    // A cycle through start, if any: BFS back to start.
    if let Some(cycle) = cycle_through(&succ, start) {
        let c: Vec<(usize, usize)> = cycle.iter().map(|&k| fp.pairs[k]).collect();
        return PointPair { past: c.clone(), middle: Vec::new(), future: c };
    }
    let walk = |adj: &Vec<Vec<usize>>| -> (Vec<usize>, Vec<usize>) {
        // Follow first neighbours until a repeat: returns (lead-in, cycle).
        let mut seen = HashMap::new();
        let mut path = vec![start];
        seen.insert(start, 0);
        let mut cur = start;
        loop {
            let next = adj[cur][0];
            if let Some(&i) = seen.get(&next) {
                return (path[1..i].to_vec(), path[i..].to_vec());
            }
            seen.insert(next, path.len());
            path.push(next);
            cur = next;
        }
    };
    let (fwd_lead, fwd_cycle) = walk(&succ);
    let (bwd_lead, bwd_cycle) = walk(&pred);
    let pair = |k: &usize| fp.pairs[*k];
    let mut past: Vec<(usize, usize)> = bwd_cycle.iter().rev().map(pair).collect();
    // The backward cycle was walked in reverse; rotate so it ends where the
    // lead-in begins.
    past.rotate_right(1);
    let mut middle: Vec<(usize, usize)> = bwd_lead.iter().rev().map(pair).collect();
    middle.push(fp.pairs[start]);
    middle.extend(fwd_lead.iter().map(pair));
    let future = fwd_cycle.iter().map(pair).collect();
    PointPair { past, middle, future }
}

fn cycle_through(succ: &[Vec<usize>], start: usize) -> Option<Vec<usize>> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if v == start {
                let mut path = vec![u];
                let mut cur = u;
                while cur != start {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(v) {
                e.insert(u);
                queue.push_back(v);
            }
        }
    }
    None
}

/// Verdict of the injectivity oracle.
#[derive(Clone, Debug)]
pub struct InjectivityVerdict {
    pub injective: bool,
    pub witness: Option<PointPair>,
}

/// Is the code injective on the points of the subsystem?
///
/// Two distinct points with the same image exist exactly when the pruned
/// fiber product has a pair whose domain symbols differ.
pub fn check_injective(code: &BlockCode, sub: &SubSystem) -> InjectivityVerdict {
    let fp = fiber_product(code, sub);
    let bad: Vec<usize> =
        (0..fp.pairs.len()).filter(|&k| sub.to_domain[fp.pairs[k].0] != sub.to_domain[fp.pairs[k].1]).collect();
    if bad.is_empty() {
        return InjectivityVerdict { injective: true, witness: None };
    }
    // Prefer a pair on a cycle so the witness is a pair of periodic points.
    let succ = fp.graph.successors();
    let start = bad.iter().copied().find(|&k| cycle_through(&succ, k).is_some()).unwrap_or(bad[0]);
    InjectivityVerdict { injective: false, witness: Some(point_pair_through(&fp, start)) }
}

/// Is the code finite-to-one on its (irreducible) domain? Decided by the
/// absence of a diamond: two distinct paths with equal labels and common
/// endpoints.
pub fn check_finite_to_one(code: &BlockCode) -> (bool, Option<Vec<(usize, usize)>>) {
    let sub = code.whole();
    let labels = sub_labels(code, &sub);
    let space = PairSpace::new(&sub.graph, &labels);
    let n = sub.graph.vertex_count();
    // BFS over off-diagonal pairs entered from the diagonal.
    let mut parent: HashMap<usize, Option<usize>> = HashMap::new();
    let mut queue = VecDeque::new();
    for v in 0..n {
        let d = space.id(v, v).unwrap();
        space.for_each_succ(v, v, |s| {
            let (a, b) = space.decode(s);
            if a != b && !parent.contains_key(&s) {
                parent.insert(s, Some(d));
                queue.push_back(s);
            }
        });
    }
    while let Some(id) = queue.pop_front() {
        let (u, v) = space.decode(id);
        let mut found = None;
        space.for_each_succ(u, v, |s| {
            let (a, b) = space.decode(s);
            if a == b {
                if found.is_none() {
                    found = Some(s);
                }
            } else if !parent.contains_key(&s) {
                parent.insert(s, Some(id));
                queue.push_back(s);
            }
        });
        if let Some(end) = found {
            let mut path = vec![space.decode(end), space.decode(id)];
            let mut cur = parent[&id];
            while let Some(c) = cur {
                path.push(space.decode(c));
                cur = parent.get(&c).copied().flatten();
            }
            path.reverse();
            return (false, Some(path));
        }
    }
    (true, None)
}

/// Image words of length `1..=n`, each as a list of labels.
pub fn image_words(code: &BlockCode, n: usize) -> BTreeSet<Vec<String>> {
    let dfa = SubsetAutomaton::build(code, Some(n));
    let mut out = BTreeSet::new();
    let mut frontier: Vec<(usize, Vec<String>)> = vec![(0, Vec::new())];
    for _ in 0..n {
        let mut next = Vec::new();
        for (s, w) in frontier {
            for (l, t) in &dfa.trans[s] {
                let mut w2 = w.clone();
                w2.push(l.clone());
                out.insert(w2.clone());
                next.push((*t, w2));
            }
        }
        frontier = next;
    }
    out
}

/// Number of distinct image words of each length `1..=n`.
pub fn image_word_counts(code: &BlockCode, n: usize) -> Vec<BigUint> {
    let dfa = SubsetAutomaton::build(code, Some(n));
    let mut cur = vec![BigUint::zero(); dfa.trans.len()];
    cur[0] = BigUint::one();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); dfa.trans.len()];
        for (s, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (_, t) in &dfa.trans[s] {
                next[*t] += c;
            }
        }
        out.push(next.iter().sum());
        cur = next;
    }
    out
}

/// Number of paths (words of the vertex shift) of each length `1..=n`.
pub fn path_counts(g: &FiniteGraph, n: usize) -> Vec<BigUint> {
    let succ = {
        let mut s = g.successors();
        for l in s.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        s
    };
    let mut cur = vec![BigUint::one(); g.vertex_count()];
    let mut out = Vec::with_capacity(n);
    for len in 0..n {
        if len > 0 {
            let mut next = vec![BigUint::zero(); g.vertex_count()];
            for (u, c) in cur.iter().enumerate() {
                for &v in &succ[u] {
                    next[v] += c;
                }
            }
            cur = next;
        }
        out.push(cur.iter().sum());
    }
    out
}

/// Determinized image automaton. State 0 is the start state (before any
/// symbol); every other state is the set of domain vertices that can end a
/// path with the word read so far.
pub struct SubsetAutomaton {
    pub states: Vec<Vec<usize>>,
    pub trans: Vec<Vec<(String, usize)>>,
}

impl SubsetAutomaton {
    /// Build reachable states (up to `depth` steps when given).
    pub fn build(code: &BlockCode, depth: Option<usize>) -> SubsetAutomaton {
        let g = code.domain();
        let mut succ = g.successors();
        for l in succ.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        let mut states: Vec<Vec<usize>> = vec![Vec::new()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut trans: Vec<Vec<(String, usize)>> = vec![Vec::new()];
        let mut level: Vec<usize> = vec![0];
        let mut d = 0;
        while !level.is_empty() && depth.is_none_or(|m| d < m) {
            let mut next_level = Vec::new();
            for s in level {
                let mut by_label: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
                if s == 0 {
                    for v in 0..g.vertex_count() {
                        by_label.entry(code.label(v)).or_default().insert(v);
                    }
                } else {
                    for &u in &states[s] {
                        for &v in &succ[u] {
                            by_label.entry(code.label(v)).or_default().insert(v);
                        }
                    }
                }
                for (l, set) in by_label {
                    let key: Vec<usize> = set.into_iter().collect();
                    let t = match index.get(&key) {
                        Some(&t) => t,
                        None => {
                            let t = states.len();
                            states.push(key.clone());
                            trans.push(Vec::new());
                            index.insert(key, t);
                            next_level.push(t);
                            t
                        }
                    };
                    trans[s].push((l.to_string(), t));
                }
            }
            level = next_level;
            d += 1;
        }
        SubsetAutomaton { states, trans }
    }
}

/// Entropy of the image (sofic) shift: the largest entropy among strongly
/// connected pieces of the determinized image automaton.
pub fn image_entropy(code: &BlockCode, tol: f64) -> Result<ExtendedEntropy> {
    let dfa = SubsetAutomaton::build(code, None);
    let mut g = FiniteGraph::new();
    for i in 0..dfa.states.len() {
        g.add_vertex(&format!("s{i}"));
    }
    for (s, ts) in dfa.trans.iter().enumerate() {
        for (_, t) in ts {
            g.add_edge(s, *t, None);
        }
    }
    let mut best = ExtendedEntropy::Zero;
    for c in crate::graph::irreducible_components(&g) {
        let h = perron_entropy(&c.graph);
        match h.compare(&best, tol) {
            EntropyOrdering::Greater => best = h,
            EntropyOrdering::Inconclusive => {
                return Err(Error::Inconclusive { tol, detail: "image entropy components".into() })
            }
            _ => {}
        }
    }
    Ok(best)
}

/// Why a relation fails to be of Bowen type.
#[derive(Clone, Debug)]
pub enum BowenFailure {
    /// Related symbols with different labels (second condition).
    UnequalLabels { a: String, b: String, label_a: String, label_b: String },
    /// Points with equal images passing through unrelated symbols (first condition).
    UnrelatedPair { a: String, b: String, witness: PointPair },
}

#[derive(Clone, Debug)]
pub struct BowenVerdict {
    pub bowen: bool,
    pub failure: Option<BowenFailure>,
}

/// The relation of pairs that occur in the pruned fiber product: the
/// smallest relation satisfying the first condition.
pub fn minimal_relation(code: &BlockCode) -> SymbolRelation {
    let sub = code.whole();
    let fp = fiber_product(code, &sub);
    let mut r = SymbolRelation::equality();
    for &(u, v) in &fp.pairs {
        r.insert(code.symbol(u), code.symbol(v));
    }
    r
}

/// Check both Bowen conditions on the whole domain.
pub fn verify_bowen_relation(code: &BlockCode, rel: &SymbolRelation) -> Result<BowenVerdict> {
    for (a, b) in rel.pairs() {
        let (Some(ia), Some(ib)) = (code.symbol_index(a), code.symbol_index(b)) else {
            return invalid(format!("relation mentions unknown symbol in {a} ~ {b}"));
        };
        if code.label(ia) != code.label(ib) {
            return Ok(BowenVerdict {
                bowen: false,
                failure: Some(BowenFailure::UnequalLabels {
                    a: a.to_string(),
                    b: b.to_string(),
                    label_a: code.label(ia).to_string(),
                    label_b: code.label(ib).to_string(),
                }),
            });
        }
    }
    let sub = code.whole();
    let fp = fiber_product(code, &sub);
    for (k, &(u, v)) in fp.pairs.iter().enumerate() {
        if !rel.related(code.symbol(u), code.symbol(v)) {
            return Ok(BowenVerdict {
                bowen: false,
                failure: Some(BowenFailure::UnrelatedPair {
                    a: code.symbol(u).to_string(),
                    b: code.symbol(v).to_string(),
                    witness: point_pair_through(&fp, k),
                }),
            });
        }
    }
    Ok(BowenVerdict { bowen: true, failure: None })
}

/// A graph whose vertices are tuples of base symbols.
#[derive(Clone, Debug)]
pub struct TupleGraph {
    pub graph: FiniteGraph,
    pub tuples: Vec<Vec<usize>>,
}

fn tuple_name(base: &FiniteGraph, t: &[usize]) -> String {
    t.iter().map(|&v| base.vertex_name(v)).collect::<Vec<_>>().join("|")
}

/// The `m`-fold fibered product: tuples of mutually related symbols with
/// componentwise transitions.
pub fn build_fibered_product_fm(base: &FiniteGraph, rel: &SymbolRelation, m: usize) -> Result<TupleGraph> {
    if m == 0 {
        return invalid("fibered product needs m >= 1");
    }
    let n = base.vertex_count();
    let mut nbr: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in rel.pairs() {
        if let (Some(i), Some(j)) = (base.vertex_index(a), base.vertex_index(b)) {
            nbr[i].push(j);
            nbr[j].push(i);
        }
    }
    for (v, l) in nbr.iter_mut().enumerate() {
        l.push(v);
        l.sort_unstable();
        l.dedup();
    }
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    for first in 0..n {
        let mut stack: Vec<Vec<usize>> = vec![vec![first]];
        while let Some(t) = stack.pop() {
            if t.len() == m {
                tuples.push(t);
                continue;
            }
            // Candidates related to every entry so far.
            for &c in nbr[t[0]].iter().rev() {
                if t.iter().all(|&x| nbr[x].binary_search(&c).is_ok()) {
                    let mut t2 = t.clone();
                    t2.push(c);
                    stack.push(t2);
                }
            }
        }
    }
    tuples.sort();
    let index: HashMap<Vec<usize>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut succ = base.successors();
    for l in succ.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut graph = FiniteGraph::new();
    for t in &tuples {
        graph.add_vertex(&tuple_name(base, t));
    }
    for (i, t) in tuples.iter().enumerate() {
        let mut targets = Vec::new();
        successor_tuples(&succ, t, &mut Vec::new(), &mut targets);
        for s in targets {
            if let Some(&j) = index.get(&s) {
                graph.add_edge(i, j, None);
            }
        }
    }
    Ok(TupleGraph { graph, tuples })
}

fn successor_tuples(succ: &[Vec<usize>], t: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == t.len() {
        out.push(prefix.clone());
        return;
    }
    for &s in &succ[t[prefix.len()]] {
        prefix.push(s);
        successor_tuples(succ, t, prefix, out);
        prefix.pop();
    }
}

/// Restrict to tuples of pairwise distinct symbols, keeping a transition
/// `a -> b` only when the base has `a_i -> b_j` exactly for `i = j`.
pub fn extract_tilde_xm(fm: &TupleGraph, base: &FiniteGraph) -> TupleGraph {
    let edges: HashSet<(usize, usize)> = base.edges().iter().map(|e| (e.from, e.to)).collect();
    let keep: Vec<usize> = (0..fm.tuples.len())
        .filter(|&i| {
            let t = &fm.tuples[i];
            let s: HashSet<&usize> = t.iter().collect();
            s.len() == t.len()
        })
        .collect();
    let mut slot = vec![usize::MAX; fm.tuples.len()];
    let mut graph = FiniteGraph::new();
    let mut tuples = Vec::new();
    for &i in &keep {
        slot[i] = graph.add_vertex(fm.graph.vertex_name(i));
        tuples.push(fm.tuples[i].clone());
    }
    let mut seen = HashSet::new();
    for e in fm.graph.edges() {
        let (a, b) = (slot[e.from], slot[e.to]);
        if a == usize::MAX || b == usize::MAX || !seen.insert((a, b)) {
            continue;
        }
        let (ta, tb) = (&fm.tuples[e.from], &fm.tuples[e.to]);
        let exact = (0..ta.len())
            .all(|i| (0..tb.len()).all(|j| edges.contains(&(ta[i], tb[j])) == (i == j)));
        if exact {
            graph.add_edge(a, b, None);
        }
    }
    TupleGraph { graph, tuples }
}

/// Checks on the order-forgetting quotient.
#[derive(Clone, Debug)]
pub struct ResolvingReport {
    pub right_resolving: bool,
    pub left_resolving: bool,
    /// Every quotient symbol has exactly `m!` preimage tuples.
    pub preimages_ok: bool,
    pub m: usize,
    /// `(length, tuple words, quotient words)` for each checked length.
    pub word_counts: Vec<(usize, BigUint, BigUint)>,
    /// Tuple words equal `m!` times quotient words at every checked length.
    pub counts_ok: bool,
    pub problems: Vec<String>,
}

impl ResolvingReport {
    pub fn passed(&self) -> bool {
        self.right_resolving && self.left_resolving && self.preimages_ok && self.counts_ok
    }
}

/// Quotient of a distinct-tuple graph by forgetting the order of entries.
pub fn quotient_psi(xm: &TupleGraph, base: &FiniteGraph, max_len: usize) -> (FiniteGraph, ResolvingReport) {
    let m = xm.tuples.first().map_or(1, |t| t.len());
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut set_index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut psi = Vec::with_capacity(xm.tuples.len());
    let mut quotient = FiniteGraph::new();
    for t in &xm.tuples {
        let mut s = t.clone();
        s.sort_unstable();
        let id = *set_index.entry(s.clone()).or_insert_with(|| {
            sets.push(s.clone());
            let name = format!("{{{}}}", s.iter().map(|&v| base.vertex_name(v)).collect::<Vec<_>>().join(","));
            quotient.add_vertex(&name);
            sets.len() - 1
        });
        psi.push(id);
    }
    let mut qedges = BTreeSet::new();
    for e in xm.graph.edges() {
        qedges.insert((psi[e.from], psi[e.to]));
    }
    for &(a, b) in &qedges {
        quotient.add_edge(a, b, None);
    }
    let mut problems = Vec::new();
    let mut right = true;
    let mut left = true;
    let mut out_by: HashMap<(usize, usize), usize> = HashMap::new();
    let mut in_by: HashMap<(usize, usize), usize> = HashMap::new();
    let mut seen = HashSet::new();
    for e in xm.graph.edges() {
        if !seen.insert((e.from, e.to)) {
            continue;
        }
        *out_by.entry((e.from, psi[e.to])).or_default() += 1;
        *in_by.entry((e.to, psi[e.from])).or_default() += 1;
    }
    for (&(a, q), &c) in &out_by {
        if c > 1 {
            right = false;
            problems.push(format!("{} has {c} successors over {}", xm.graph.vertex_name(a), quotient.vertex_name(q)));
        }
    }
    for (&(b, q), &c) in &in_by {
        if c > 1 {
            left = false;
            problems.push(format!("{} has {c} predecessors over {}", xm.graph.vertex_name(b), quotient.vertex_name(q)));
        }
    }
    let fact: usize = (1..=m).product();
    let mut pre = vec![0usize; sets.len()];
    for &q in &psi {
        pre[q] += 1;
    }
    let preimages_ok = pre.iter().all(|&c| c == fact);
    for (q, &c) in pre.iter().enumerate() {
        if c != fact {
            problems.push(format!("{} has {c} preimages, expected {fact}", quotient.vertex_name(q)));
        }
    }
    let tw = path_counts(&xm.graph, max_len);
    let qw = path_counts(&quotient, max_len);
    let f = BigUint::from(fact);
    let mut counts_ok = true;
    let mut word_counts = Vec::new();
    for l in 0..max_len {
        if tw[l] != &qw[l] * &f {
            counts_ok = false;
        }
        word_counts.push((l + 1, tw[l].clone(), qw[l].clone()));
    }
    let report = ResolvingReport {
        right_resolving: right,
        left_resolving: left,
        preimages_ok,
        m,
        word_counts,
        counts_ok,
        problems,
    };
    (quotient, report)
}

impl fmt::Display for BowenFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BowenFailure::UnequalLabels { a, b, label_a, label_b } => {
                write!(f, "related symbols {a} ~ {b} have labels {label_a} != {label_b}")
            }
            BowenFailure::UnrelatedPair { a, b, .. } => {
                write!(f, "points with equal images pass through unrelated symbols {a}, {b}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_shift(n: usize) -> FiniteGraph {
        let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                edges.push((i, j));
            }
        }
        FiniteGraph::from_edges(names, &edges)
    }

    fn golden() -> FiniteGraph {
        FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")])
    }

    fn even_code() -> BlockCode {
        BlockCode::edge_labeled(golden(), vec!["1".into(), "0".into(), "0".into()]).unwrap()
    }

    #[test]
    fn identity_code_words() {
        let code = BlockCode::identity(golden());
        let words = image_words(&code, 3);
        // Golden-mean words of lengths 1..3: 2 + 3 + 5.
        assert_eq!(words.len(), 10);
        assert!(!words.contains(&vec!["b".to_string(), "b".to_string()]));
    }

    #[test]
    fn constant_code_words() {
        let code = BlockCode::vertex_labeled(golden(), vec!["x".into(), "x".into()]).unwrap();
        let words = image_words(&code, 3);
        assert_eq!(words.len(), 3);
    }

    #[test]
    fn even_shift_words() {
        let words = image_words(&even_code(), 4);
        for w in &words {
            let s: String = w.concat();
            // Between two 1s there is an even block of 0s.
            let inner: Vec<&str> = s.split('1').collect();
            if inner.len() > 2 {
                for block in &inner[1..inner.len() - 1] {
                    assert_eq!(block.len() % 2, 0, "{s}");
                }
            }
        }
        assert!(words.contains(&vec!["1".into(), "0".into(), "0".into(), "1".into()]));
        assert!(!words.contains(&vec!["1".into(), "0".into(), "1".into()]));
    }

    #[test]
    fn injectivity() {
        let code = BlockCode::identity(full_shift(2));
        assert!(check_injective(&code, &code.whole()).injective);
        let constant = BlockCode::vertex_labeled(full_shift(2), vec!["x".into(), "x".into()]).unwrap();
        let v = check_injective(&constant, &constant.whole());
        assert!(!v.injective);
        let w = v.witness.unwrap();
        assert!(w.is_periodic());
        let (x, y, _) = w.render(&constant, &constant.whole());
        assert_ne!(x, y);
    }

    #[test]
    fn finite_to_one() {
        assert!(check_finite_to_one(&BlockCode::identity(full_shift(2))).0);
        let constant = BlockCode::vertex_labeled(full_shift(2), vec!["x".into(), "x".into()]).unwrap();
        let (ok, diamond) = check_finite_to_one(&constant);
        assert!(!ok);
        assert_eq!(diamond.unwrap().len(), 3);
        assert!(check_finite_to_one(&even_code()).0);
    }

    #[test]
    fn bowen_relations() {
        let code = BlockCode::identity(full_shift(2));
        assert!(verify_bowen_relation(&code, &SymbolRelation::equality()).unwrap().bowen);
        let bad = SymbolRelation::from_pairs(&[("a", "b")]);
        let v = verify_bowen_relation(&code, &bad).unwrap();
        assert!(matches!(v.failure, Some(BowenFailure::UnequalLabels { .. })));
        let even = even_code();
        let minimal = minimal_relation(&even);
        assert_eq!(minimal.len(), 1);
        assert!(minimal.related("e1", "e2"));
        assert!(verify_bowen_relation(&even, &minimal).unwrap().bowen);
        let v = verify_bowen_relation(&even, &SymbolRelation::equality()).unwrap();
        assert!(matches!(v.failure, Some(BowenFailure::UnrelatedPair { .. })));
    }

    #[test]
    fn fibered_products() {
        let g = golden();
        let f1 = build_fibered_product_fm(&g, &SymbolRelation::equality(), 1).unwrap();
        assert_eq!(f1.graph, g);
        let f2 = build_fibered_product_fm(&g, &SymbolRelation::equality(), 2).unwrap();
        assert!(f2.tuples.iter().all(|t| t[0] == t[1]));
        assert!(extract_tilde_xm(&f2, &g).tuples.is_empty());
        assert!(build_fibered_product_fm(&g, &SymbolRelation::equality(), 0).is_err());
        let eg = even_code();
        let f2 = build_fibered_product_fm(eg.domain(), &minimal_relation(&eg), 2).unwrap();
        assert!(f2.tuples.iter().any(|t| t[0] != t[1]));
    }
}
