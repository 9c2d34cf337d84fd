//! Finite truncations of the low-entropy labeled graph whose one-block image
//! contains an arbitrary binary subshift `Y`.
//!
//! `G+` has a vertex per `Y`-word and an `i`-labeled edge from `v_W` to
//! `v_Wi`; `G-` mirrors it so that left-infinite `Y`-paths end at the shared
//! root `v_e`. For each `n_k` every level-`n_k` vertex of `G+` is joined to
//! every level-`n_k` vertex of `G-` by a private path of `m_k` edges labeled
//! `2`, and a loop of `M` edges labeled `2` sits at the root.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::factor::{image_words, BlockCode};
use crate::graph::FiniteGraph;
use crate::interval::Interval;
use crate::loops::{ln_biguint, loops_from_first_returns, LoopCount};
use crate::presentation::graph_loop_counts;

/// The words of a binary subshift, up to some length.
#[derive(Clone, Debug)]
pub struct Language {
    /// `by_len[n]` holds the words of length `n`, sorted; `by_len[0]` is the empty word.
    by_len: Vec<Vec<String>>,
}

impl Language {
    /// Words of the image of a code, which must use the labels `0` and `1`.
    pub fn from_code(code: &BlockCode, depth: usize) -> Result<Language> {
        if code.labels().iter().any(|l| l != "0" && l != "1") {
            return invalid("a subshift presentation must use only the labels 0 and 1");
        }
        let mut by_len = vec![vec![String::new()]];
        by_len.resize(depth + 1, Vec::new());
        for w in image_words(code, depth) {
            by_len[w.len()].push(w.concat());
        }
        for l in by_len.iter_mut() {
            l.sort();
        }
        Ok(Language { by_len })
    }

    /// An explicit list, closed under taking subwords.
    pub fn from_words(words: &[String], depth: usize) -> Result<Language> {
        let mut set = BTreeSet::new();
        for w in words {
            if !w.bytes().all(|b| b == b'0' || b == b'1') {
                return invalid(format!("word {w:?} is not binary"));
            }
            for i in 0..w.len() {
                for j in i + 1..=w.len().min(i + depth) {
                    set.insert(w[i..j].to_string());
                }
            }
        }
        let mut by_len = vec![vec![String::new()]];
        by_len.resize(depth + 1, Vec::new());
        for w in set {
            by_len[w.len()].push(w);
        }
        Ok(Language { by_len })
    }

    pub fn depth(&self) -> usize {
        self.by_len.len() - 1
    }

    pub fn words(&self, n: usize) -> &[String] {
        &self.by_len[n]
    }

    pub fn count(&self, n: usize) -> usize {
        self.by_len[n].len()
    }

    pub fn contains(&self, w: &str) -> bool {
        w.len() <= self.depth() && self.by_len[w.len()].binary_search(&w.to_string()).is_ok()
    }
}

/// Parameters of a truncation.
#[derive(Clone, Debug)]
pub struct PathologySpec {
    pub epsilon: f64,
    pub n_seq: Vec<usize>,
    pub m_seq: Vec<usize>,
    pub big_m: usize,
    pub depth: usize,
}

impl PathologySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return invalid("epsilon must be positive");
        }
        if self.n_seq.is_empty() || self.n_seq.len() != self.m_seq.len() {
            return invalid("n and m sequences must be nonempty and of equal length");
        }
        if self.n_seq[0] == 0 || self.n_seq.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n sequence must be strictly increasing positive integers");
        }
        if self.big_m == 0 {
            return invalid("M must be positive");
        }
        let mut seen = BTreeSet::new();
        for &m in &self.m_seq {
            if m == 0 {
                return invalid("m values must be positive");
            }
            if m % self.big_m == 0 {
                return invalid(format!("m value {m} is a multiple of M = {}", self.big_m));
            }
            if !seen.insert(m) {
                return invalid(format!("m value {m} repeats"));
            }
        }
        if *self.n_seq.last().unwrap() > self.depth {
            return invalid(format!("depth {} is below the largest n value", self.depth));
        }
        Ok(())
    }
}

/// The truncated graph with its edge labels.
#[derive(Clone, Debug)]
pub struct PathologyGraph {
    pub code: BlockCode,
    pub root: usize,
    /// Vertices of `G+` and `G-` at each level (index = word length).
    pub plus_levels: Vec<usize>,
    pub minus_levels: Vec<usize>,
}

/// Build the edge-labeled truncation.
pub fn build_pathology_graph(y: &Language, spec: &PathologySpec) -> Result<PathologyGraph> {
    spec.validate()?;
    if y.depth() < spec.depth {
        return invalid("language depth is below the truncation depth");
    }
    let mut g = FiniteGraph::new();
    let mut labels: Vec<String> = Vec::new();
    let root = g.add_vertex("e");
    let mut plus: HashMap<String, usize> = HashMap::from([(String::new(), root)]);
    let mut minus: HashMap<String, usize> = HashMap::from([(String::new(), root)]);
    let mut plus_levels = vec![1];
    let mut minus_levels = vec![1];
    let edge = |g: &mut FiniteGraph, labels: &mut Vec<String>, a: usize, b: usize, l: &str| {
        g.add_edge(a, b, None);
        labels.push(l.to_string());
    };
    for n in 1..=spec.depth {
        for w in y.words(n) {
            let v = g.add_vertex(&format!("p{w}"));
            plus.insert(w.clone(), v);
            edge(&mut g, &mut labels, plus[&w[..n - 1]], v, &w[n - 1..]);
            let u = g.add_vertex(&format!("q{w}"));
            minus.insert(w.clone(), u);
            edge(&mut g, &mut labels, u, minus[&w[1..]], &w[..1]);
        }
        plus_levels.push(y.count(n));
        minus_levels.push(y.count(n));
    }
    for (k, (&n, &m)) in spec.n_seq.iter().zip(&spec.m_seq).enumerate() {
        for a in y.words(n) {
            for b in y.words(n) {
                let mut prev = plus[a];
                for i in 1..m {
                    let v = g.add_vertex(&format!("c{k}.{a}.{b}.{i}"));
                    edge(&mut g, &mut labels, prev, v, "2");
                    prev = v;
                }
                edge(&mut g, &mut labels, prev, minus[b], "2");
            }
        }
    }
    let mut prev = root;
    for i in 1..spec.big_m {
        let v = g.add_vertex(&format!("z{i}"));
        edge(&mut g, &mut labels, prev, v, "2");
        prev = v;
    }
    edge(&mut g, &mut labels, prev, root, "2");
    let code = BlockCode::edge_labeled(g, labels)?;
    Ok(PathologyGraph { code, root, plus_levels, minus_levels })
}

/// First-return loop counts at the root: `x^M + sum_k N_k^2 x^(2 n_k + m_k)`.
pub fn first_return_counts(y: &Language, spec: &PathologySpec) -> BTreeMap<usize, BigUint> {
    let mut f: BTreeMap<usize, BigUint> = BTreeMap::new();
    *f.entry(spec.big_m).or_default() += 1u32;
    for (&n, &m) in spec.n_seq.iter().zip(&spec.m_seq) {
        let c = y.count(n) as u64;
        *f.entry(2 * n + m).or_default() += BigUint::from(c * c);
    }
    f
}

fn eval_first_return(f: &BTreeMap<usize, BigUint>, x: Interval) -> Interval {
    let mut s = Interval::ZERO;
    for (&n, c) in f {
        s = s + Interval::from_bigint(&c.clone().into()) * x.powi(n as u64);
    }
    s
}

/// Enclosure of `-ln r` where `r` solves `F(r) = 1`: an upper bound for every
/// loop-count rate `(1/n) ln(loops of length n)`.
pub fn entropy_upper_bound(f: &BTreeMap<usize, BigUint>) -> Interval {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval_first_return(f, Interval::point(mid)).hi() < 1.0 {
            lo = mid;
        } else if eval_first_return(f, Interval::point(mid)).lo() > 1.0 {
            hi = mid;
        } else {
            break;
        }
    }
    // r lies in [lo, hi]; -ln r in [-ln hi, -ln lo].
    let a = -Interval::point(hi).ln();
    let b = -Interval::point(lo).ln();
    Interval::new(a.lo(), b.hi())
}

/// Certification report.
#[derive(Clone, Debug)]
pub struct PathologyReport {
    pub loop_counts: Vec<LoopCount>,
    /// Loop counts from the graph agree with the first-return recursion.
    pub counts_agree: bool,
    pub estimate: f64,
    pub upper_bound: Interval,
    pub entropy_pass: bool,
    pub upper_pass: bool,
    /// Words `W 2^(m_k) W'` with one preimage each, out of all checked.
    pub unique_preimage_checked: usize,
    pub unique_preimage_failures: Vec<String>,
    /// Bordered maximal 2-block lengths seen and whether they lie in `{m_k} u M N`.
    pub block_lengths: BTreeSet<usize>,
    pub block_lengths_ok: bool,
    /// Two-sided words without 2 split as a `Y`-word followed by a `Y`-word.
    pub concatenation_ok: bool,
    /// A word on the `2`-free part with several preimages, each fixed by
    /// where it crosses the root.
    pub multi_preimage_witness: Option<(String, usize)>,
}

impl PathologyReport {
    pub fn passed(&self) -> bool {
        self.entropy_pass
            && self.counts_agree
            && self.unique_preimage_failures.is_empty()
            && self.block_lengths_ok
            && self.concatenation_ok
    }

    pub fn render(&self, spec: &PathologySpec) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "epsilon={}", spec.epsilon);
        let _ = writeln!(out, "n={}", join(&spec.n_seq));
        let _ = writeln!(out, "m={}", join(&spec.m_seq));
        let _ = writeln!(out, "M={}", spec.big_m);
        let _ = writeln!(out, "depth={}", spec.depth);
        let _ = writeln!(out, "loop_lengths={}", self.loop_counts.len());
        let _ = writeln!(out, "counts_agree={}", self.counts_agree);
        let _ = writeln!(out, "entropy_estimate={:.9}", self.estimate);
        let _ = writeln!(out, "entropy_upper_bound={:.9}", self.upper_bound.hi());
        let _ = writeln!(out, "entropy_verdict={}", if self.entropy_pass { "pass" } else { "fail" });
        let _ = writeln!(out, "upper_bound_verdict={}", if self.upper_pass { "pass" } else { "fail" });
        let _ = writeln!(out, "unique_preimage_checked={}", self.unique_preimage_checked);
        let _ = writeln!(out, "unique_preimage_failures={}", self.unique_preimage_failures.len());
        for f in &self.unique_preimage_failures {
            let _ = writeln!(out, "unique_preimage_failure={f}");
        }
        let lens: Vec<usize> = self.block_lengths.iter().copied().collect();
        let _ = writeln!(out, "block_lengths={}", join(&lens));
        let _ = writeln!(out, "block_lengths_ok={}", self.block_lengths_ok);
        let _ = writeln!(out, "concatenation_ok={}", self.concatenation_ok);
        match &self.multi_preimage_witness {
            Some((w, c)) => {
                let _ = writeln!(out, "multi_preimage_word={w}");
                let _ = writeln!(out, "multi_preimage_count={c}");
            }
            None => {
                let _ = writeln!(out, "multi_preimage_word=none");
            }
        }
        let _ = writeln!(out, "verdict={}", if self.passed() { "pass" } else { "fail" });
        out
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Paths in the graph whose edge labels spell words, counted by dynamic
/// programming from the end vertices of edges carrying the first symbol.
struct PreimageCounter<'a> {
    code: &'a BlockCode,
    out_edges: Vec<Vec<usize>>,
    first: HashMap<u8, HashMap<usize, BigUint>>,
}

impl<'a> PreimageCounter<'a> {
    fn new(code: &'a BlockCode) -> Self {
        let g = code.source();
        let mut first: HashMap<u8, HashMap<usize, BigUint>> = HashMap::new();
        for (e, ed) in g.edges().iter().enumerate() {
            let l = code.label(e).as_bytes()[0];
            *first.entry(l).or_default().entry(ed.to).or_default() += 1u32;
        }
        PreimageCounter { code, out_edges: g.out_edges(), first }
    }

    fn count(&self, word: &[u8]) -> BigUint {
        let g = self.code.source();
        let Some(mut cur) = self.first.get(&word[0]).cloned() else {
            return BigUint::zero();
        };
        for &c in &word[1..] {
            let mut next: HashMap<usize, BigUint> = HashMap::new();
            for (v, n) in &cur {
                for &e in &self.out_edges[*v] {
                    if self.code.label(e).as_bytes() == [c] {
                        *next.entry(g.edges()[e].to).or_default() += n;
                    }
                }
            }
            cur = next;
        }
        cur.values().sum()
    }
}

/// Run every check on a built truncation.
pub fn certify_pathology(pg: &PathologyGraph, y: &Language, spec: &PathologySpec, l_max: usize) -> PathologyReport {
    let g = pg.code.source();
    let rows = graph_loop_counts(g, pg.root, l_max);
    let f = first_return_counts(y, spec);
    let mut first = vec![BigUint::zero(); l_max + 1];
    for (&n, c) in &f {
        if n <= l_max {
            first[n] = c.clone();
        }
    }
    let recursion = loops_from_first_returns(&first, l_max);
    let counts_agree = rows.len() == recursion.len() && rows.iter().zip(&recursion).all(|(a, b)| a.count == b.count);
    let estimate = rows
        .iter()
        .filter(|r| !r.count.is_zero())
        .map(|r| ln_biguint(&r.count) / r.n as f64)
        .fold(0.0, f64::max);
    let upper_bound = entropy_upper_bound(&f);

    let counter = PreimageCounter::new(&pg.code);
    let out_edges = &counter.out_edges;
    let mut checked = 0;
    let mut failures = Vec::new();
    for (&n, &m) in spec.n_seq.iter().zip(&spec.m_seq) {
        for a in y.words(n) {
            for b in y.words(n) {
                let word = format!("{a}{}{b}", "2".repeat(m));
                checked += 1;
                let c = counter.count(word.as_bytes());
                if c != BigUint::from(1u32) {
                    failures.push(format!("{word}:{c}"));
                }
            }
        }
    }
    for j in 1..=2 {
        for a in y.words(1) {
            for b in y.words(1) {
                let word = format!("{a}{}{b}", "2".repeat(j * spec.big_m));
                checked += 1;
                let c = counter.count(word.as_bytes());
                if c != BigUint::from(1u32) {
                    failures.push(format!("{word}:{c}"));
                }
            }
        }
    }

    let limit = spec.m_seq.iter().copied().max().unwrap_or(0).max(3 * spec.big_m);
    let block_lengths = bordered_block_lengths(&pg.code, out_edges, limit);
    let block_lengths_ok = block_lengths.iter().all(|&l| spec.m_seq.contains(&l) || l % spec.big_m == 0);

    let concatenation_ok = check_concatenations(&pg.code, out_edges, y, spec.depth.min(8));
    let multi_preimage_witness = multi_preimage(&counter, y, spec.depth.min(6));

    PathologyReport {
        loop_counts: rows,
        counts_agree,
        estimate,
        upper_pass: upper_bound.hi() < spec.epsilon,
        upper_bound,
        entropy_pass: estimate < spec.epsilon,
        unique_preimage_checked: checked,
        unique_preimage_failures: failures,
        block_lengths,
        block_lengths_ok,
        concatenation_ok,
        multi_preimage_witness,
    }
}

/// Lengths (up to `limit`) of maximal runs of `2` entered and left by a
/// `0`/`1` edge.
fn bordered_block_lengths(code: &BlockCode, out_edges: &[Vec<usize>], limit: usize) -> BTreeSet<usize> {
    let g = code.source();
    let mut starts = BTreeSet::new();
    for (e, ed) in g.edges().iter().enumerate() {
        if code.label(e) != "2" {
            starts.insert(ed.to);
        }
    }
    let mut out = BTreeSet::new();
    let mut frontier: BTreeSet<usize> = starts;
    for len in 1..=limit {
        let mut next = BTreeSet::new();
        for &v in &frontier {
            for &e in &out_edges[v] {
                if code.label(e) == "2" {
                    next.insert(g.edges()[e].to);
                }
            }
        }
        for &v in &next {
            if out_edges[v].iter().any(|&e| code.label(e) != "2") {
                out.insert(len);
            }
        }
        frontier = next;
    }
    out
}

/// Every `2`-free path of length at most `len` spells `u v` with `u` and `v`
/// words of `Y`.
fn check_concatenations(code: &BlockCode, out_edges: &[Vec<usize>], y: &Language, len: usize) -> bool {
    let g = code.source();
    let mut frontier: BTreeSet<(usize, String)> = BTreeSet::new();
    for (e, ed) in g.edges().iter().enumerate() {
        if code.label(e) != "2" {
            frontier.insert((ed.to, code.label(e).to_string()));
        }
    }
    for _ in 0..len {
        let mut next = BTreeSet::new();
        for (v, w) in &frontier {
            if !(0..=w.len()).any(|i| y.contains(&w[..i]) && y.contains(&w[i..])) {
                return false;
            }
            if w.len() < len {
                for &e in &out_edges[*v] {
                    if code.label(e) != "2" {
                        next.insert((g.edges()[e].to, format!("{w}{}", code.label(e))));
                    }
                }
            }
        }
        frontier = next;
    }
    true
}

/// A `Y`-word read by several `2`-free paths; each path is pinned down by
/// the position where it passes the root.
fn multi_preimage(counter: &PreimageCounter<'_>, y: &Language, len: usize) -> Option<(String, usize)> {
    for n in (2..=len).rev() {
        for w in y.words(n) {
            let c = counter.count(w.as_bytes());
            if c > BigUint::from(1u32) {
                return Some((w.clone(), c.to_usize().unwrap_or(usize::MAX)));
            }
        }
    }
    None
}

/// Choose `m_k` and `M` so that the first-return series is below 1 at
/// `e^-epsilon`, preferring the smallest truncated graph.
pub fn search_parameters(y: &Language, epsilon: f64, n_seq: &[usize], depth: usize, max_m: usize) -> Result<PathologySpec> {
    let x = Interval::point(-epsilon).exp();
    let mut best: Option<(usize, PathologySpec)> = None;
    for big_m in 2..=max_m {
        let rest = 1.0 - x.powi(big_m as u64).hi();
        if rest <= 0.0 {
            continue;
        }
        let mut m_seq: Vec<usize> = Vec::new();
        let mut ok = true;
        for (k, &n) in n_seq.iter().enumerate() {
            let share = rest * 0.9 * 0.5f64.powi(k as i32 + 1);
            let nk = y.count(n) as f64;
            let mut m = m_seq.last().map_or(1, |&p| p + 1);
            loop {
                if m % big_m != 0 && nk * nk * x.hi().powi((2 * n + m) as i32) <= share {
                    break;
                }
                m += 1;
                if m > 100_000 {
                    ok = false;
                    break;
                }
            }
            m_seq.push(m);
        }
        if !ok {
            continue;
        }
        let spec = PathologySpec { epsilon, n_seq: n_seq.to_vec(), m_seq, big_m, depth };
        let f = first_return_counts(y, &spec);
        if eval_first_return(&f, x).hi() >= 1.0 {
            continue;
        }
        let size: usize = spec.n_seq.iter().zip(&spec.m_seq).map(|(&n, &m)| y.count(n).pow(2) * m).sum::<usize>() + big_m;
        if best.as_ref().is_none_or(|(s, _)| size < *s) {
            best = Some((size, spec));
        }
    }
    best.map(|(_, s)| s).ok_or_else(|| Error::BudgetExhausted("no m and M found within the search range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden(depth: usize) -> Language {
        let g = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]);
        let code = BlockCode::vertex_labeled(g, vec!["0".into(), "1".into()]).unwrap();
        Language::from_code(&code, depth).unwrap()
    }

    #[test]
    fn golden_levels_are_fibonacci() {
        let y = golden(6);
        let counts: Vec<usize> = (1..=6).map(|n| y.count(n)).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13, 21]);
        let spec = PathologySpec { epsilon: 0.3, n_seq: vec![1, 2], m_seq: vec![5, 7], big_m: 3, depth: 6 };
        let pg = build_pathology_graph(&y, &spec).unwrap();
        assert_eq!(pg.plus_levels[1..], [2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn spec_validation() {
        let bad = PathologySpec { epsilon: 0.3, n_seq: vec![1], m_seq: vec![4], big_m: 2, depth: 3 };
        assert!(bad.validate().is_err());
        let shallow = PathologySpec { epsilon: 0.3, n_seq: vec![1, 5], m_seq: vec![3, 5], big_m: 2, depth: 3 };
        assert!(shallow.validate().is_err());
    }

    #[test]
    fn fixed_point_passes() {
        let y = Language::from_words(&["0000".to_string()], 3).unwrap();
        let spec = search_parameters(&y, 0.5, &[1, 2, 3], 3, 64).unwrap();
        let pg = build_pathology_graph(&y, &spec).unwrap();
        let r = certify_pathology(&pg, &y, &spec, 40);
        assert!(r.passed(), "{}", r.render(&spec));
        assert!(r.upper_pass);
        assert!(r.multi_preimage_witness.is_some());
    }

    #[test]
    fn negative_control_fails() {
        let y = golden(8);
        let spec = PathologySpec { epsilon: 0.3, n_seq: vec![1], m_seq: vec![1], big_m: 2, depth: 8 };
        let pg = build_pathology_graph(&y, &spec).unwrap();
        let r = certify_pathology(&pg, &y, &spec, 40);
        assert!(r.estimate >= 0.3);
        assert!(!r.entropy_pass);
        assert!(r.counts_agree);
    }
}

#[cfg(test)]
mod search_tests {
    use super::*;

    #[test]
    fn golden_depth_eight_search() {
        let g = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]);
        let code = BlockCode::vertex_labeled(g, vec!["0".into(), "1".into()]).unwrap();
        let y = Language::from_code(&code, 8).unwrap();
        let t = std::time::Instant::now();
        let n: Vec<usize> = (1..=8).collect();
        let spec = search_parameters(&y, 0.3, &n, 8, 64).unwrap();
        let pg = build_pathology_graph(&y, &spec).unwrap();
        let r = certify_pathology(&pg, &y, &spec, 40);
        eprintln!("{} vertices={} {:?}", r.render(&spec), pg.code.source().vertex_count(), t.elapsed());
        assert!(r.passed());
    }
}
