//! Marker embeddings: injective high-entropy subsystems for one-block codes.
//!
//! The subsystem `X_K` consists of concatenations `m_a w_1 .. w_K` where the
//! markers `m_a = l^A lt^C L_a` are built from base loops and the `w_i` come
//! from a gallery of base loops of a fixed length `N`. Every result is
//! checked by the fiber-product injectivity oracle, the period computation
//! and a Perron entropy bound; the search itself is only a heuristic.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::entropy::{EntropyOrdering, ExtendedEntropy};
use crate::error::{invalid, Error, Result};
use crate::factor::{check_injective, image_entropy, BlockCode, InjectivityVerdict, SubSystem};
use crate::graph::{period_of_component, FiniteGraph};
use crate::loops::ln_biguint;
use crate::perron::perron_entropy;

/// Which loop words may fill the gallery slots.
#[derive(Clone, Debug, PartialEq)]
pub enum Gallery {
    /// An explicit list of base loops, all of length `N`.
    Words(Vec<Vec<usize>>),
    /// All base loops of length `n` chosen deterministically per label word,
    /// whose labels never contain a run of the `l` label longer than `zeta * n`.
    Filtered { n: usize, zeta: f64 },
}

/// Parameters of the marker construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkerParams {
    pub base: usize,
    pub ell: Vec<usize>,
    pub ell_tilde: Vec<usize>,
    pub bridge1: Vec<usize>,
    pub bridge2: Vec<usize>,
    pub a: usize,
    pub c: usize,
    pub gallery: Gallery,
    pub k: usize,
    /// Extra symbols demanded of `l^A` beyond the structural minimum.
    pub margin: usize,
}

/// Search limits.
#[derive(Clone, Debug)]
pub struct Budget {
    pub max_n: usize,
    pub max_k: usize,
    pub max_ac: usize,
    /// Largest gallery kept as an explicit word list.
    pub gallery_cap: usize,
    pub zeta: f64,
    /// Longest loop tried for `l`, `lt` and the bridges.
    pub loop_len_cap: usize,
    /// Largest subsystem graph handed to the oracles.
    pub max_vertices: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_n: 64, max_k: 64, max_ac: 32, gallery_cap: 4096, zeta: 0.25, loop_len_cap: 12, max_vertices: 20000 }
    }
}

/// A certified injective subsystem.
#[derive(Clone, Debug)]
pub struct EmbeddingCertificate {
    pub subsystem: SubSystem,
    pub period: u64,
    pub entropy: ExtendedEntropy,
    pub injectivity: InjectivityVerdict,
    pub target: ExtendedEntropy,
    /// `None` when the whole domain already qualified.
    pub params: Option<MarkerParams>,
    pub gallery_size: BigUint,
    /// `K log|G| / (K N + max marker length)`.
    pub lower_bound: f64,
    pub transcript: Vec<String>,
}

impl EmbeddingCertificate {
    pub fn is_valid(&self, domain_period: u64, tol: f64) -> bool {
        self.injectivity.injective
            && self.period == domain_period
            && self.entropy.compare(&self.target, tol) == EntropyOrdering::Greater
    }
}

fn loop_ok(code: &BlockCode, base: usize, w: &[usize]) -> bool {
    let g = code.domain();
    if w.is_empty() || w[0] != base {
        return false;
    }
    let succ = g.successors();
    w.windows(2).all(|p| succ[p[0]].contains(&p[1])) && succ[*w.last().unwrap()].contains(&base)
}

/// Base loops up to `len_cap`, shortest first, then lexicographic by vertex index.
pub fn base_loops(code: &BlockCode, base: usize, len_cap: usize, limit: usize) -> Vec<Vec<usize>> {
    let g = code.domain();
    let mut succ = g.successors();
    for l in succ.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut out = Vec::new();
    let mut level: Vec<Vec<usize>> = vec![vec![base]];
    for _ in 1..=len_cap {
        for w in &level {
            if succ[*w.last().unwrap()].binary_search(&base).is_ok() {
                out.push(w.clone());
                if out.len() >= limit {
                    return out;
                }
            }
        }
        let mut next = Vec::new();
        for w in &level {
            for &v in &succ[*w.last().unwrap()] {
                let mut w2 = w.clone();
                w2.push(v);
                next.push(w2);
                if next.len() > limit {
                    break;
                }
            }
        }
        level = next;
    }
    out
}

/// Primitive root of a label word, rotated to its least form.
fn orbit_class(labels: &[&str]) -> Vec<String> {
    let n = labels.len();
    let mut q = n;
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|i| labels[i] == labels[i % d]) {
            q = d;
            break;
        }
    }
    let root: Vec<&str> = labels[..q].to_vec();
    (0..q)
        .map(|r| (0..q).map(|i| root[(i + r) % q].to_string()).collect::<Vec<_>>())
        .min()
        .unwrap()
}

fn word_labels<'a>(code: &'a BlockCode, w: &[usize]) -> Vec<&'a str> {
    w.iter().map(|&v| code.label(v)).collect()
}

/// Two base loops whose periodic images are different points.
pub fn find_image_distinct_loops(code: &BlockCode, base: usize, len_cap: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let loops = base_loops(code, base, len_cap, 100_000);
    let Some(first) = loops.first() else {
        return Err(Error::NotFound(format!("no loop at {} within length {len_cap}", code.symbol(base))));
    };
    let class = orbit_class(&word_labels(code, first));
    for w in &loops[1..] {
        if orbit_class(&word_labels(code, w)) != class {
            return Ok((first.clone(), w.clone()));
        }
    }
    Err(Error::NotFound(format!(
        "all loops at {} up to length {len_cap} have the same periodic image",
        code.symbol(base)
    )))
}

/// Bridge loops with lengths differing by exactly `p`, shortest first.
pub fn find_bridge_loops(code: &BlockCode, base: usize, p: usize, len_cap: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let loops = base_loops(code, base, len_cap + p, 100_000);
    let mut by_len: BTreeMap<usize, &Vec<usize>> = BTreeMap::new();
    for w in &loops {
        by_len.entry(w.len()).or_insert(w);
    }
    for (&n, w) in &by_len {
        if let Some(w2) = by_len.get(&(n + p)) {
            return Ok(((*w).clone(), (*w2).clone()));
        }
    }
    Err(Error::NotFound(format!("no loops at {} with lengths differing by {p}", code.symbol(base))))
}

/// Tracks the longest suffix of a label word that is a factor of `P^inf`,
/// where `P` is the primitive label root of `l`.
struct RunTracker {
    root: Vec<usize>,
}

impl RunTracker {
    fn matches(&self, s: &[usize], phase: usize) -> bool {
        let q = self.root.len();
        s.iter().enumerate().all(|(i, &x)| self.root[(phase + i) % q] == x)
    }

    /// `(phase, t)` after appending `x`.
    fn step(&self, phase: usize, t: usize, x: usize) -> (usize, usize) {
        let q = self.root.len();
        if self.root[(phase + t) % q] == x {
            return (phase, t + 1);
        }
        let mut s: Vec<usize> = (0..t).map(|i| self.root[(phase + i) % q]).collect();
        s.push(x);
        for len in (1..=t).rev() {
            let suf = &s[s.len() - len..];
            if let Some(ph) = (0..q).find(|&ph| self.matches(suf, ph)) {
                return (ph, len);
            }
        }
        (0, 0)
    }
}

/// A gallery laid out as a graph: one entry node, exit nodes, and per-node
/// domain symbols. Distinct entry-to-exit paths are distinct gallery words.
struct GalleryGraph {
    sym: Vec<usize>,
    succ: Vec<Vec<usize>>,
    entry: usize,
    exits: Vec<usize>,
    words: BigUint,
    n: usize,
}

fn label_ids(code: &BlockCode) -> Vec<usize> {
    let alpha = code.alphabet();
    let idx: HashMap<&str, usize> = alpha.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    code.labels().iter().map(|l| idx[l.as_str()]).collect()
}

fn explicit_gallery(code: &BlockCode, base: usize, words: &[Vec<usize>]) -> Result<GalleryGraph> {
    let Some(n) = words.first().map(|w| w.len()) else {
        return invalid("gallery is empty");
    };
    let mut sym = vec![base];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut child: HashMap<(usize, usize), usize> = HashMap::new();
    let mut exits = Vec::new();
    let mut distinct = std::collections::BTreeSet::new();
    for w in words {
        if w.len() != n || !loop_ok(code, base, w) {
            return invalid("every gallery word must be a base loop of the common length");
        }
        distinct.insert(w.clone());
        let mut cur = 0;
        for &v in &w[1..] {
            cur = *child.entry((cur, v)).or_insert_with(|| {
                sym.push(v);
                succ.push(Vec::new());
                let id = sym.len() - 1;
                succ[cur].push(id);
                id
            });
        }
        if !exits.contains(&cur) {
            exits.push(cur);
        }
    }
    Ok(GalleryGraph { sym, succ, entry: 0, exits, words: BigUint::from(distinct.len()), n })
}

fn filtered_gallery(code: &BlockCode, base: usize, ell: &[usize], n: usize, zeta: f64) -> Option<GalleryGraph> {
    let g = code.domain();
    let nv = g.vertex_count();
    let mut succ_d = g.successors();
    for l in succ_d.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let lab = label_ids(code);
    let ell_labels: Vec<usize> = ell.iter().map(|&v| lab[v]).collect();
    let q = (1..=ell_labels.len())
        .find(|&d| ell_labels.len() % d == 0 && (0..ell_labels.len()).all(|i| ell_labels[i] == ell_labels[i % d]))
        .unwrap();
    let tracker = RunTracker { root: ell_labels[..q].to_vec() };
    let cap = (zeta * n as f64).floor() as usize;
    // finish[j][v]: a path v_j .. v_{n-1} exists with v_{n-1} -> base.
    let mut finish = vec![vec![false; nv]; n];
    for v in 0..nv {
        finish[n - 1][v] = succ_d[v].binary_search(&base).is_ok();
    }
    for j in (0..n - 1).rev() {
        for v in 0..nv {
            finish[j][v] = succ_d[v].iter().any(|&w| finish[j + 1][w]);
        }
    }
    if !finish[0][base] {
        return None;
    }
    let (ph0, t0) = tracker.step(0, 0, lab[base]);
    if t0 > cap {
        return None;
    }
    // Layered forward construction keyed by (vertex, phase, run).
    let mut layers: Vec<Vec<(usize, usize, usize)>> = vec![vec![(base, ph0, t0)]];
    let mut edges: Vec<Vec<(usize, usize)>> = Vec::new();
    for j in 0..n - 1 {
        let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
        let mut next = Vec::new();
        let mut es = Vec::new();
        for (i, &(v, ph, t)) in layers[j].iter().enumerate() {
            let mut chosen: BTreeMap<usize, usize> = BTreeMap::new();
            for &w in &succ_d[v] {
                if finish[j + 1][w] {
                    chosen.entry(lab[w]).or_insert(w);
                }
            }
            for (&x, &w) in &chosen {
                let (ph2, t2) = tracker.step(ph, t, x);
                if t2 > cap {
                    continue;
                }
                let key = (w, ph2, t2);
                let k = *index.entry(key).or_insert_with(|| {
                    next.push(key);
                    next.len() - 1
                });
                es.push((i, k));
            }
        }
        layers.push(next);
        edges.push(es);
    }
    // Backward pruning of dead ends.
    let mut alive: Vec<Vec<bool>> = layers.iter().map(|l| vec![false; l.len()]).collect();
    for a in alive[n - 1].iter_mut() {
        *a = true;
    }
    for j in (0..n - 1).rev() {
        for &(i, k) in &edges[j] {
            if alive[j + 1][k] {
                alive[j][i] = true;
            }
        }
    }
    if !alive[0][0] {
        return None;
    }
    let mut id = vec![Vec::new(); n];
    let mut sym = Vec::new();
    for j in 0..n {
        for (i, &(v, _, _)) in layers[j].iter().enumerate() {
            if alive[j][i] {
                id[j].push(Some(sym.len()));
                sym.push(v);
            } else {
                id[j].push(None);
            }
        }
    }
    let mut succ = vec![Vec::new(); sym.len()];
    for j in 0..n - 1 {
        for &(i, k) in &edges[j] {
            if let (Some(a), Some(b)) = (id[j][i], id[j + 1][k]) {
                succ[a].push(b);
            }
        }
    }
    let exits: Vec<usize> = id[n - 1].iter().flatten().copied().collect();
    // Word count: paths from the entry through the layers.
    let mut count = vec![BigUint::zero(); sym.len()];
    count[0] = BigUint::from(1u32);
    for a in 0..sym.len() {
        if count[a].is_zero() {
            continue;
        }
        let c = count[a].clone();
        for &b in &succ[a] {
            count[b] += &c;
        }
    }
    let words = exits.iter().map(|&e| count[e].clone()).sum();
    Some(GalleryGraph { sym, succ, entry: 0, exits, words, n })
}

fn build_gallery(code: &BlockCode, params: &MarkerParams) -> Result<GalleryGraph> {
    match &params.gallery {
        Gallery::Words(ws) => explicit_gallery(code, params.base, ws),
        Gallery::Filtered { n, zeta } => {
            if *n == 0 {
                return invalid("gallery length must be positive");
            }
            filtered_gallery(code, params.base, &params.ell, *n, *zeta)
                .ok_or_else(|| Error::Invalid(format!("no admissible gallery words of length {n}")))
        }
    }
}

fn marker_prefix(params: &MarkerParams) -> Vec<usize> {
    let mut w = Vec::new();
    for _ in 0..params.a {
        w.extend_from_slice(&params.ell);
    }
    for _ in 0..params.c {
        w.extend_from_slice(&params.ell_tilde);
    }
    w
}

/// Marker words `l^A lt^C L_1` and `l^A lt^C L_2`.
pub fn marker_words(params: &MarkerParams) -> (Vec<usize>, Vec<usize>) {
    let pre = marker_prefix(params);
    let mut m1 = pre.clone();
    m1.extend_from_slice(&params.bridge1);
    let mut m2 = pre;
    m2.extend_from_slice(&params.bridge2);
    (m1, m2)
}

/// Check the parameter invariants against a code's domain.
pub fn check_params(code: &BlockCode, params: &MarkerParams) -> Result<()> {
    let b = params.base;
    if b >= code.domain().vertex_count() {
        return invalid("base vertex out of range");
    }
    for (name, w) in [("l", &params.ell), ("lt", &params.ell_tilde), ("L1", &params.bridge1), ("L2", &params.bridge2)] {
        if !loop_ok(code, b, w) {
            return invalid(format!("{name} is not a loop at the base vertex"));
        }
    }
    let p = period_of_component(code.domain()) as usize;
    if params.bridge2.len() != params.bridge1.len() + p {
        return invalid(format!("bridge lengths must differ by the period {p}"));
    }
    if params.a == 0 || params.c == 0 || params.k == 0 {
        return invalid("A, C and K must be positive");
    }
    let (m1, m2) = marker_words(params);
    if m1.len() == m2.len() {
        return invalid("marker lengths must differ");
    }
    Ok(())
}

/// The `X_K` presentation as a subsystem of the code's domain.
pub fn build_marker_sft(code: &BlockCode, params: &MarkerParams) -> Result<SubSystem> {
    check_params(code, params)?;
    let gal = build_gallery(code, params)?;
    let mut g = FiniteGraph::new();
    let mut to_domain = Vec::new();
    let mut add = |g: &mut FiniteGraph, sym: usize, tag: String| -> usize {
        to_domain.push(sym);
        g.add_vertex(&format!("{}@{tag}", code.symbol(sym)))
    };
    let pre = marker_prefix(params);
    let pre_ids: Vec<usize> = pre.iter().enumerate().map(|(i, &v)| add(&mut g, v, format!("m{i}"))).collect();
    for w in pre_ids.windows(2) {
        g.add_edge(w[0], w[1], None);
    }
    let mut bridge_ends = Vec::new();
    for (tag, bridge) in [("x", &params.bridge1), ("y", &params.bridge2)] {
        let ids: Vec<usize> = bridge.iter().enumerate().map(|(i, &v)| add(&mut g, v, format!("{tag}{i}"))).collect();
        g.add_edge(*pre_ids.last().unwrap(), ids[0], None);
        for w in ids.windows(2) {
            g.add_edge(w[0], w[1], None);
        }
        bridge_ends.push(*ids.last().unwrap());
    }
    let mut prev_exits = bridge_ends;
    for s in 0..params.k {
        let ids: Vec<usize> = gal.sym.iter().enumerate().map(|(i, &v)| add(&mut g, v, format!("g{s}.{i}"))).collect();
        for (a, list) in gal.succ.iter().enumerate() {
            for &b in list {
                g.add_edge(ids[a], ids[b], None);
            }
        }
        for &e in &prev_exits {
            g.add_edge(e, ids[gal.entry], None);
        }
        prev_exits = gal.exits.iter().map(|&e| ids[e]).collect();
    }
    for &e in &prev_exits {
        g.add_edge(e, pre_ids[0], None);
    }
    let sub = SubSystem { graph: g, to_domain };
    sub.check_within(code)?;
    Ok(sub)
}

/// `K log|G| / (K N + max marker length)`: the counting lower bound on the
/// entropy of `X_K`.
pub fn entropy_lower_bound(params: &MarkerParams, gallery_words: &BigUint, n: usize) -> f64 {
    let (m1, m2) = marker_words(params);
    let k = params.k as f64;
    k * ln_biguint(gallery_words) / (k * n as f64 + m1.len().max(m2.len()) as f64)
}

/// Marker recognizability in `X_K`: along every path the common marker
/// prefix `l^A lt^C` is completed only where a marker prefix actually ends.
/// Decided on the product of the subsystem graph with a prefix-matching
/// automaton. The bridges then differ in length, so block boundaries are
/// determined.
pub fn markers_recognizable(code: &BlockCode, params: &MarkerParams, sub: &SubSystem) -> bool {
    let prefix = marker_prefix(params);
    let lab = label_ids(code);
    let g = &sub.graph;
    let succ = g.successors();
    let end_tag = format!("@m{}", prefix.len() - 1);
    let all_ends: Vec<usize> = (0..g.vertex_count()).filter(|&v| g.vertex_name(v).ends_with(&end_tag)).collect();
    {
        let m = &prefix;
        let pat: Vec<usize> = m.iter().map(|&v| lab[v]).collect();
        let fail = prefix_function(&pat);
        let advance = |mut st: usize, x: usize| -> usize {
            loop {
                if st < pat.len() && pat[st] == x {
                    return st + 1;
                }
                if st == 0 {
                    return 0;
                }
                st = fail[st - 1];
            }
        };
        let mut seen = vec![vec![false; pat.len() + 1]; g.vertex_count()];
        let mut stack = Vec::new();
        for v in 0..g.vertex_count() {
            let st = advance(0, lab[sub.to_domain[v]]);
            if !seen[v][st] {
                seen[v][st] = true;
                stack.push((v, st));
            }
        }
        while let Some((v, st)) = stack.pop() {
            if st == pat.len() && !all_ends.contains(&v) {
                return false;
            }
            let st = if st == pat.len() { fail[st - 1] } else { st };
            for &w in &succ[v] {
                let s2 = advance(st, lab[sub.to_domain[w]]);
                if !seen[w][s2] {
                    seen[w][s2] = true;
                    stack.push((w, s2));
                }
            }
        }
    }
    true
}

fn prefix_function(p: &[usize]) -> Vec<usize> {
    let mut f = vec![0; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = f[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        f[i] = k;
    }
    f
}

/// Verify a candidate subsystem with the independent oracles.
pub fn certify(
    code: &BlockCode,
    sub: SubSystem,
    target: &ExtendedEntropy,
    params: Option<MarkerParams>,
    gallery_size: BigUint,
    lower_bound: f64,
    mut transcript: Vec<String>,
) -> EmbeddingCertificate {
    let injectivity = check_injective(code, &sub);
    let period = period_of_component(&sub.graph);
    let entropy = perron_entropy(&sub.graph);
    transcript.push(format!(
        "verify vertices={} edges={} injective={} period={} entropy={}",
        sub.graph.vertex_count(),
        sub.graph.edge_count(),
        injectivity.injective,
        period,
        entropy.to_doc()
    ));
    EmbeddingCertificate {
        subsystem: sub,
        period,
        entropy,
        injectivity,
        target: target.clone(),
        params,
        gallery_size,
        lower_bound,
        transcript,
    }
}

/// Search for an injective subsystem of the domain's period with entropy
/// above `target`.
pub fn synthesize_injective_subsystem(
    code: &BlockCode,
    target: &ExtendedEntropy,
    budget: &Budget,
    tol: f64,
) -> Result<EmbeddingCertificate> {
    let dom = code.domain();
    if !dom.is_irreducible() {
        return invalid("the code's domain must be irreducible");
    }
    let image = image_entropy(code, tol)?;
    match target.compare(&image, tol) {
        EntropyOrdering::Less => {}
        EntropyOrdering::Inconclusive => {
            return Err(Error::Inconclusive { tol, detail: "target versus image entropy".into() })
        }
        _ => {
            return Err(Error::PreconditionViolated(format!(
                "target entropy {} is not below the image entropy {}",
                target.to_doc(),
                image.to_doc()
            )))
        }
    }
    let p = period_of_component(dom);
    let mut transcript = vec![format!("image_entropy={} period={p}", image.to_doc())];

    let whole = code.whole();
    if check_injective(code, &whole).injective {
        transcript.push("domain is already injective".into());
        let cert = certify(code, whole, target, None, BigUint::zero(), 0.0, transcript.clone());
        if cert.is_valid(p, tol) {
            return Ok(cert);
        }
    }

    for base in 0..dom.vertex_count() {
        let Ok((ell, ell_tilde)) = find_image_distinct_loops(code, base, budget.loop_len_cap) else {
            continue;
        };
        let Ok((bridge1, bridge2)) = find_bridge_loops(code, base, p as usize, budget.loop_len_cap) else {
            continue;
        };
        transcript.push(format!(
            "base={} l={} lt={} L1={} L2={}",
            code.symbol(base),
            word_text(code, &ell),
            word_text(code, &ell_tilde),
            word_text(code, &bridge1),
            word_text(code, &bridge2)
        ));
        let p = p as usize;
        let mut n = p.max(2).div_ceil(p) * p;
        while n <= budget.max_n {
            if let Some(cert) = try_gallery_length(code, target, budget, tol, base, n, &ell, &ell_tilde, &bridge1, &bridge2, &mut transcript)? {
                return Ok(cert);
            }
            n += p;
        }
    }
    Err(Error::BudgetExhausted(format!("no certified subsystem within budget; transcript: {}", transcript.join(" | "))))
}

#[allow(clippy::too_many_arguments)]
fn try_gallery_length(
    code: &BlockCode,
    target: &ExtendedEntropy,
    budget: &Budget,
    tol: f64,
    base: usize,
    n: usize,
    ell: &[usize],
    ell_tilde: &[usize],
    bridge1: &[usize],
    bridge2: &[usize],
    transcript: &mut Vec<String>,
) -> Result<Option<EmbeddingCertificate>> {
    let h = target.approx();
    let gallery = Gallery::Filtered { n, zeta: budget.zeta };
    let mut params = MarkerParams {
        base,
        ell: ell.to_vec(),
        ell_tilde: ell_tilde.to_vec(),
        bridge1: bridge1.to_vec(),
        bridge2: bridge2.to_vec(),
        a: 1,
        c: 1,
        gallery,
        k: 1,
        margin: 0,
    };
    let Some(gal) = filtered_gallery(code, base, ell, n, budget.zeta) else {
        return Ok(None);
    };
    if gal.words <= BigUint::from(1u32) || ln_biguint(&gal.words) / (n as f64) <= h {
        return Ok(None);
    }
    // Small galleries are kept as explicit words so they can be reported.
    if gal.words <= BigUint::from(budget.gallery_cap) {
        params.gallery = Gallery::Words(gallery_words(&gal));
    }
    // Structural recognizability: |l^A| > |lt^C| + max|L| + zeta N + margin.
    let need = params.c * ell_tilde.len() + bridge1.len().max(bridge2.len()) + (budget.zeta * n as f64).floor() as usize;
    let mut a = need / ell.len() + 1;
    let mut c = 1;
    while a <= budget.max_ac {
        params.a = a;
        params.c = c;
        let Some(k) = (1..=budget.max_k).find(|&k| {
            params.k = k;
            entropy_lower_bound(&params, &gal.words, n) > h
        }) else {
            return Ok(None);
        };
        params.k = k;
        let size = params.k * gal.sym.len() + marker_words(&params).1.len() + bridge1.len();
        if size > budget.max_vertices {
            transcript.push(format!("N={n} K={k}: {size} vertices exceeds the budget"));
            return Ok(None);
        }
        let lb = entropy_lower_bound(&params, &gal.words, n);
        let sub = build_marker_sft(code, &params)?;
        let line = format!("try N={n} A={a} C={c} K={k} gallery={} bound={lb:.6}", gal.words);
        let cert = certify(code, sub, target, Some(params.clone()), gal.words.clone(), lb, vec![line.clone()]);
        transcript.push(cert.transcript.join("; "));
        if cert.is_valid(period_of_component(code.domain()), tol) {
            let mut cert = cert;
            let mut full = transcript.clone();
            full.push(format!("markers_recognizable={}", markers_recognizable(code, &params, &cert.subsystem)));
            cert.transcript = full;
            return Ok(Some(cert));
        }
        if cert.injectivity.injective {
            // Entropy or period failed: a longer gallery is the remedy.
            return Ok(None);
        }
        a *= 2;
        c += 1;
    }
    Ok(None)
}

fn gallery_words(gal: &GalleryGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![(gal.entry, vec![gal.sym[gal.entry]])];
    while let Some((node, w)) = stack.pop() {
        if w.len() == gal.n {
            if gal.exits.contains(&node) {
                out.push(w);
            }
            continue;
        }
        for &s in gal.succ[node].iter().rev() {
            let mut w2 = w.clone();
            w2.push(gal.sym[s]);
            stack.push((s, w2));
        }
    }
    out
}

/// Symbols of a word separated by spaces.
pub fn word_text(code: &BlockCode, w: &[usize]) -> String {
    w.iter().map(|&v| code.symbol(v)).collect::<Vec<_>>().join(" ")
}

impl EmbeddingCertificate {
    /// key=value report lines.
    pub fn report(&self, code: &BlockCode) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "target={}", self.target.to_doc());
        let _ = writeln!(out, "vertices={}", self.subsystem.graph.vertex_count());
        let _ = writeln!(out, "edges={}", self.subsystem.graph.edge_count());
        let _ = writeln!(out, "period={}", self.period);
        let _ = writeln!(out, "entropy={}", self.entropy.to_doc());
        let _ = writeln!(out, "entropy_approx={:.9}", self.entropy.approx());
        let _ = writeln!(out, "injective={}", self.injectivity.injective);
        let _ = writeln!(out, "lower_bound={:.9}", self.lower_bound);
        if let Some(p) = &self.params {
            let n = match &p.gallery {
                Gallery::Words(ws) => ws.first().map_or(0, |w| w.len()),
                Gallery::Filtered { n, .. } => *n,
            };
            let _ = writeln!(out, "base={}", code.symbol(p.base));
            let _ = writeln!(out, "l={}", word_text(code, &p.ell));
            let _ = writeln!(out, "lt={}", word_text(code, &p.ell_tilde));
            let _ = writeln!(out, "L1={}", word_text(code, &p.bridge1));
            let _ = writeln!(out, "L2={}", word_text(code, &p.bridge2));
            let _ = writeln!(out, "A={} C={} K={} N={n}", p.a, p.c, p.k);
            let _ = writeln!(out, "gallery_size={}", self.gallery_size);
        }
        for t in &self.transcript {
            let _ = writeln!(out, "transcript={t}");
        }
        out
    }
}

/// Gallery size as a float, for reports.
pub fn gallery_size_f64(g: &BigUint) -> f64 {
    g.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(n: usize, labels: &[&str]) -> BlockCode {
        let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                edges.push((i, j));
            }
        }
        BlockCode::vertex_labeled(FiniteGraph::from_edges(names, &edges), labels.iter().map(|s| s.to_string()).collect())
            .unwrap()
    }

    #[test]
    fn distinct_loops() {
        let id = full(2, &["0", "1"]);
        let (l, lt) = find_image_distinct_loops(&id, 0, 4).unwrap();
        assert_eq!((l, lt), (vec![0], vec![0, 1]));
        let constant = full(2, &["x", "x"]);
        assert!(find_image_distinct_loops(&constant, 0, 6).is_err());
        let three = full(3, &["0", "0", "1"]);
        let (l, lt) = find_image_distinct_loops(&three, 0, 4).unwrap();
        assert_eq!(l, vec![0]);
        assert_eq!(lt, vec![0, 2]);
    }

    #[test]
    fn run_tracker_counts_runs() {
        let t = RunTracker { root: vec![0] };
        let (p, r) = t.step(0, 0, 0);
        assert_eq!((p, r), (0, 1));
        assert_eq!(t.step(p, r, 0), (0, 2));
        assert_eq!(t.step(0, 2, 1), (0, 0));
        let alt = RunTracker { root: vec![0, 1] };
        assert_eq!(alt.step(0, 2, 0), (0, 3));
        assert_eq!(alt.step(0, 3, 0), (0, 1));
    }

    #[test]
    fn filtered_gallery_counts() {
        // Words of length 4 starting with 0 whose 0-runs have length <= 1: 0101, 0110, 0111 ... counted by brute force.
        let code = full(2, &["0", "1"]);
        let g = filtered_gallery(&code, 0, &[0], 4, 0.25).unwrap();
        let brute = (0..8u32)
            .filter(|m| {
                let w: Vec<u32> = std::iter::once(0).chain((0..3).map(|i| (m >> (2 - i)) & 1)).collect();
                !w.windows(2).any(|p| p == [0, 0])
            })
            .count();
        assert_eq!(g.words, BigUint::from(brute));
        assert_eq!(gallery_words(&g).len(), brute);
    }

    #[test]
    fn marker_sft_periods() {
        // Two 2-cycles on a bipartite domain: period 2.
        let g = FiniteGraph::from_named_edges(&[("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"), ("b", "d"), ("d", "b")]);
        let code = BlockCode::identity(g);
        let (l, lt) = find_image_distinct_loops(&code, 0, 6).unwrap();
        let (b1, b2) = find_bridge_loops(&code, 0, 2, 6).unwrap();
        assert_eq!(b2.len(), b1.len() + 2);
        let params = MarkerParams {
            base: 0,
            ell: l,
            ell_tilde: lt,
            bridge1: b1,
            bridge2: b2,
            a: 3,
            c: 1,
            gallery: Gallery::Filtered { n: 4, zeta: 0.5 },
            k: 2,
            margin: 0,
        };
        let sub = build_marker_sft(&code, &params).unwrap();
        assert!(sub.graph.is_irreducible());
        assert_eq!(period_of_component(&sub.graph), 2);
    }

    #[test]
    fn identity_code_whole_domain() {
        let code = full(2, &["0", "1"]);
        let target = ExtendedEntropy::IntervalApprox(crate::interval::Interval::point(0.5 * 2f64.ln()));
        let cert = synthesize_injective_subsystem(&code, &target, &Budget::default(), 1e-9).unwrap();
        assert!(cert.is_valid(1, 1e-9));
    }

    #[test]
    fn target_at_image_entropy_is_rejected() {
        let code = full(3, &["0", "0", "1"]);
        let r = synthesize_injective_subsystem(&code, &ExtendedEntropy::log_int(2), &Budget::default(), 1e-9);
        assert!(matches!(r, Err(Error::PreconditionViolated(_))));
    }
}
