//! Line-oriented text documents: presentations, codes, relations, invariant
//! pairs and word lists.
//!
//! Lines end at a newline or `;`, `#` starts a comment, and a line holding
//! only `---` separates documents in one file.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::entropy::ExtendedEntropy;
use crate::error::{Error, Result};
use crate::factor::{BlockCode, SymbolRelation};
use crate::graph::FiniteGraph;
use crate::interval::Interval;
use crate::invariants::{GenCount, Generator, InvariantPair};
use crate::loops::{LoopSchema, Tail};
use crate::poly::{AlgebraicReal, Poly};
use crate::presentation::ShiftPresentation;

struct Line<'a> {
    no: usize,
    tok: Vec<&'a str>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Split into documents of non-empty tokenized lines.
fn documents(text: &str) -> Vec<Vec<Line<'_>>> {
    let mut docs = vec![Vec::new()];
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap();
        for part in body.split(';') {
            let tok: Vec<&str> = part.split_whitespace().collect();
            if tok.is_empty() {
                continue;
            }
            if tok == ["---"] {
                docs.push(Vec::new());
                continue;
            }
            docs.last_mut().unwrap().push(Line { no: i + 1, tok });
        }
    }
    docs.retain(|d| !d.is_empty());
    docs
}

/// Parse `p/q`, an integer, or a plain decimal such as `0.25` as an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let whole: BigInt = if int_digits.is_empty() { BigInt::zero() } else { int_digits.parse().ok()? };
        let frac_n: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let v = BigRational::new(whole * &scale + frac_n, scale);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

fn rational_at(line: usize, s: &str) -> Result<BigRational> {
    parse_rational(s).map_or_else(|| perr(line, format!("expected a rational, got {s:?}")), Ok)
}

fn u64_at(line: usize, s: &str) -> Result<u64> {
    s.parse().map_or_else(|_| perr(line, format!("expected a nonnegative integer, got {s:?}")), Ok)
}

fn pos_at(line: usize, s: &str) -> Result<u64> {
    match u64_at(line, s)? {
        0 => perr(line, "expected a positive integer"),
        n => Ok(n),
    }
}

fn parse_graph_lines(lines: &[Line<'_>]) -> Result<FiniteGraph> {
    let declared: Vec<&Line> = lines.iter().filter(|l| l.tok[0] == "vertex").collect();
    let mut g = FiniteGraph::new();
    let strict = !declared.is_empty();
    for l in &declared {
        if l.tok.len() != 2 {
            return perr(l.no, "expected: vertex <name>");
        }
        if g.vertex_index(l.tok[1]).is_some() {
            return perr(l.no, format!("vertex {} declared twice", l.tok[1]));
        }
        g.add_vertex(l.tok[1]);
    }
    let mut names = HashSet::new();
    for l in lines {
        match l.tok[0] {
            "vertex" => {}
            "edge" => {
                if l.tok.len() != 3 && l.tok.len() != 4 {
                    return perr(l.no, "expected: edge <from> <to> [name]");
                }
                let mut ends = [0usize; 2];
                for (k, v) in l.tok[1..3].iter().enumerate() {
                    ends[k] = match g.vertex_index(v) {
                        Some(i) => i,
                        None if strict => return perr(l.no, format!("edge endpoint {v} is not a declared vertex")),
                        None => g.add_vertex(v),
                    };
                }
                let name = l.tok.get(3).map(|s| s.to_string());
                if let Some(n) = &name {
                    if !names.insert(n.clone()) {
                        return perr(l.no, format!("edge name {n} used twice"));
                    }
                }
                g.add_edge(ends[0], ends[1], name);
            }
            other => return perr(l.no, format!("unexpected {other:?} in a graph document")),
        }
    }
    if g.vertex_count() == 0 {
        return perr(lines.first().map_or(1, |l| l.no), "empty graph");
    }
    Ok(g)
}

fn parse_loop_lines(lines: &[Line<'_>]) -> Result<LoopSchema> {
    let mut base: Option<String> = None;
    let mut explicit = BTreeMap::new();
    let mut tail: Option<Tail> = None;
    let mut last = 1;
    for l in lines {
        last = l.no;
        match l.tok[0] {
            "at" => {
                if l.tok.len() != 2 {
                    return perr(l.no, "expected: at <vertex>");
                }
                if base.is_some() {
                    return perr(l.no, "base vertex given twice");
                }
                base = Some(l.tok[1].to_string());
            }
            "count" => {
                if l.tok.len() != 3 {
                    return perr(l.no, "expected: count <n> <c>");
                }
                let n = pos_at(l.no, l.tok[1])?;
                let c = u64_at(l.no, l.tok[2])?;
                if explicit.insert(n, c).is_some() {
                    return perr(l.no, format!("count for length {n} given twice"));
                }
            }
            "tail" => {
                if tail.is_some() {
                    return perr(l.no, "only one tail is allowed");
                }
                tail = Some(parse_tail(l)?);
            }
            other => return perr(l.no, format!("unexpected {other:?} in a loops document")),
        }
    }
    let Some(base) = base else {
        return perr(last, "missing: at <vertex>");
    };
    LoopSchema::new(base, explicit, tail).map_err(|e| match e {
        Error::Invalid(msg) => Error::Parse { line: last, msg },
        e => e,
    })
}

fn parse_tail(l: &Line<'_>) -> Result<Tail> {
    let t = &l.tok;
    let (kind_len, d) = match t.get(1) {
        Some(&"geometric") => (4, None),
        Some(&"damped") => (5, Some(t.get(4).copied())),
        _ => return perr(l.no, "expected: tail geometric|damped ..."),
    };
    // tail <kind> a k [d] from n0 [step s]
    let from_at = kind_len;
    if t.len() != from_at + 2 && t.len() != from_at + 4 {
        return perr(l.no, "malformed tail line");
    }
    if t[from_at] != "from" {
        return perr(l.no, "expected 'from <n0>' in tail");
    }
    let a = rational_at(l.no, t[2])?;
    let k = rational_at(l.no, t[3])?;
    let n0 = pos_at(l.no, t[from_at + 1])?;
    let step = if t.len() == from_at + 4 {
        if t[from_at + 2] != "step" {
            return perr(l.no, "expected 'step <s>' after the tail start");
        }
        pos_at(l.no, t[from_at + 3])?
    } else {
        1
    };
    if !a.is_positive() {
        return perr(l.no, "tail coefficient must be positive");
    }
    if k <= BigRational::one() {
        return perr(l.no, "tail ratio must exceed 1");
    }
    let tail = match d {
        None => Tail::geometric(a, k, n0),
        Some(d) => {
            let d = pos_at(l.no, d.unwrap_or(""))?;
            Tail::damped(a, k, d as u32, n0)
        }
    };
    Ok(tail.with_step(step))
}

fn parse_presentation_doc(doc: &[Line<'_>]) -> Result<ShiftPresentation> {
    let head = &doc[0];
    if head.tok.len() != 1 {
        return perr(head.no, "header line must be exactly 'graph', 'loops' or 'family'");
    }
    let body = &doc[1..];
    match head.tok[0] {
        "graph" => Ok(ShiftPresentation::FiniteGraph(parse_graph_lines(body)?)),
        "loops" => Ok(ShiftPresentation::LoopSchema(parse_loop_lines(body)?)),
        "family" => {
            let s = parse_loop_lines(body)?;
            if s.tail().is_none() {
                return perr(head.no, "a family needs a tail");
            }
            Ok(ShiftPresentation::Family(s))
        }
        other => perr(head.no, format!("unknown document kind {other:?}")),
    }
}

/// Parse a file holding one or more presentation documents.
pub fn parse_presentations(text: &str) -> Result<Vec<ShiftPresentation>> {
    let docs = documents(text);
    if docs.is_empty() {
        return perr(1, "no document");
    }
    docs.iter().map(|d| parse_presentation_doc(d)).collect()
}

/// Parse exactly one presentation document.
pub fn parse_presentation(text: &str) -> Result<ShiftPresentation> {
    let mut ps = parse_presentations(text)?;
    if ps.len() != 1 {
        return perr(1, format!("expected one document, found {}", ps.len()));
    }
    Ok(ps.pop().unwrap())
}

fn write_graph(out: &mut String, g: &FiniteGraph) {
    out.push_str("graph\n");
    for v in g.vertices() {
        let _ = writeln!(out, "vertex {v}");
    }
    for e in g.edges() {
        let _ = write!(out, "edge {} {}", g.vertex_name(e.from), g.vertex_name(e.to));
        if let Some(n) = &e.name {
            let _ = write!(out, " {n}");
        }
        out.push('\n');
    }
}

/// Document text for a presentation; parses back to an equal value.
pub fn write_presentation(p: &ShiftPresentation) -> String {
    let mut out = String::new();
    match p {
        ShiftPresentation::FiniteGraph(g) => write_graph(&mut out, g),
        ShiftPresentation::LoopSchema(s) => {
            out.push_str("loops\n");
            out.push_str(&s.to_string());
        }
        ShiftPresentation::Family(s) => {
            out.push_str("family\n");
            out.push_str(&s.to_string());
        }
    }
    out
}

pub fn write_presentations(ps: &[ShiftPresentation]) -> String {
    ps.iter().map(write_presentation).collect::<Vec<_>>().join("---\n")
}

/// Parse a code document: a graph document plus `label <symbol> <output>` lines.
pub fn parse_code(text: &str) -> Result<BlockCode> {
    let docs = documents(text);
    let [doc] = docs.as_slice() else {
        return perr(1, "expected exactly one code document");
    };
    if doc[0].tok != ["graph"] {
        return perr(doc[0].no, "a code document starts with 'graph'");
    }
    let mut graph_lines = Vec::new();
    let mut labels = BTreeMap::new();
    for l in doc.iter().skip(1) {
        if l.tok[0] == "label" {
            if l.tok.len() != 3 {
                return perr(l.no, "expected: label <symbol> <output>");
            }
            if labels.insert(l.tok[1].to_string(), l.tok[2].to_string()).is_some() {
                return perr(l.no, format!("symbol {} labeled twice", l.tok[1]));
            }
        } else {
            graph_lines.push(Line { no: l.no, tok: l.tok.clone() });
        }
    }
    let g = parse_graph_lines(&graph_lines)?;
    let last = doc.last().unwrap().no;
    BlockCode::from_label_map(g, &labels).map_err(|e| match e {
        Error::Invalid(msg) => Error::Parse { line: last, msg },
        e => e,
    })
}

pub fn write_code(code: &BlockCode) -> String {
    let mut out = String::new();
    let g = code.source();
    write_graph(&mut out, g);
    if code.is_edge_mode() {
        for e in 0..g.edge_count() {
            let _ = writeln!(out, "label {} {}", g.edge_name(e), code.label(e));
        }
    } else {
        for v in 0..g.vertex_count() {
            let _ = writeln!(out, "label {} {}", g.vertex_name(v), code.label(v));
        }
    }
    out
}

/// Parse `rel <a> <b>` lines; an optional `relation` header is allowed.
pub fn parse_relation(text: &str) -> Result<SymbolRelation> {
    let mut r = SymbolRelation::equality();
    for doc in documents(text) {
        for l in doc {
            match l.tok.as_slice() {
                ["relation"] => {}
                ["rel", a, b] => r.insert(a, b),
                _ => return perr(l.no, "expected: rel <a> <b>"),
            }
        }
    }
    Ok(r)
}

pub fn write_relation(r: &SymbolRelation) -> String {
    r.pairs().map(|(a, b)| format!("rel {a} {b}\n")).collect()
}

/// A standalone entropy expression: anything a `gen` line accepts, a single
/// decimal, or `<c> log <k>` for rationals `c >= 0` and `k >= 1`.
pub fn parse_entropy(s: &str) -> Result<ExtendedEntropy> {
    let t: Vec<&str> = s.split_whitespace().collect();
    match t.as_slice() {
        [x] if *x != "inf" && *x != "0" => {
            let Ok(v) = x.parse::<f64>() else {
                return perr(1, format!("bad entropy {x:?}"));
            };
            if !(v.is_finite() && v >= 0.0) {
                return perr(1, "entropy must be finite and nonnegative");
            }
            Ok(if v == 0.0 { ExtendedEntropy::Zero } else { ExtendedEntropy::IntervalApprox(Interval::point(v)) })
        }
        [c, "log", k] => {
            let c = rational_at(1, c)?;
            let k = rational_at(1, k)?;
            if c.is_negative() || k < BigRational::one() {
                return perr(1, "expected c >= 0 and k >= 1 in <c> log <k>");
            }
            if c.is_zero() || k.is_one() {
                return Ok(ExtendedEntropy::Zero);
            }
            // (p/q) ln k = (1/q) ln(k^p)
            let p: u32 = match c.numer().try_into() {
                Ok(p) if p <= 64 => p,
                _ => return perr(1, "coefficient numerator too large"),
            };
            let q: u32 = match c.denom().try_into() {
                Ok(q) if q <= 64 => q,
                _ => return perr(1, "coefficient denominator too large"),
            };
            let kp = BigRational::new(k.numer().pow(p), k.denom().pow(p));
            Ok(ExtendedEntropy::log_rational_root(&kp, q))
        }
        _ => parse_entropy_expr(1, &t),
    }
}

fn parse_entropy_expr(no: usize, t: &[&str]) -> Result<ExtendedEntropy> {
    match t {
        ["inf"] => Ok(ExtendedEntropy::Infinity),
        ["0"] => Ok(ExtendedEntropy::Zero),
        ["log", k] => {
            let k = rational_at(no, k)?;
            if k < BigRational::one() {
                return perr(no, "log argument must be at least 1");
            }
            Ok(if k.is_one() { ExtendedEntropy::Zero } else { ExtendedEntropy::ExactAlgebraic(AlgebraicReal::rational(k)) })
        }
        ["poly", rest @ ..] => {
            let Some(split) = rest.iter().position(|s| *s == "root-in") else {
                return perr(no, "expected: poly <coefficients> root-in <lo> <hi>");
            };
            let (cs, bounds) = (&rest[..split], &rest[split + 1..]);
            if cs.len() < 2 || bounds.len() != 2 {
                return perr(no, "expected: poly <coefficients> root-in <lo> <hi>");
            }
            let mut c = Vec::with_capacity(cs.len());
            for s in cs.iter().rev() {
                match s.parse::<BigInt>() {
                    Ok(v) => c.push(v),
                    Err(_) => return perr(no, format!("bad coefficient {s:?}")),
                }
            }
            let poly = Poly::new(c);
            let lo = rational_at(no, bounds[0])?;
            let hi = rational_at(no, bounds[1])?;
            let root = if lo == hi {
                if poly.sign_at(&lo) != std::cmp::Ordering::Equal {
                    return perr(no, "polynomial does not vanish at the given point");
                }
                AlgebraicReal::rational(lo)
            } else {
                match AlgebraicReal::isolate(&poly, lo, hi) {
                    Some(r) => r,
                    None => return perr(no, "interval does not isolate exactly one root"),
                }
            };
            Ok(ExtendedEntropy::from_growth(root))
        }
        [lo, hi] => {
            let (Ok(lo), Ok(hi)) = (lo.parse::<f64>(), hi.parse::<f64>()) else {
                return perr(no, "expected a decimal interval <lo> <hi>");
            };
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return perr(no, "entropy interval must satisfy 0 <= lo <= hi");
            }
            Ok(if hi == 0.0 { ExtendedEntropy::Zero } else { ExtendedEntropy::IntervalApprox(Interval::new(lo, hi)) })
        }
        _ => perr(no, "unrecognized entropy expression"),
    }
}

/// Parse `gen <p> <entropy> <count|unattained>` lines into canonical form.
pub fn parse_invariants(text: &str, tol: f64) -> Result<InvariantPair> {
    let mut gens = Vec::new();
    for doc in documents(text) {
        for l in doc {
            match l.tok[0] {
                "invariants" if l.tok.len() == 1 => continue,
                "gen" if l.tok.len() >= 4 => {}
                _ => return perr(l.no, "expected: gen <p> <entropy> <count|unattained>"),
            }
            let p = pos_at(l.no, l.tok[1])?;
            let last = *l.tok.last().unwrap();
            let count = if last == "unattained" { GenCount::Unattained } else { GenCount::Count(u64_at(l.no, last)?) };
            let h = parse_entropy_expr(l.no, &l.tok[2..l.tok.len() - 1])?;
            gens.push(Generator { p, h, count });
        }
    }
    InvariantPair::from_generators(gens, tol)
}

pub fn write_invariants(pair: &InvariantPair) -> String {
    pair.generators().iter().map(|g| format!("gen {} {} {}\n", g.p, g.h.to_doc(), g.count)).collect()
}

/// Parse a word list: `word <w>` lines over single-character symbols, with
/// an optional `words` header.
pub fn parse_words(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for doc in documents(text) {
        for l in doc {
            match l.tok.as_slice() {
                ["words"] => {}
                ["word", w] => out.push(w.to_string()),
                _ => return perr(l.no, "expected: word <w>"),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyOrdering;

    #[test]
    fn spec_examples_parse() {
        match parse_presentation("graph; edge a a").unwrap() {
            ShiftPresentation::FiniteGraph(g) => assert_eq!((g.vertex_count(), g.edge_count()), (1, 1)),
            _ => panic!(),
        }
        let s = parse_presentation("loops; at v; count 1 2; tail geometric 1/2 2 from 2").unwrap();
        let ShiftPresentation::LoopSchema(s) = s else { panic!() };
        assert_eq!(s.count(1), 2.into());
        assert_eq!(s.count(3), 4.into());
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_presentation("graph\nvertex a\nedge a b\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, msg: "edge endpoint b is not a declared vertex".into() });
        let e = parse_presentation("loops\nat v\ncount 3 1\ntail geometric 1 2 from 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
        assert!(matches!(parse_presentation("graph\nedge a\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_presentation("blob\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn round_trips() {
        let texts = [
            "graph\nedge a a\nedge a b x\nedge b a\n",
            "loops\nat v\ncount 1 2\ncount 4 0\ntail damped 1/3 5/2 2 from 3 step 2\n",
            "family\nat w\ntail geometric 1 3 from 1\n",
        ];
        for t in texts {
            let p = parse_presentation(t).unwrap();
            assert_eq!(parse_presentation(&write_presentation(&p)).unwrap(), p);
        }
        let multi = parse_presentations(texts.join("---\n").as_str()).unwrap();
        assert_eq!(multi.len(), 3);
        assert_eq!(parse_presentations(&write_presentations(&multi)).unwrap(), multi);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/6"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_rational("0.25"), Some(BigRational::new(1.into(), 4.into())));
        assert_eq!(parse_rational("-1.5"), Some(BigRational::new((-3).into(), 2.into())));
        assert_eq!(parse_rational("7"), Some(BigRational::from_integer(7.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn codes_and_relations() {
        let code = parse_code("graph; edge a a; edge a b; edge b a; label a x; label b y").unwrap();
        assert!(!code.is_edge_mode());
        assert_eq!(parse_code(&write_code(&code)).unwrap(), code);
        let edge = parse_code("graph; edge a a e0; edge a b e1; edge b a e2; label e0 1; label e1 0; label e2 0").unwrap();
        assert!(edge.is_edge_mode());
        assert_eq!(edge.domain().vertex_count(), 3);
        assert_eq!(parse_code(&write_code(&edge)).unwrap(), edge);
        assert!(parse_code("graph; edge a a; label a x; label b y").is_err());
        let r = parse_relation("rel a b; rel b a; rel c c").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(parse_relation(&write_relation(&r)).unwrap(), r);
    }

    #[test]
    fn invariant_documents() {
        let pair = parse_invariants(
            "gen 1 log 2 1\ngen 2 poly 1 -1 -1 root-in 1 2 0\ngen 3 0.5 0.5000000001 unattained\n",
            1e-9,
        )
        .unwrap();
        let back = parse_invariants(&write_invariants(&pair), 1e-9).unwrap();
        let v = crate::invariants::decide_almost_borel_iso(&pair, &back, 1e-9).unwrap();
        assert!(v.isomorphic);
        let q = parse_invariants("gen 1 poly 2 -3 root-in 3/2 3/2 1", 1e-9).unwrap();
        let h = &q.generators()[0].h;
        assert_eq!(h.compare(&ExtendedEntropy::IntervalApprox(Interval::point(1.5f64.ln())), 1e-12), EntropyOrdering::Equal);
        assert!(parse_invariants("gen 1 poly 1 0 -2 root-in 2 3 1", 1e-9).is_err());
        assert!(parse_invariants("gen 0 log 2 1", 1e-9).is_err());
    }

    #[test]
    fn word_lists() {
        assert_eq!(parse_words("words; word 01; word 1 # tail\n").unwrap(), vec!["01", "1"]);
        assert!(parse_words("word").is_err());
    }
}
