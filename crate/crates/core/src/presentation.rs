//! Presentations of Markov shifts and per-component summaries.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::entropy::ExtendedEntropy;
use crate::error::{invalid, Result};
use crate::graph::{self, FiniteGraph};
use crate::interval::Interval;
use crate::loops::{schema_loop_counts, to_rows, LoopCount, LoopSchema, Recurrence};
use crate::perron::perron_entropy;

/// A finitely described Markov shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShiftPresentation {
    FiniteGraph(FiniteGraph),
    LoopSchema(LoopSchema),
    /// The countable disjoint union of the finite truncations of a schema.
    /// Its component entropies increase to the schema's entropy without
    /// reaching it.
    Family(LoopSchema),
}

/// One irreducible component's contribution to the invariants.
#[derive(Clone, Debug)]
pub struct ComponentSummary {
    pub source: String,
    pub period: u64,
    pub entropy: ExtendedEntropy,
    pub mme: bool,
    pub recurrence: Recurrence,
    /// The entropy is a supremum over infinitely many components, none of
    /// which attains it.
    pub limit: bool,
}

impl ShiftPresentation {
    pub fn kind(&self) -> &'static str {
        match self {
            ShiftPresentation::FiniteGraph(_) => "graph",
            ShiftPresentation::LoopSchema(_) => "loops",
            ShiftPresentation::Family(_) => "family",
        }
    }
}

/// Irreducible pieces: strongly connected subgraphs with a cycle for a graph;
/// schemas are irreducible and come back unchanged.
pub fn irreducible_components(p: &ShiftPresentation) -> Vec<(String, ShiftPresentation)> {
    match p {
        ShiftPresentation::FiniteGraph(g) => graph::irreducible_components(g)
            .into_iter()
            .map(|c| (c.id, ShiftPresentation::FiniteGraph(c.graph)))
            .collect(),
        ShiftPresentation::LoopSchema(s) => vec![(format!("loops:{}", s.base()), p.clone())],
        ShiftPresentation::Family(s) => vec![(format!("family:{}", s.base()), p.clone())],
    }
}

/// Summaries of every component that is not a single cycle.
pub fn summarize_components(p: &ShiftPresentation) -> Result<Vec<ComponentSummary>> {
    let mut out = Vec::new();
    match p {
        ShiftPresentation::FiniteGraph(g) => {
            for c in graph::irreducible_components(g) {
                if c.graph.is_single_cycle() {
                    continue;
                }
                let entropy = perron_entropy(&c.graph);
                let mme = !entropy.is_zero();
                out.push(ComponentSummary {
                    source: c.id,
                    period: graph::period_of_component(&c.graph),
                    entropy,
                    mme,
                    recurrence: Recurrence::PositiveRecurrent,
                    limit: false,
                });
            }
        }
        ShiftPresentation::LoopSchema(s) => {
            if s.total_loops() == Some(1) {
                return Ok(out);
            }
            let c = s.classify()?;
            out.push(ComponentSummary {
                source: format!("loops:{}", s.base()),
                period: c.period,
                entropy: c.entropy,
                mme: c.mme,
                recurrence: c.recurrence,
                limit: false,
            });
        }
        ShiftPresentation::Family(s) => {
            if s.tail().is_none() {
                return invalid("a family needs a schema with a tail");
            }
            let c = s.classify()?;
            out.push(ComponentSummary {
                source: format!("family:{}", s.base()),
                period: c.period,
                entropy: c.entropy,
                mme: false,
                recurrence: c.recurrence,
                limit: true,
            });
        }
    }
    Ok(out)
}

/// Summaries of several presentations taken as one disjoint union.
pub fn summarize_all(ps: &[ShiftPresentation]) -> Result<Vec<ComponentSummary>> {
    let mut out = Vec::new();
    for (i, p) in ps.iter().enumerate() {
        for mut s in summarize_components(p)? {
            if ps.len() > 1 {
                s.source = format!("{i}/{}", s.source);
            }
            out.push(s);
        }
    }
    Ok(out)
}

/// Numbers of closed paths of each length `1..=l_max` through `base`.
pub fn entropy_by_loop_count(p: &ShiftPresentation, base: &str, l_max: usize) -> Result<Vec<LoopCount>> {
    match p {
        ShiftPresentation::FiniteGraph(g) => {
            let Some(b) = g.vertex_index(base) else {
                return invalid(format!("unknown base vertex {base}"));
            };
            if !g.scc_with_cycles().iter().any(|c| c.contains(&b)) {
                return invalid(format!("base vertex {base} is not on any cycle"));
            }
            Ok(graph_loop_counts(g, b, l_max))
        }
        ShiftPresentation::LoopSchema(s) | ShiftPresentation::Family(s) => {
            if s.base() != base {
                return invalid(format!("schema base is {}, not {base}", s.base()));
            }
            Ok(schema_loop_counts(s, l_max))
        }
    }
}

/// Closed-walk counts at `b`, by propagating path counts edge by edge.
pub fn graph_loop_counts(g: &FiniteGraph, b: usize, l_max: usize) -> Vec<LoopCount> {
    let n = g.vertex_count();
    let mut cur = vec![BigUint::zero(); n];
    cur[b] = BigUint::one();
    let mut counts = vec![BigUint::one()];
    for _ in 0..l_max {
        let mut next = vec![BigUint::zero(); n];
        for e in g.edges() {
            if !cur[e.from].is_zero() {
                next[e.to] += &cur[e.from];
            }
        }
        counts.push(next[b].clone());
        cur = next;
    }
    to_rows(counts)
}

impl ComponentSummary {
    pub fn entropy_interval(&self) -> Option<Interval> {
        self.entropy.enclosure()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle_counts() {
        let g = FiniteGraph::from_named_edges(&[("a", "b"), ("b", "c"), ("c", "a")]);
        let rows = entropy_by_loop_count(&ShiftPresentation::FiniteGraph(g), "a", 9).unwrap();
        for r in rows {
            let expect = if r.n % 3 == 0 { 1u32 } else { 0 };
            assert_eq!(r.count, BigUint::from(expect));
        }
    }

    #[test]
    fn full_two_shift_rates_increase_to_log2() {
        let g = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]);
        let rows = entropy_by_loop_count(&ShiftPresentation::FiniteGraph(g), "a", 10).unwrap();
        let rates: Vec<f64> = rows.iter().map(|r| r.rate.unwrap()).collect();
        assert!(rates.windows(2).all(|w| w[0] <= w[1]));
        assert!(rates.iter().all(|&r| r <= 2f64.ln() + 1e-12));
        assert!((rates[9] - 2f64.ln()).abs() < 0.1);
    }

    #[test]
    fn base_must_be_on_a_cycle() {
        let g = FiniteGraph::from_named_edges(&[("a", "b"), ("b", "b")]);
        assert!(entropy_by_loop_count(&ShiftPresentation::FiniteGraph(g), "a", 5).is_err());
    }

    #[test]
    fn summaries_drop_single_cycles() {
        let g = FiniteGraph::from_named_edges(&[("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x")]);
        assert!(summarize_components(&ShiftPresentation::FiniteGraph(g)).unwrap().is_empty());
        let golden = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]);
        let s = summarize_components(&ShiftPresentation::FiniteGraph(golden)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].period, 1);
        assert!(s[0].mme);
    }
}
