use proptest::prelude::*;

use shiftclass_core::doc::{parse_presentations, write_presentations};
use shiftclass_core::invariants::compute_u_eta;
use shiftclass_core::{
    decide_almost_borel_iso, summarize_all, EntropyOrdering, FiniteGraph, InvariantPair, ShiftPresentation,
};

const TOL: f64 = 1e-9;

const PIECES: &[&str] = &[
    "graph; edge a a; edge a b; edge b a",
    "graph; edge a a; edge a b; edge b a; edge b b",
    "graph; edge a b; edge b a; edge a c; edge c a",
    "graph; edge a b; edge b c; edge c a; edge a d; edge d e; edge e a",
    "graph; edge a b; edge b c; edge c a",
    "loops; at s; count 1 3",
    "loops; at s; count 2 2",
    "loops; at s; tail damped 1/3 2 2 from 1",
    "loops; at s; tail geometric 1/2 2 from 1",
];

fn pair(ps: &[ShiftPresentation]) -> InvariantPair {
    compute_u_eta(&summarize_all(ps).unwrap(), TOL).unwrap()
}

fn iso(a: &[ShiftPresentation], b: &[ShiftPresentation]) -> bool {
    decide_almost_borel_iso(&pair(a), &pair(b), TOL).unwrap().isomorphic
}

fn renamed(p: &ShiftPresentation, tag: &str) -> ShiftPresentation {
    match p {
        ShiftPresentation::FiniteGraph(g) => ShiftPresentation::FiniteGraph(g.renamed(|v| format!("{tag}{v}"))),
        ShiftPresentation::LoopSchema(s) => ShiftPresentation::LoopSchema(s.with_base(format!("{tag}{}", s.base()))),
        ShiftPresentation::Family(s) => ShiftPresentation::Family(s.with_base(format!("{tag}{}", s.base()))),
    }
}

/// Disjoint union of graphs as one graph.
fn union(gs: &[&FiniteGraph]) -> FiniteGraph {
    let mut out = FiniteGraph::new();
    for (i, g) in gs.iter().enumerate() {
        let base = out.vertex_count();
        for v in g.vertices() {
            out.add_vertex(&format!("{i}.{v}"));
        }
        for e in g.edges() {
            out.add_edge(base + e.from, base + e.to, None);
        }
    }
    out
}

fn selection() -> impl Strategy<Value = Vec<ShiftPresentation>> {
    prop::collection::vec(0..PIECES.len(), 1..5)
        .prop_map(|ix| ix.into_iter().map(|i| parse_presentations(PIECES[i]).unwrap().remove(0)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shuffles_do_not_change_the_verdict(ps in selection(), seed in any::<u64>()) {
        let mut shuffled: Vec<ShiftPresentation> =
            ps.iter().enumerate().map(|(i, p)| renamed(p, &format!("r{i}_"))).collect();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert!(iso(&ps, &shuffled));
        // Through the document format as well.
        let reparsed = parse_presentations(&write_presentations(&shuffled)).unwrap();
        prop_assert!(iso(&ps, &reparsed));
    }

    #[test]
    fn splitting_a_graph_into_documents(ps in selection()) {
        let graphs: Vec<&FiniteGraph> = ps.iter().filter_map(|p| match p {
            ShiftPresentation::FiniteGraph(g) => Some(g),
            _ => None,
        }).collect();
        prop_assume!(!graphs.is_empty());
        let joined = vec![ShiftPresentation::FiniteGraph(union(&graphs))];
        let split: Vec<ShiftPresentation> = graphs.iter().map(|g| ShiftPresentation::FiniteGraph((*g).clone())).collect();
        prop_assert!(iso(&joined, &split));
    }

    #[test]
    fn u_bar_monotone_under_divisibility(ps in selection()) {
        let pr = pair(&ps);
        for p in 1..=12u64 {
            for q in (1..=p).filter(|q| p % q == 0) {
                let (uq, up) = (pr.u_bar(q, TOL).unwrap(), pr.u_bar(p, TOL).unwrap());
                prop_assert_ne!(uq.compare(&up, TOL), EntropyOrdering::Greater, "u({}) > u({})", q, p);
            }
        }
    }

    #[test]
    fn eta_bar_vanishes_off_generators(ps in selection()) {
        let pr = pair(&ps);
        let gens = pr.periods();
        for p in 1..=12u64 {
            if !gens.contains(&p) {
                prop_assert_eq!(pr.eta_bar(p), 0);
            }
        }
    }
}
