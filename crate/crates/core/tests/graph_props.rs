use proptest::prelude::*;

use shiftclass_core::graph::irreducible_components;
use shiftclass_core::{cyclic_classes, perron_entropy, period_of_component, EntropyOrdering, FiniteGraph};

fn build(n: usize, mask: &[bool]) -> FiniteGraph {
    let names = (0..n).map(|i| format!("v{i}")).collect();
    let edges: Vec<(usize, usize)> =
        (0..n * n).filter(|&k| mask[k]).map(|k| (k / n, k % n)).collect();
    FiniteGraph::from_edges(names, &edges)
}

fn graphs() -> impl Strategy<Value = FiniteGraph> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec(any::<bool>(), n * n).prop_map(move |m| build(n, &m)))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lengths of closed walks at vertex 0 up to `max`, by boolean matrix powers.
fn closed_walk_lengths(g: &FiniteGraph, max: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let mut cur = vec![false; n];
    cur[0] = true;
    let mut out = Vec::new();
    for len in 1..=max {
        let mut next = vec![false; n];
        for e in g.edges() {
            if cur[e.from] {
                next[e.to] = true;
            }
        }
        if next[0] {
            out.push(len);
        }
        cur = next;
    }
    out
}

proptest! {
    #[test]
    fn entropy_between_row_sums(g in graphs()) {
        for c in irreducible_components(&g) {
            let a = c.graph.adjacency();
            let sums: Vec<u64> = a.iter().map(|r| r.iter().sum()).collect();
            let (lo, hi) = (*sums.iter().min().unwrap() as f64, *sums.iter().max().unwrap() as f64);
            let e = perron_entropy(&c.graph).enclosure().unwrap();
            prop_assert!(e.hi().exp() >= lo - 1e-9 && e.lo().exp() <= hi + 1e-9, "{e} vs [{lo}, {hi}]");
        }
    }

    #[test]
    fn period_divides_cycle_lengths(g in graphs()) {
        for c in irreducible_components(&g) {
            let p = period_of_component(&c.graph);
            let lens = closed_walk_lengths(&c.graph, 2 * c.graph.vertex_count() * c.graph.vertex_count());
            prop_assert!(lens.iter().all(|&l| l as u64 % p == 0));
            // The period is attained: closed walks have gcd exactly p.
            prop_assert_eq!(lens.iter().fold(0u64, |a, &l| gcd(a, l as u64)), p);
        }
    }

    #[test]
    fn cyclic_classes_follow_edges(g in graphs()) {
        for c in irreducible_components(&g) {
            let p = period_of_component(&c.graph);
            let classes = cyclic_classes(&c.graph, p);
            let mut class_of = vec![usize::MAX; c.graph.vertex_count()];
            for (i, cl) in classes.iter().enumerate() {
                for &v in cl {
                    class_of[v] = i;
                }
            }
            prop_assert!(class_of.iter().all(|&x| x != usize::MAX));
            for e in c.graph.edges() {
                prop_assert_eq!(class_of[e.to], (class_of[e.from] + 1) % p as usize);
            }
        }
    }

    #[test]
    fn deleting_an_edge_never_raises_entropy(g in graphs(), pick in any::<prop::sample::Index>()) {
        prop_assume!(g.edge_count() > 0);
        let drop = pick.index(g.edge_count());
        let edges: Vec<(usize, usize)> = g.edges().iter().enumerate()
            .filter(|&(i, _)| i != drop)
            .map(|(_, e)| (e.from, e.to))
            .collect();
        let h = FiniteGraph::from_edges(g.vertices().to_vec(), &edges);
        let before = perron_entropy(&g);
        let after = perron_entropy(&h);
        prop_assert_ne!(after.compare(&before, 1e-9), EntropyOrdering::Greater);
    }
}
