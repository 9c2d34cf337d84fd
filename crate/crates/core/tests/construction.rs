//! Re-verification of marker certificates and pathology truncations.

use shiftclass_core::doc::{parse_code, parse_entropy, write_code};
use shiftclass_core::factor::check_injective;
use shiftclass_core::markers::{build_marker_sft, synthesize_injective_subsystem, Budget};
use shiftclass_core::pathology::{build_pathology_graph, certify_pathology, Language, PathologySpec};
use shiftclass_core::{perron_entropy, period_of_component, BlockCode, EntropyOrdering, FiniteGraph};

const TOL: f64 = 1e-9;

fn three_shift() -> BlockCode {
    parse_code(
        "graph; edge a a; edge a b; edge a c; edge b a; edge b b; edge b c; edge c a; edge c b; edge c c
         label a 0; label b 0; label c 1",
    )
    .unwrap()
}

#[test]
fn certificates_reverify_and_bound_holds() {
    let code = three_shift();
    let target = parse_entropy("1/2 log 2").unwrap();
    let cert = synthesize_injective_subsystem(&code, &target, &Budget::default(), TOL).unwrap();
    let sub = &cert.subsystem;
    assert_eq!(period_of_component(&sub.graph), cert.period);
    assert_eq!(perron_entropy(&sub.graph).compare(&cert.entropy, TOL), EntropyOrdering::Equal);
    assert_eq!(check_injective(&code, sub).injective, cert.injectivity.injective);
    assert!(cert.is_valid(1, TOL));
    if cert.params.is_some() {
        assert!(cert.lower_bound <= cert.entropy.enclosure().unwrap().hi() + 1e-12);
    }
}

#[test]
fn more_gallery_slots_never_lower_entropy() {
    let code = three_shift();
    let target = parse_entropy("1/2 log 2").unwrap();
    let cert = synthesize_injective_subsystem(&code, &target, &Budget::default(), TOL).unwrap();
    let params = cert.params.expect("the 3-shift code is not injective, so markers are built");
    let mut last = f64::NEG_INFINITY;
    for k in 1..=params.k + 2 {
        let p = shiftclass_core::markers::MarkerParams { k, ..params.clone() };
        let sub = build_marker_sft(&code, &p).unwrap();
        let h = perron_entropy(&sub.graph).enclosure().unwrap().mid();
        assert!(h >= last - 1e-12, "K = {k}: {h} < {last}");
        last = h;
    }
}

#[test]
fn whole_domain_when_already_injective() {
    let g = FiniteGraph::from_named_edges(&[("a", "a"), ("a", "b"), ("b", "a")]);
    let code = BlockCode::vertex_labeled(g, vec!["0".into(), "1".into()]).unwrap();
    let target = parse_entropy("0.3").unwrap();
    let cert = synthesize_injective_subsystem(&code, &target, &Budget::default(), TOL).unwrap();
    assert!(cert.params.is_none());
    assert_eq!(cert.subsystem.graph.vertex_count(), 2);
    let err = synthesize_injective_subsystem(&code, &parse_entropy("0.5").unwrap(), &Budget::default(), TOL);
    assert!(err.is_err());
}

fn full_two_language(depth: usize) -> Language {
    let g = FiniteGraph::from_named_edges(&[("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]);
    let code = BlockCode::vertex_labeled(g, vec!["0".into(), "1".into()]).unwrap();
    Language::from_code(&code, depth).unwrap()
}

#[test]
fn longer_waits_lower_the_loop_estimate() {
    let y = full_two_language(3);
    let specs = [
        PathologySpec { epsilon: 0.5, n_seq: vec![1, 2], m_seq: vec![3, 5], big_m: 2, depth: 3 },
        PathologySpec { epsilon: 0.5, n_seq: vec![1, 2], m_seq: vec![5, 7], big_m: 4, depth: 3 },
        PathologySpec { epsilon: 0.5, n_seq: vec![1, 2], m_seq: vec![9, 11], big_m: 8, depth: 3 },
    ];
    let mut last = f64::INFINITY;
    for spec in &specs {
        let pg = build_pathology_graph(&y, spec).unwrap();
        let r = certify_pathology(&pg, &y, spec, 40);
        assert!(r.counts_agree && r.block_lengths_ok && r.concatenation_ok);
        assert!(r.estimate <= last + 1e-12, "{} after {last}", r.estimate);
        last = r.estimate;
    }
}

#[test]
fn pathology_graph_document_round_trips() {
    let y = full_two_language(2);
    let spec = PathologySpec { epsilon: 0.5, n_seq: vec![1, 2], m_seq: vec![3, 5], big_m: 2, depth: 2 };
    let pg = build_pathology_graph(&y, &spec).unwrap();
    let text = write_code(&pg.code);
    let back = parse_code(&text).unwrap();
    assert_eq!(back.source(), pg.code.source());
    assert_eq!(back.labels(), pg.code.labels());
    let blocks: Vec<usize> = certify_pathology(&pg, &y, &spec, 30).block_lengths.into_iter().collect();
    assert!(blocks.iter().all(|&b| b == 3 || b == 5 || b % 2 == 0), "{blocks:?}");
}
