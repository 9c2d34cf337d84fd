use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use shiftclass_core::doc::{parse_presentation, write_presentation};
use shiftclass_core::{LoopSchema, PhiValue, ShiftPresentation, Tail};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn schemas() -> impl Strategy<Value = LoopSchema> {
    let explicit = prop::collection::btree_map(1u64..=4, 1u64..=3, 0..3);
    let tail = prop_oneof![
        Just(None),
        (1i64..=3, 1i64..=3, 2i64..=3).prop_map(|(a, b, k)| Some(Tail::geometric(q(a, b), q(k, 1), 5))),
        (1i64..=3, 2i64..=4, 2i64..=3, 1u32..=3).prop_map(|(a, b, k, d)| Some(Tail::damped(q(a, b), q(k, 1), d, 5))),
    ];
    (explicit, tail)
        .prop_filter("needs a loop", |(e, t): &(BTreeMap<u64, u64>, Option<Tail>)| !e.is_empty() || t.is_some())
        .prop_map(|(e, t)| LoopSchema::new("v", e, t).unwrap())
}

fn finite(p: PhiValue) -> Option<shiftclass_core::Interval> {
    match p {
        PhiValue::Finite(i) => Some(i),
        PhiValue::Infinity => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_increases_below_the_radius(s in schemas(), a in 1u32..50, b in 1u32..50) {
        prop_assume!(a != b);
        let (lo, hi) = (a.min(b), a.max(b));
        // Points in (0, R) with R >= 1/3 for every generated tail.
        let x1 = q(lo as i64, 160);
        let x2 = q(hi as i64, 160);
        let (Some(p1), Some(p2)) = (finite(s.phi(&x1)), finite(s.phi(&x2))) else {
            return Ok(());
        };
        // Disjoint and ordered, or overlapping with ordered midpoints.
        prop_assert!(p1.hi() < p2.lo() || (p1.lo() <= p2.hi() && p1.mid() < p2.mid()), "phi({x1}) = {p1}, phi({x2}) = {p2}");
    }

    #[test]
    fn schema_documents_round_trip(s in schemas()) {
        let p = ShiftPresentation::LoopSchema(s);
        prop_assert_eq!(parse_presentation(&write_presentation(&p)).unwrap(), p);
    }
}

#[test]
fn classification_of_finite_schemas_matches_roots() {
    // Phi(x) = 2x: root 1/2.
    let s = LoopSchema::finite("v", &[(1, 2)]).unwrap();
    let c = s.classify().unwrap();
    assert!((c.entropy.approx() - 2f64.ln()).abs() < 1e-9);
    // Phi(x) = x + x^2: golden mean.
    let s = LoopSchema::finite("v", &[(1, 1), (2, 1)]).unwrap();
    let c = s.classify().unwrap();
    assert!((c.entropy.approx() - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-9);
}
