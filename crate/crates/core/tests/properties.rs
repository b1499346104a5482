//! Randomized invariants over the arithmetic, ordering, and metric layers.

use proptest::prelude::*;

use antisym::encoder;
use antisym::hamel::{HamelVector, Label};
use antisym::rationals::{self, Rational};

fn arb_label() -> impl Strategy<Value = Label> {
    // canonical: empty or ending in '1'
    prop_oneof![
        Just(Label::parse("").unwrap()),
        proptest::collection::vec(any::<bool>(), 0..6).prop_map(|bits| {
            let mut text: String =
                bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            text.push('1');
            Label::parse(&text).unwrap()
        }),
    ]
}

fn arb_vector() -> impl Strategy<Value = HamelVector> {
    proptest::collection::vec((arb_label(), 0u64..12), 0..4)
        .prop_map(|terms| {
            HamelVector::from_terms(
                terms
                    .into_iter()
                    .map(|(l, j)| (l, rationals::enumerate_u64(j))),
            )
        })
}

proptest! {
    #[test]
    fn enumeration_round_trips(j in 0u64..20_000) {
        let q = rationals::enumerate_u64(j);
        prop_assert_eq!(rationals::index_of(&q).unwrap().to_u64(), Some(j));
    }

    #[test]
    fn label_order_matches_padded_strings(a in arb_label(), b in arb_label()) {
        let len = a.len().max(b.len());
        let pa = a.restrict(len as u32);
        let pb = b.restrict(len as u32);
        prop_assert_eq!(a.cmp(&b), pa.cmp(&pb));
    }

    #[test]
    fn addition_commutes(a in arb_vector(), b in arb_vector()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
    }

    #[test]
    fn addition_associates(a in arb_vector(), b in arb_vector(), c in arb_vector()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn subtraction_is_negated_addition(a in arb_vector(), b in arb_vector()) {
        prop_assert_eq!(a.sub(&b), a.add(&b.negate()));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn code_distance_is_an_ultrametric(
        a in arb_vector(),
        b in arb_vector(),
        c in arb_vector(),
    ) {
        let ea = encoder::encode_up_to(&a, 20).unwrap();
        let eb = encoder::encode_up_to(&b, 20).unwrap();
        let ec = encoder::encode_up_to(&c, 20).unwrap();
        let ab = encoder::distance(&ea, &eb);
        let bc = encoder::distance(&eb, &ec);
        let ac = encoder::distance(&ea, &ec);
        let bound = if ab < bc { bc } else { ab };
        prop_assert!(ac <= bound);
        prop_assert_eq!(encoder::distance(&ea, &ea), Rational::zero());
    }

    #[test]
    fn comparison_sets_grow_with_the_threshold(
        i in 0u32..16,
        a in 0u64..200,
        b in 0u64..200,
    ) {
        let qa = rationals::enumerate_u64(a);
        let qb = rationals::enumerate_u64(b);
        let (lo, hi) = if qa < qb { (qa, qb) } else { (qb, qa) };
        let small = rationals::k_set(i, &lo);
        let large = rationals::k_set(i, &hi);
        prop_assert_eq!(small.mask() & large.mask(), small.mask());
    }
}
