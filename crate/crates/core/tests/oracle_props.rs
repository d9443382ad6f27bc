//! Property tests for the shared oracle layer and the coding round trips.

use proptest::prelude::*;

use isocode_core::gen::{build_order, build_stream, GenDescriptor};
use isocode_core::lo::{decode_payload, encode_order, recover_base_order};
use isocode_core::oracles::{
    check_order_axioms, decode_order, join, order_code, pair, unpair, BitStream,
};

fn seeded_order(kind_index: u8, seed: u64) -> isocode_core::LinearOrderOracle {
    let kinds = ["omega", "parity-magnitude", "reverse-parity", "zeta", "block-shuffle"];
    let kind = kinds[kind_index as usize % kinds.len()];
    let mut desc = GenDescriptor::with_seed(kind, seed);
    if kind == "block-shuffle" {
        desc.params = Some(serde_json::json!({"block": 1 + (seed % 7)}));
    }
    build_order(&desc).unwrap()
}

proptest! {
    #[test]
    fn pairing_is_a_bijection(k in 0u64..1_000_000) {
        let (m, n) = unpair(k);
        prop_assert_eq!(pair(m, n), k);
    }

    #[test]
    fn pairing_inverts_pairs(m in 0u64..30_000, n in 0u64..30_000) {
        prop_assert_eq!(unpair(pair(m, n)), (m, n));
    }

    #[test]
    fn join_projects_onto_parts(seed_a in any::<u64>(), seed_b in any::<u64>(), n in 0u64..500) {
        let a = build_stream(&GenDescriptor::with_seed("random", seed_a)).unwrap();
        let b = build_stream(&GenDescriptor::with_seed("random", seed_b)).unwrap();
        let joined = join(&a, &b);
        prop_assert_eq!(joined.query(2 * n), a.query(n));
        prop_assert_eq!(joined.query(2 * n + 1), b.query(n));
        prop_assert_eq!(joined.even_part().query(n), a.query(n));
        prop_assert_eq!(joined.odd_part().query(n), b.query(n));
    }

    #[test]
    fn order_codes_invert(kind in 0u8..5, seed in any::<u64>(), m in 0u64..60, n in 0u64..60) {
        let order = seeded_order(kind, seed);
        let decoded = decode_order(&order_code(&order));
        prop_assert_eq!(decoded.leq(m, n), order.leq(m, n));
    }

    #[test]
    fn lo_coding_round_trips(kind in 0u8..5, seed in any::<u64>(), payload_seed in any::<u64>()) {
        let base = seeded_order(kind, seed);
        let payload = build_stream(&GenDescriptor::with_seed("random", payload_seed)).unwrap();
        let (encoded, f) = encode_order(&base, &payload);

        // The coded stream is the payload joined with the base's code.
        let coded = join(&payload, &order_code(&base));
        for i in 0..64 {
            prop_assert_eq!(decode_payload(&encoded, i), coded.query(i));
        }
        // Swap map is an involution pairing 2n with 2n+1.
        for i in 0..128u64 {
            prop_assert_eq!(f.apply(f.apply(i)), i);
            prop_assert_eq!(f.apply(i) >> 1, i >> 1);
        }
        // The base order comes back out.
        let recovered = recover_base_order(&encoded);
        for m in 0..40u64 {
            for n in 0..40u64 {
                prop_assert_eq!(recovered.leq(m, n), base.leq(m, n));
            }
        }
    }

    #[test]
    fn encoded_orders_satisfy_axioms(kind in 0u8..5, seed in any::<u64>()) {
        let base = seeded_order(kind, seed);
        let payload = build_stream(&GenDescriptor::with_seed("random", seed ^ 0xF00D)).unwrap();
        let (encoded, _) = encode_order(&base, &payload);
        let sample: Vec<u64> = (0..16).collect();
        prop_assert!(check_order_axioms(&encoded, &sample).is_ok());
    }

    #[test]
    fn bit_prefix_renders_every_bit(seed in any::<u64>(), bound in 0u64..200) {
        let s = build_stream(&GenDescriptor::with_seed("random", seed)).unwrap();
        let rendered = s.materialize_prefix(bound);
        prop_assert_eq!(rendered.len() as u64, bound);
        for (i, c) in rendered.chars().enumerate() {
            prop_assert_eq!(c == '1', s.query(i as u64) == 1);
        }
    }
}

#[test]
fn constant_streams_join_to_alternation() {
    let joined = join(&BitStream::constant(1), &BitStream::constant(0));
    assert_eq!(joined.materialize_prefix(8), "10101010");
}
