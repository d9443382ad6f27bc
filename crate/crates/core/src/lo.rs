//! Coding an arbitrary bit stream into a linear order isomorphic to a given
//! one, by keeping or swapping each adjacent pair (2n, 2n+1).
//!
//! The coded stream is c = a ⊕ code(≤₁): the payload joined with the base
//! order's own code, so the result computes the payload, the base order and
//! the isomorphism, each by inspecting finitely many comparisons.

use crate::oracles::{decode_order, join, order_code, Bit, BitStream, LinearOrderOracle};

/// The bijection that keeps or swaps each adjacent pair: for every n,
/// {apply(2n), apply(2n+1)} = {2n, 2n+1}, so it is an involution.
#[derive(Clone, Debug)]
pub struct SwapIsomorphism {
    coded: BitStream,
    base: LinearOrderOracle,
}

impl SwapIsomorphism {
    pub fn apply(&self, n: u64) -> u64 {
        if agrees_at(&self.coded, &self.base, n / 2) {
            n
        } else {
            n ^ 1
        }
    }
}

/// Whether the coded stream and the order already agree at n: either
/// c(n) = 0 and 2n <₁ 2n+1, or c(n) = 1 and 2n+1 <₁ 2n.
pub fn agrees_at(c: &BitStream, order: &LinearOrderOracle, n: u64) -> bool {
    match c.query(n) {
        0 => order.lt(2 * n, 2 * n + 1),
        _ => order.lt(2 * n + 1, 2 * n),
    }
}

/// Codes `payload` into an order isomorphic to `base`. The returned order
/// satisfies `leq(n, m) = base.leq(f(n), f(m))`, making f an isomorphism
/// from the result onto the base by construction.
pub fn encode_order(
    base: &LinearOrderOracle,
    payload: &BitStream,
) -> (LinearOrderOracle, SwapIsomorphism) {
    let coded = join(payload, &order_code(base));
    let f = SwapIsomorphism { coded, base: base.clone() };
    let f2 = f.clone();
    let base = base.clone();
    let order = LinearOrderOracle::from_fn(move |n, m| base.leq(f2.apply(n), f2.apply(m)));
    (order, f)
}

/// Reads the n-th coded bit off an encoded order: 0 iff 2n precedes 2n+1.
/// The pair is distinct, so antisymmetry decides strictness.
pub fn decode_payload(encoded: &LinearOrderOracle, n: u64) -> Bit {
    if encoded.lt(2 * n, 2 * n + 1) {
        0
    } else {
        1
    }
}

/// The full coded stream c = payload ⊕ code(base), read off the encoded
/// order bit by bit.
pub fn coded_stream(encoded: &LinearOrderOracle) -> BitStream {
    let encoded = encoded.clone();
    BitStream::from_fn(move |n| decode_payload(&encoded, n))
}

/// Extracts the base order back out of an encoded order: the odd positions
/// of the coded stream are the base's code. Garbage in, garbage out when the
/// input was not produced by [`encode_order`]; sample the order axioms to
/// detect that.
pub fn recover_base_order(encoded: &LinearOrderOracle) -> LinearOrderOracle {
    decode_order(&coded_stream(encoded).odd_part())
}

/// Recovers the isomorphism pointwise: returns (f(2n), f(2n+1)), the
/// identity pair where the two orders agree on (2n, 2n+1) and the swapped
/// pair otherwise.
pub fn recover_isomorphism(
    base: &LinearOrderOracle,
    encoded: &LinearOrderOracle,
    n: u64,
) -> (u64, u64) {
    let (a, b) = (2 * n, 2 * n + 1);
    if base.lt(a, b) == encoded.lt(a, b) {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{check_order_axioms, pair};

    #[test]
    fn agreement_basics() {
        let std = LinearOrderOracle::standard();
        let zeros = BitStream::constant(0);
        for n in 0..32 {
            assert!(agrees_at(&zeros, &std, n));
        }
        let ones = BitStream::constant(1);
        assert!(!agrees_at(&ones, &std, 0));
    }

    #[test]
    fn swap_is_forced_by_coded_bit() {
        // c(1) = 1 forces the pair (2, 3) to swap under the standard order.
        let c = BitStream::from_bits(vec![0, 1]);
        let std = LinearOrderOracle::standard();
        assert!(!agrees_at(&c, &std, 1));
    }

    #[test]
    fn encode_keeps_agreeing_pair() {
        // payload ≡ 0, base standard, n = 0: c(0) = 0 and 0 <₁ 1 agree.
        let (_, f) = encode_order(&LinearOrderOracle::standard(), &BitStream::constant(0));
        assert_eq!(f.apply(0), 0);
        assert_eq!(f.apply(1), 1);
    }

    #[test]
    fn encode_swaps_disagreeing_pair() {
        // Same inputs at n = 1: c(1) = code(base)(0) = leq(0, 0) = 1, but
        // 2 <₁ 3, so the pair swaps and the encoded order puts 3 before 2.
        assert_eq!(pair(0, 0), 0);
        let base = LinearOrderOracle::standard();
        let (encoded, f) = encode_order(&base, &BitStream::constant(0));
        assert_eq!(f.apply(2), 3);
        assert_eq!(f.apply(3), 2);
        assert!(!encoded.leq(2, 3));
        assert_eq!(decode_payload(&encoded, 1), 1);
        assert_eq!(recover_isomorphism(&base, &encoded, 1), (3, 2));
    }

    #[test]
    fn standard_order_decodes_to_zero_payload() {
        let std = LinearOrderOracle::standard();
        for n in 0..64 {
            assert_eq!(decode_payload(&std, n), 0);
        }
    }

    #[test]
    fn payload_round_trip() {
        let payload = crate::gen::build_stream(&crate::gen::GenDescriptor::with_seed("random", 5))
            .unwrap();
        let base = LinearOrderOracle::by_key(|n| (n % 2, n));
        let (encoded, _) = encode_order(&base, &payload);
        let c = join(&payload, &order_code(&base));
        for n in 0..128 {
            assert_eq!(decode_payload(&encoded, n), c.query(n), "coded bit {n}");
        }
        // Even positions of c are the payload itself.
        for k in 0..64 {
            assert_eq!(decode_payload(&encoded, 2 * k), payload.query(k));
        }
    }

    #[test]
    fn base_order_round_trip() {
        let base = LinearOrderOracle::by_key(|n| (1 - n % 2, n));
        let (encoded, _) = encode_order(&base, &BitStream::constant(1));
        let recovered = recover_base_order(&encoded);
        for m in 0..100 {
            for n in 0..100 {
                assert_eq!(recovered.leq(m, n), base.leq(m, n));
            }
        }
        assert!(recovered.leq(0, 2));
        let sample: Vec<u64> = (0..31).collect();
        check_order_axioms(&recovered, &sample).unwrap();
    }

    #[test]
    fn trivial_recover_base() {
        let (encoded, _) =
            encode_order(&LinearOrderOracle::standard(), &BitStream::constant(0));
        assert!(recover_base_order(&encoded).leq(0, 1));
    }

    #[test]
    fn involution_and_isomorphism() {
        let payload = BitStream::from_bits(vec![1, 0, 0, 1, 1, 1, 0]);
        let base = LinearOrderOracle::by_key(|n| (n / 3, u64::MAX - n));
        let (encoded, f) = encode_order(&base, &payload);
        for n in 0..400 {
            assert_eq!(f.apply(f.apply(n)), n);
        }
        for m in 0..200 {
            for n in 0..200 {
                assert_eq!(encoded.leq(m, n), base.leq(f.apply(m), f.apply(n)));
            }
        }
        for n in 0..200 {
            assert_eq!(
                recover_isomorphism(&base, &encoded, n),
                (f.apply(2 * n), f.apply(2 * n + 1))
            );
        }
    }

    #[test]
    fn encoded_order_satisfies_axioms() {
        let payload = BitStream::from_bits(vec![1, 1, 0, 1]);
        let (encoded, _) = encode_order(&LinearOrderOracle::by_key(|n| (n % 3, n)), &payload);
        let sample: Vec<u64> = (0..30).collect();
        check_order_axioms(&encoded, &sample).unwrap();
    }
}
