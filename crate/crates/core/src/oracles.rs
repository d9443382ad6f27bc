//! Total deterministic oracles standing in for countably infinite objects,
//! plus the coding conventions (pairing, join, order codes) shared by every
//! construction in this crate.
//!
//! An oracle here is a plain function wrapped in an `Arc`: answers must be
//! total and must not depend on query order. Any memoization an
//! implementation keeps must be observationally invisible.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A single bit. Always 0 or 1.
pub type Bit = u8;

/// Cantor pairing: `pair(m, n) = (m + n)(m + n + 1)/2 + n`. Panics rather
/// than wrap if the result does not fit in 64 bits.
pub fn pair(m: u64, n: u64) -> u64 {
    let s = m as u128 + n as u128;
    let k = s * (s + 1) / 2 + n as u128;
    u64::try_from(k).expect("pairing overflow")
}

/// Inverse of [`pair`]. `unpair(pair(m, n)) == (m, n)` for all m, n.
pub fn unpair(k: u64) -> (u64, u64) {
    let w = (((8 * k as u128 + 1).isqrt() - 1) / 2) as u64;
    let t = w * (w + 1) / 2;
    let n = k - t;
    let m = w - n;
    (m, n)
}

/// A total function ℕ → {0,1}; the crate's notion of a "real".
#[derive(Clone)]
pub struct BitStream {
    inner: Arc<dyn Fn(u64) -> Bit + Send + Sync>,
}

impl BitStream {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u64) -> Bit + Send + Sync + 'static,
    {
        BitStream { inner: Arc::new(f) }
    }

    /// A stream that repeats the same bit everywhere.
    pub fn constant(bit: Bit) -> Self {
        assert!(bit <= 1);
        BitStream::from_fn(move |_| bit)
    }

    /// A stream whose first bits are `bits` and which is 0 afterwards.
    pub fn from_bits(bits: Vec<Bit>) -> Self {
        BitStream::from_fn(move |n| *bits.get(n as usize).unwrap_or(&0))
    }

    pub fn query(&self, n: u64) -> Bit {
        let b = (self.inner)(n);
        debug_assert!(b <= 1);
        b
    }

    /// The stream of even-position bits: `result(n) = self(2n)`.
    pub fn even_part(&self) -> BitStream {
        let s = self.clone();
        BitStream::from_fn(move |n| s.query(2 * n))
    }

    /// The stream of odd-position bits: `result(n) = self(2n + 1)`.
    pub fn odd_part(&self) -> BitStream {
        let s = self.clone();
        BitStream::from_fn(move |n| s.query(2 * n + 1))
    }

    /// First `bound` bits rendered as a string of '0'/'1'; character i is
    /// `query(i)`.
    pub fn materialize_prefix(&self, bound: u64) -> String {
        (0..bound)
            .map(|n| if self.query(n) == 0 { '0' } else { '1' })
            .collect()
    }

    /// Two streams share the same underlying oracle object.
    pub fn same_oracle(a: &BitStream, b: &BitStream) -> bool {
        Arc::ptr_eq(&a.inner, &b.inner)
    }
}

impl std::fmt::Debug for BitStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitStream({}…)", self.materialize_prefix(16))
    }
}

/// Interleave two streams: `result(2n) = a(n)`, `result(2n + 1) = b(n)`.
pub fn join(a: &BitStream, b: &BitStream) -> BitStream {
    let (a, b) = (a.clone(), b.clone());
    BitStream::from_fn(move |n| if n % 2 == 0 { a.query(n / 2) } else { b.query(n / 2) })
}

/// A total comparison oracle realizing a linear order on ℕ.
#[derive(Clone)]
pub struct LinearOrderOracle {
    inner: Arc<dyn Fn(u64, u64) -> bool + Send + Sync>,
}

impl LinearOrderOracle {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u64, u64) -> bool + Send + Sync + 'static,
    {
        LinearOrderOracle { inner: Arc::new(f) }
    }

    /// The usual order on ℕ.
    pub fn standard() -> Self {
        LinearOrderOracle::from_fn(|m, n| m <= n)
    }

    /// An order defined by a key: `m ≤ n` iff `key(m) ≤ key(n)`, ties broken
    /// by magnitude. The key must be injective up to that tie-break.
    pub fn by_key<K, F>(f: F) -> Self
    where
        K: Ord,
        F: Fn(u64) -> K + Send + Sync + 'static,
    {
        LinearOrderOracle::from_fn(move |m, n| (f(m), m) <= (f(n), n))
    }

    pub fn leq(&self, m: u64, n: u64) -> bool {
        (self.inner)(m, n)
    }

    /// Strict comparison. For a valid order this is `leq` minus the diagonal.
    pub fn lt(&self, m: u64, n: u64) -> bool {
        m != n && self.leq(m, n)
    }

    /// Full comparison table on indices `< bound`.
    pub fn materialize_prefix(&self, bound: u64) -> OrderTable {
        let leq = (0..bound)
            .map(|m| (0..bound).map(|n| self.leq(m, n)).collect())
            .collect();
        OrderTable { bound, leq }
    }
}

impl std::fmt::Debug for LinearOrderOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LinearOrderOracle")
    }
}

/// Materialized comparison table of a linear order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderTable {
    pub bound: u64,
    /// `leq[m][n]` for m, n < bound.
    pub leq: Vec<Vec<bool>>,
}

impl OrderTable {
    pub fn leq(&self, m: u64, n: u64) -> bool {
        self.leq[m as usize][n as usize]
    }

    /// Reads the table back as an oracle; queries outside the bound panic.
    pub fn oracle(&self) -> LinearOrderOracle {
        let table = self.clone();
        LinearOrderOracle::from_fn(move |m, n| table.leq(m, n))
    }
}

/// The code of a linear order as a bit stream: `result(pair(m, n)) = 1` iff
/// `m ≤ n` in `order`.
pub fn order_code(order: &LinearOrderOracle) -> BitStream {
    let order = order.clone();
    BitStream::from_fn(move |k| {
        let (m, n) = unpair(k);
        if order.leq(m, n) {
            1
        } else {
            0
        }
    })
}

/// Reads a bit stream back as a comparison oracle. No validation happens
/// here: whether `code` actually encodes a linear order is the caller's
/// obligation, spot-checked by [`check_order_axioms`].
pub fn decode_order(code: &BitStream) -> LinearOrderOracle {
    let code = code.clone();
    LinearOrderOracle::from_fn(move |m, n| code.query(pair(m, n)) == 1)
}

/// A violation of the linear-order axioms found on a finite sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderAxiomViolation {
    NotReflexive { m: u64 },
    NotAntisymmetric { m: u64, n: u64 },
    NotTransitive { m: u64, n: u64, p: u64 },
    NotTotal { m: u64, n: u64 },
}

/// Exhaustively checks the linear-order axioms on the given sample of
/// indices. Passing is evidence, not proof: the axioms over all of ℕ are not
/// decidable from an oracle.
pub fn check_order_axioms(
    order: &LinearOrderOracle,
    sample: &[u64],
) -> Result<(), OrderAxiomViolation> {
    for &m in sample {
        if !order.leq(m, m) {
            return Err(OrderAxiomViolation::NotReflexive { m });
        }
    }
    for &m in sample {
        for &n in sample {
            if m != n && order.leq(m, n) && order.leq(n, m) {
                return Err(OrderAxiomViolation::NotAntisymmetric { m, n });
            }
            if !order.leq(m, n) && !order.leq(n, m) {
                return Err(OrderAxiomViolation::NotTotal { m, n });
            }
        }
    }
    for &m in sample {
        for &n in sample {
            for &p in sample {
                if order.leq(m, n) && order.leq(n, p) && !order.leq(m, p) {
                    return Err(OrderAxiomViolation::NotTransitive { m, n, p });
                }
            }
        }
    }
    Ok(())
}

/// A relation symbol with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDecl {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RelationDecl>", into = "Vec<RelationDecl>")]
pub struct Signature {
    relations: Vec<RelationDecl>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("relation {0:?} declared with arity 0")]
    ZeroArity(String),
    #[error("relation name {0:?} declared twice")]
    DuplicateName(String),
}

impl Signature {
    pub fn new(relations: Vec<RelationDecl>) -> Result<Self, SignatureError> {
        let mut seen = BTreeSet::new();
        for r in &relations {
            if r.arity == 0 {
                return Err(SignatureError::ZeroArity(r.name.clone()));
            }
            if !seen.insert(r.name.clone()) {
                return Err(SignatureError::DuplicateName(r.name.clone()));
            }
        }
        Ok(Signature { relations })
    }

    /// The empty signature. Every structure over it is trivial.
    pub fn empty() -> Self {
        Signature { relations: Vec::new() }
    }

    /// Single binary relation "R".
    pub fn binary(name: &str) -> Self {
        Signature {
            relations: vec![RelationDecl { name: name.to_string(), arity: 2 }],
        }
    }

    /// Single unary predicate.
    pub fn unary(name: &str) -> Self {
        Signature {
            relations: vec![RelationDecl { name: name.to_string(), arity: 1 }],
        }
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn arity(&self, rel: usize) -> usize {
        self.relations[rel].arity
    }
}

impl TryFrom<Vec<RelationDecl>> for Signature {
    type Error = SignatureError;
    fn try_from(relations: Vec<RelationDecl>) -> Result<Self, Self::Error> {
        Signature::new(relations)
    }
}

impl From<Signature> for Vec<RelationDecl> {
    fn from(sig: Signature) -> Self {
        sig.relations
    }
}

/// Atomic-diagram oracle for a structure on domain ℕ over a finite
/// relational signature.
#[derive(Clone)]
pub struct StructureOracle {
    signature: Signature,
    holds: Arc<dyn Fn(usize, &[u64]) -> bool + Send + Sync>,
}

impl StructureOracle {
    pub fn from_fn<F>(signature: Signature, holds: F) -> Self
    where
        F: Fn(usize, &[u64]) -> bool + Send + Sync + 'static,
    {
        StructureOracle { signature, holds: Arc::new(holds) }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Truth of a relation atom, relation given by index into the signature.
    /// The tuple length must equal the relation's arity.
    pub fn holds_at(&self, rel: usize, args: &[u64]) -> bool {
        assert_eq!(
            args.len(),
            self.signature.arity(rel),
            "tuple length must equal the relation's arity"
        );
        (self.holds)(rel, args)
    }

    /// Truth of a relation atom by relation name. Panics on unknown names.
    pub fn holds(&self, rel: &str, args: &[u64]) -> bool {
        let idx = self
            .signature
            .index_of(rel)
            .unwrap_or_else(|| panic!("unknown relation {rel:?}"));
        self.holds_at(idx, args)
    }

    /// All true atoms with every argument `< bound`.
    pub fn materialize_prefix(&self, bound: u64) -> StructTable {
        let mut atoms = BTreeSet::new();
        for (rel, decl) in self.signature.relations().iter().enumerate() {
            for args in tuples(bound, decl.arity) {
                if self.holds_at(rel, &args) {
                    atoms.insert((rel, args));
                }
            }
        }
        StructTable { signature: self.signature.clone(), bound, atoms }
    }
}

impl std::fmt::Debug for StructureOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StructureOracle({:?})", self.signature)
    }
}

/// All `len`-tuples over `0..bound` in lexicographic order.
pub(crate) fn tuples(bound: u64, len: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = (bound as u128).pow(len as u32);
    (0..total).map(move |mut k| {
        let mut t = vec![0u64; len];
        for slot in (0..len).rev() {
            t[slot] = (k % bound as u128) as u64;
            k /= bound as u128;
        }
        t
    })
}

/// Materialized atomic diagram: every true atom with arguments `< bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructTable {
    signature: Signature,
    bound: u64,
    atoms: BTreeSet<(usize, Vec<u64>)>,
}

impl StructTable {
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Truth of an atom inside the materialized bound. Arguments outside the
    /// bound panic: the table genuinely does not know the answer.
    pub fn holds_at(&self, rel: usize, args: &[u64]) -> bool {
        assert_eq!(args.len(), self.signature.arity(rel));
        assert!(
            args.iter().all(|&a| a < self.bound),
            "atom argument outside the materialized bound"
        );
        self.atoms.contains(&(rel, args.to_vec()))
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = (&str, &[u64])> {
        self.atoms
            .iter()
            .map(|(rel, args)| (self.signature.relations()[*rel].name.as_str(), args.as_slice()))
    }
}

// Serialize atoms by relation name so tables stay readable and stable.
#[derive(Serialize, Deserialize)]
struct StructTableRepr {
    signature: Signature,
    bound: u64,
    atoms: Vec<AtomRepr>,
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    rel: String,
    args: Vec<u64>,
}

impl Serialize for StructTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let atoms = self
            .atoms
            .iter()
            .map(|(rel, args)| AtomRepr {
                rel: self.signature.relations()[*rel].name.clone(),
                args: args.clone(),
            })
            .collect();
        StructTableRepr { signature: self.signature.clone(), bound: self.bound, atoms }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StructTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = StructTableRepr::deserialize(d)?;
        let mut atoms = BTreeSet::new();
        for atom in repr.atoms {
            let rel = repr
                .signature
                .index_of(&atom.rel)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown relation {:?}", atom.rel)))?;
            if atom.args.len() != repr.signature.arity(rel) {
                return Err(serde::de::Error::custom(format!(
                    "atom for {:?} has {} arguments, arity is {}",
                    atom.rel,
                    atom.args.len(),
                    repr.signature.arity(rel)
                )));
            }
            atoms.insert((rel, atom.args));
        }
        Ok(StructTable { signature: repr.signature, bound: repr.bound, atoms })
    }
}

pub(crate) fn new_struct_table(
    signature: Signature,
    bound: u64,
    atoms: BTreeSet<(usize, Vec<u64>)>,
) -> StructTable {
    StructTable { signature, bound, atoms }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_round_trips() {
        for k in 0..10_000u64 {
            let (m, n) = unpair(k);
            assert_eq!(pair(m, n), k);
        }
        for m in 0..100 {
            for n in 0..100 {
                assert_eq!(unpair(pair(m, n)), (m, n));
            }
        }
    }

    #[test]
    fn join_of_constants() {
        let zero = BitStream::constant(0);
        let one = BitStream::constant(1);

        let zz = join(&zero, &zero);
        for n in 0..64 {
            assert_eq!(zz.query(n), 0);
        }

        let oz = join(&one, &zero);
        assert_eq!(oz.materialize_prefix(6), "101010");
    }

    #[test]
    fn join_index_arithmetic() {
        // query(5) = b(2) regardless of a.
        let a = BitStream::from_bits(vec![1, 1, 1, 1]);
        let b = BitStream::from_bits(vec![0, 0, 1, 0]);
        assert_eq!(join(&a, &b).query(5), b.query(2));
    }

    #[test]
    fn order_code_standard_order() {
        let code = order_code(&LinearOrderOracle::standard());
        assert_eq!(code.query(pair(2, 3)), 1);
        assert_eq!(code.query(pair(3, 2)), 0);
    }

    #[test]
    fn order_code_decode_round_trip() {
        let parity = LinearOrderOracle::by_key(|n| (n % 2, n));
        for order in [LinearOrderOracle::standard(), parity] {
            let decoded = decode_order(&order_code(&order));
            for m in 0..50 {
                for n in 0..50 {
                    assert_eq!(decoded.leq(m, n), order.leq(m, n));
                }
            }
        }
    }

    #[test]
    fn degenerate_code_fails_antisymmetry() {
        let all_ones = decode_order(&BitStream::constant(1));
        assert_eq!(
            check_order_axioms(&all_ones, &[0, 1]),
            Err(OrderAxiomViolation::NotAntisymmetric { m: 0, n: 1 })
        );
    }

    #[test]
    fn materialize_is_deterministic() {
        let order = LinearOrderOracle::by_key(|n| (n % 3, n));
        assert_eq!(order.materialize_prefix(10), order.materialize_prefix(10));

        let t = LinearOrderOracle::standard().materialize_prefix(2);
        assert_eq!(t.leq, vec![vec![true, true], vec![false, true]]);
    }

    #[test]
    fn path_graph_prefix_atoms() {
        let sig = Signature::binary("R");
        let path =
            StructureOracle::from_fn(sig, |_, args| args[0].abs_diff(args[1]) == 1);
        let table = path.materialize_prefix(3);
        let atoms: Vec<_> =
            table.true_atoms().map(|(r, a)| (r.to_string(), a.to_vec())).collect();
        assert_eq!(
            atoms,
            vec![
                ("R".to_string(), vec![0, 1]),
                ("R".to_string(), vec![1, 0]),
                ("R".to_string(), vec![1, 2]),
                ("R".to_string(), vec![2, 1]),
            ]
        );
        assert_eq!(path.materialize_prefix(3), path.materialize_prefix(3));
    }

    #[test]
    fn signature_rejects_bad_declarations() {
        let dup = Signature::new(vec![
            RelationDecl { name: "R".into(), arity: 2 },
            RelationDecl { name: "R".into(), arity: 1 },
        ]);
        assert!(matches!(dup, Err(SignatureError::DuplicateName(_))));
        let zero = Signature::new(vec![RelationDecl { name: "P".into(), arity: 0 }]);
        assert!(matches!(zero, Err(SignatureError::ZeroArity(_))));
    }
}
