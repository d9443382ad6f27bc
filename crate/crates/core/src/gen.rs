//! Named generator families for bit streams, linear orders, structures and
//! ceers, each reproducible from a JSON descriptor
//! `{"kind": ..., "seed": ..., "params": {...}}`.
//!
//! Every generator is a pure function of (kind, seed, params); there is no
//! hidden state, so any experiment can be replayed from its descriptor.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ceer::{merge_schedule_ceer, mod_k_ceer, CeerEnumeration, MergeEntry};
use crate::oracles::{BitStream, LinearOrderOracle, Signature, StructureOracle};

/// splitmix64 finalizer; the per-index hash behind the seeded "random"
/// generators. Deterministic and stateless.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn hash_bits(seed: u64, parts: &[u64]) -> u64 {
    let mut acc = mix64(seed ^ 0x6a09e667f3bcc909);
    for &p in parts {
        acc = mix64(acc ^ p);
    }
    acc
}

/// A generator descriptor as it appears on the wire. Structure descriptors
/// may carry an explicit signature; for kinds with a canonical signature it
/// must match, for `random-bits` it defines the relations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenDescriptor {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
}

impl GenDescriptor {
    pub fn new(kind: &str) -> Self {
        GenDescriptor { kind: kind.to_string(), seed: None, params: None, signature: None }
    }

    pub fn with_seed(kind: &str, seed: u64) -> Self {
        GenDescriptor { kind: kind.to_string(), seed: Some(seed), params: None, signature: None }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn param_u64(&self, name: &str) -> Option<u64> {
        self.params.as_ref()?.get(name)?.as_u64()
    }

    fn param_str(&self, name: &str) -> Option<String> {
        Some(self.params.as_ref()?.get(name)?.as_str()?.to_string())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown generator kind {0:?}")]
    UnknownKind(String),
    #[error("generator {kind:?}: missing or malformed parameter {param:?}")]
    BadParam { kind: String, param: String },
    #[error("generator {kind:?}: {msg}")]
    Invalid { kind: String, msg: String },
}

fn parse_bits(s: &str) -> Option<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

/// Bit-stream generators.
///
/// Kinds: `zeros`, `ones`, `periodic` (params `prefix`, `period` as '0'/'1'
/// strings), `thue-morse`, `random` (seeded per-index hash).
pub fn build_stream(desc: &GenDescriptor) -> Result<BitStream, GenError> {
    let seed = desc.seed();
    match desc.kind.as_str() {
        "zeros" => Ok(BitStream::constant(0)),
        "ones" => Ok(BitStream::constant(1)),
        "periodic" => {
            let prefix = desc.param_str("prefix").unwrap_or_default();
            let period = desc.param_str("period").ok_or_else(|| GenError::BadParam {
                kind: desc.kind.clone(),
                param: "period".into(),
            })?;
            let prefix = parse_bits(&prefix).ok_or_else(|| GenError::BadParam {
                kind: desc.kind.clone(),
                param: "prefix".into(),
            })?;
            let period = parse_bits(&period).ok_or_else(|| GenError::BadParam {
                kind: desc.kind.clone(),
                param: "period".into(),
            })?;
            if period.is_empty() {
                return Err(GenError::Invalid {
                    kind: desc.kind.clone(),
                    msg: "period must be non-empty".into(),
                });
            }
            Ok(BitStream::from_fn(move |n| {
                let n = n as usize;
                if n < prefix.len() {
                    prefix[n]
                } else {
                    period[(n - prefix.len()) % period.len()]
                }
            }))
        }
        "thue-morse" => Ok(BitStream::from_fn(|n| (n.count_ones() & 1) as u8)),
        "random" => Ok(BitStream::from_fn(move |n| (hash_bits(seed, &[n]) & 1) as u8)),
        _ => Err(GenError::UnknownKind(desc.kind.clone())),
    }
}

/// Linear-order generators, all with O(1) comparison.
///
/// Kinds: `omega` (the standard order), `parity-magnitude` (evens first),
/// `reverse-parity` (odds first), `zeta` (order type of the integers),
/// `reverse-blocks` (param `block`), `block-shuffle` (param `block`, seeded
/// permutation inside each block).
pub fn build_order(desc: &GenDescriptor) -> Result<LinearOrderOracle, GenError> {
    let seed = desc.seed();
    match desc.kind.as_str() {
        "omega" => Ok(LinearOrderOracle::standard()),
        "parity-magnitude" => Ok(LinearOrderOracle::by_key(|n| (n % 2, n))),
        "reverse-parity" => Ok(LinearOrderOracle::by_key(|n| (1 - n % 2, n))),
        "zeta" => Ok(LinearOrderOracle::by_key(|n| {
            // evens code 0, 1, 2, …; odds code -1, -2, … below them
            if n % 2 == 0 {
                (n / 2) as i64
            } else {
                -((n / 2) as i64) - 1
            }
        })),
        "reverse-blocks" => {
            let block = block_param(desc)?;
            Ok(LinearOrderOracle::by_key(move |n| (n / block, u64::MAX - n)))
        }
        "block-shuffle" => {
            let block = block_param(desc)?;
            Ok(LinearOrderOracle::by_key(move |n| (n / block, hash_bits(seed, &[n]))))
        }
        _ => Err(GenError::UnknownKind(desc.kind.clone())),
    }
}

fn block_param(desc: &GenDescriptor) -> Result<u64, GenError> {
    let block = desc.param_u64("block").ok_or_else(|| GenError::BadParam {
        kind: desc.kind.clone(),
        param: "block".into(),
    })?;
    if block == 0 {
        return Err(GenError::Invalid { kind: desc.kind.clone(), msg: "block must be ≥ 1".into() });
    }
    Ok(block)
}

/// Structure generators over finite relational signatures.
///
/// Kinds: `path-graph` (R(m,n) iff |m−n| = 1), `grid-graph` (param `width`),
/// `even-predicate`, `odd-predicate`, `random-bits` (seeded truth value per
/// atom; optional param `arity` for the single relation R), and
/// `empty-signature`.
pub fn build_structure(desc: &GenDescriptor) -> Result<StructureOracle, GenError> {
    let seed = desc.seed();
    let structure = build_structure_inner(desc, seed)?;
    if let Some(declared) = &desc.signature {
        if declared != structure.signature() {
            return Err(GenError::Invalid {
                kind: desc.kind.clone(),
                msg: format!(
                    "declared signature {declared:?} does not match the generator's {:?}",
                    structure.signature()
                ),
            });
        }
    }
    Ok(structure)
}

fn build_structure_inner(desc: &GenDescriptor, seed: u64) -> Result<StructureOracle, GenError> {
    match desc.kind.as_str() {
        "path-graph" => Ok(StructureOracle::from_fn(Signature::binary("R"), |_, args| {
            args[0].abs_diff(args[1]) == 1
        })),
        "grid-graph" => {
            let width = desc.param_u64("width").unwrap_or(4);
            if width == 0 {
                return Err(GenError::Invalid {
                    kind: desc.kind.clone(),
                    msg: "width must be ≥ 1".into(),
                });
            }
            Ok(StructureOracle::from_fn(Signature::binary("R"), move |_, args| {
                let (a, b) = (args[0], args[1]);
                let (ax, ay) = (a % width, a / width);
                let (bx, by) = (b % width, b / width);
                ax.abs_diff(bx) + ay.abs_diff(by) == 1
            }))
        }
        "even-predicate" => Ok(StructureOracle::from_fn(Signature::unary("P"), |_, args| {
            args[0] % 2 == 0
        })),
        "odd-predicate" => Ok(StructureOracle::from_fn(Signature::unary("P"), |_, args| {
            args[0] % 2 == 1
        })),
        // Trivial structures: outside a finite set, all tuples look alike.
        "complete-graph" => Ok(StructureOracle::from_fn(Signature::binary("R"), |_, args| {
            args[0] != args[1]
        })),
        "empty-graph" => {
            Ok(StructureOracle::from_fn(Signature::binary("R"), |_, _| false))
        }
        "finite-predicate" => {
            let members: Vec<u64> = desc
                .params
                .as_ref()
                .and_then(|p| p.get("members"))
                .and_then(|m| m.as_array())
                .map(|a| a.iter().filter_map(|v| v.as_u64()).collect())
                .ok_or_else(|| GenError::BadParam {
                    kind: desc.kind.clone(),
                    param: "members".into(),
                })?;
            Ok(StructureOracle::from_fn(Signature::unary("P"), move |_, args| {
                members.contains(&args[0])
            }))
        }
        "random-bits" => {
            let sig = match &desc.signature {
                Some(sig) => sig.clone(),
                None => {
                    let arity = desc.param_u64("arity").unwrap_or(2) as usize;
                    if arity == 0 {
                        return Err(GenError::Invalid {
                            kind: desc.kind.clone(),
                            msg: "arity must be ≥ 1".into(),
                        });
                    }
                    Signature::new(vec![crate::oracles::RelationDecl {
                        name: "R".into(),
                        arity,
                    }])
                    .expect("single relation is a valid signature")
                }
            };
            Ok(StructureOracle::from_fn(sig, move |rel, args| {
                let mut parts = vec![rel as u64];
                parts.extend_from_slice(args);
                hash_bits(seed, &parts) & 1 == 1
            }))
        }
        "empty-signature" => Ok(StructureOracle::from_fn(Signature::empty(), |_, _| {
            unreachable!("no relations to query")
        })),
        _ => Err(GenError::UnknownKind(desc.kind.clone())),
    }
}

/// Ceer generators.
///
/// Kinds: `mod-k` (param `k ≥ 1`; classes are residues mod k) and
/// `merge-schedule` (param `schedule`: a list of `[stage, columnA, columnB]`
/// entries with non-decreasing stages).
pub fn build_ceer(desc: &GenDescriptor) -> Result<CeerEnumeration, GenError> {
    match desc.kind.as_str() {
        "mod-k" => {
            let k = desc.param_u64("k").ok_or_else(|| GenError::BadParam {
                kind: desc.kind.clone(),
                param: "k".into(),
            })?;
            if k == 0 {
                return Err(GenError::Invalid {
                    kind: desc.kind.clone(),
                    msg: "k must be ≥ 1".into(),
                });
            }
            Ok(mod_k_ceer(k))
        }
        "merge-schedule" => {
            let raw = desc
                .params
                .as_ref()
                .and_then(|p| p.get("schedule"))
                .and_then(|s| s.as_array())
                .ok_or_else(|| GenError::BadParam {
                    kind: desc.kind.clone(),
                    param: "schedule".into(),
                })?;
            let mut schedule = Vec::with_capacity(raw.len());
            for entry in raw {
                let triple: Option<Vec<u64>> =
                    entry.as_array().map(|a| a.iter().filter_map(|v| v.as_u64()).collect());
                match triple.as_deref() {
                    Some([stage, a, b]) => schedule.push(MergeEntry {
                        stage: *stage,
                        column_a: *a,
                        column_b: *b,
                    }),
                    _ => {
                        return Err(GenError::BadParam {
                            kind: desc.kind.clone(),
                            param: "schedule".into(),
                        })
                    }
                }
            }
            merge_schedule_ceer(schedule).map_err(|e| GenError::Invalid {
                kind: desc.kind.clone(),
                msg: e.to_string(),
            })
        }
        _ => Err(GenError::UnknownKind(desc.kind.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip_through_json() {
        let json = r#"{"kind": "block-shuffle", "seed": 7, "params": {"block": 5}}"#;
        let desc: GenDescriptor = serde_json::from_str(json).unwrap();
        let order = build_order(&desc).unwrap();
        crate::oracles::check_order_axioms(&order, &(0..30).collect::<Vec<_>>()).unwrap();
    }

    #[test]
    fn stream_generators_are_deterministic() {
        for kind in ["zeros", "ones", "thue-morse", "random"] {
            let desc = GenDescriptor::with_seed(kind, 3);
            let a = build_stream(&desc).unwrap();
            let b = build_stream(&desc).unwrap();
            assert_eq!(a.materialize_prefix(256), b.materialize_prefix(256), "{kind}");
        }
    }

    #[test]
    fn periodic_stream() {
        let desc: GenDescriptor = serde_json::from_str(
            r#"{"kind": "periodic", "params": {"prefix": "11", "period": "01"}}"#,
        )
        .unwrap();
        let s = build_stream(&desc).unwrap();
        assert_eq!(s.materialize_prefix(8), "11010101");
    }

    #[test]
    fn all_order_kinds_satisfy_axioms() {
        let descs = [
            serde_json::json!({"kind": "omega"}),
            serde_json::json!({"kind": "parity-magnitude"}),
            serde_json::json!({"kind": "reverse-parity"}),
            serde_json::json!({"kind": "zeta"}),
            serde_json::json!({"kind": "reverse-blocks", "params": {"block": 4}}),
            serde_json::json!({"kind": "block-shuffle", "seed": 11, "params": {"block": 6}}),
        ];
        let sample: Vec<u64> = (0..25).collect();
        for d in descs {
            let desc: GenDescriptor = serde_json::from_value(d).unwrap();
            let order = build_order(&desc).unwrap();
            crate::oracles::check_order_axioms(&order, &sample)
                .unwrap_or_else(|v| panic!("{}: {v:?}", desc.kind));
        }
    }

    #[test]
    fn declared_signatures_are_checked() {
        let ok: GenDescriptor = serde_json::from_str(
            r#"{"signature":[{"name":"R","arity":2}], "kind":"path-graph"}"#,
        )
        .unwrap();
        assert!(build_structure(&ok).is_ok());

        let mismatched: GenDescriptor = serde_json::from_str(
            r#"{"signature":[{"name":"E","arity":2}], "kind":"path-graph"}"#,
        )
        .unwrap();
        assert!(matches!(build_structure(&mismatched), Err(GenError::Invalid { .. })));

        // For random-bits the declared signature defines the relations.
        let multi: GenDescriptor = serde_json::from_str(
            r#"{"signature":[{"name":"R","arity":2},{"name":"P","arity":1}],
                "kind":"random-bits", "seed": 5}"#,
        )
        .unwrap();
        let m = build_structure(&multi).unwrap();
        assert_eq!(m.signature().relations().len(), 2);
        let _ = m.holds("P", &[3]);
        let _ = m.holds("R", &[3, 4]);
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let desc = GenDescriptor::new("no-such-generator");
        assert!(matches!(build_stream(&desc), Err(GenError::UnknownKind(_))));
        assert!(matches!(build_order(&desc), Err(GenError::UnknownKind(_))));
        assert!(matches!(build_structure(&desc), Err(GenError::UnknownKind(_))));
        assert!(matches!(build_ceer(&desc), Err(GenError::UnknownKind(_))));
    }
}
