//! The Kumabe-Slaman condition poset: finite partial labelings of the
//! binary tree paired with finite sets of forbidden paths, the extension
//! relation, label reading along a path, and the coding loop that writes a
//! payload onto a path while alternating with caller-supplied selectors.
//!
//! A condition's label map is total on the full tree up to its depth; a ⊥
//! entry is an explicit decision never to label that node, which extensions
//! must preserve. Conditions are stored sparsely (only 0/1 labels are kept,
//! everything else within the depth is ⊥) so deep conditions stay cheap.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::gen::{build_stream, GenDescriptor};
use crate::oracles::{Bit, BitStream};

/// A node's labeling state: a bit, or an explicit decision not to label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Zero,
    One,
    Bot,
}

impl Label {
    pub fn from_bit(bit: Bit) -> Label {
        if bit == 0 {
            Label::Zero
        } else {
            Label::One
        }
    }

    fn as_char(self) -> Option<char> {
        match self {
            Label::Zero => Some('0'),
            Label::One => Some('1'),
            Label::Bot => None,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone)]
pub enum KsError {
    #[error("label map misses node {missing:?}: domain must be the full tree up to its depth")]
    DomainNotFull { missing: String },
    #[error("node key {node:?} is not a binary string")]
    BadNode { node: String },
    #[error("node {node:?} carries an unrecognized label")]
    BadLabel { node: String },
    /// Every probed bit of the path agreed with a forbidden path: the path
    /// may be forbidden, which no finite search can refute.
    #[error("no difference from forbidden path {path_index} within {budget} bits")]
    DiffBudgetExhausted { path_index: usize, budget: u64 },
    #[error("selector {selector:?} violated its contract at round {round}: {reason}")]
    SelectorContractViolation { round: u64, selector: String, reason: String },
    #[error("malformed condition: {0}")]
    BadJson(String),
}

/// A forcing condition: a labeling of the full binary tree up to some depth
/// (or the empty labeling) and finitely many forbidden paths along which
/// extensions may not add labels. Immutable once built.
#[derive(Clone)]
pub struct KsCondition {
    /// None: the empty condition with no labeled domain at all.
    depth: Option<usize>,
    /// Only the 0/1 labels; nodes of length ≤ depth not listed are ⊥.
    labels: BTreeMap<String, Label>,
    forbidden: Vec<BitStream>,
}

impl std::fmt::Debug for KsCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KsCondition")
            .field("depth", &self.depth)
            .field("labels", &self.labels)
            .field("forbidden_paths", &self.forbidden.len())
            .finish()
    }
}

/// First `len` bits of a path as a node string.
pub fn path_prefix(x: &BitStream, len: usize) -> String {
    x.materialize_prefix(len as u64)
}

impl KsCondition {
    /// The empty condition: no labels, no forbidden paths.
    pub fn empty() -> Self {
        KsCondition { depth: None, labels: BTreeMap::new(), forbidden: Vec::new() }
    }

    /// Builds a condition from an explicit label map. The map must be total
    /// on the full tree up to the longest listed node.
    pub fn make(labels: BTreeMap<String, Label>, forbidden: Vec<BitStream>) -> Result<Self, KsError> {
        for node in labels.keys() {
            if !node.chars().all(|c| c == '0' || c == '1') {
                return Err(KsError::BadNode { node: node.clone() });
            }
        }
        let Some(depth) = labels.keys().map(|n| n.len()).max() else {
            return Ok(KsCondition { depth: None, labels: BTreeMap::new(), forbidden });
        };
        for len in 0..=depth {
            let mut node = vec![b'0'; len];
            loop {
                let key = String::from_utf8(node.clone()).unwrap();
                if !labels.contains_key(&key) {
                    return Err(KsError::DomainNotFull { missing: key });
                }
                // next binary string of this length
                let mut i = len;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if node[i] == b'0' {
                        node[i] = b'1';
                        break;
                    }
                    node[i] = b'0';
                }
                if node.iter().all(|&b| b == b'0') {
                    break;
                }
            }
        }
        let sparse = labels.into_iter().filter(|(_, l)| *l != Label::Bot).collect();
        Ok(KsCondition { depth: Some(depth), labels: sparse, forbidden })
    }

    /// Internal constructor for sparsely described conditions: everything
    /// within the depth and not listed is ⊥.
    pub fn from_sparse(
        depth: Option<usize>,
        labels: BTreeMap<String, Label>,
        forbidden: Vec<BitStream>,
    ) -> Result<Self, KsError> {
        for (node, label) in &labels {
            if !node.chars().all(|c| c == '0' || c == '1') {
                return Err(KsError::BadNode { node: node.clone() });
            }
            if depth.is_none() || node.len() > depth.unwrap() {
                return Err(KsError::BadNode { node: node.clone() });
            }
            if *label == Label::Bot {
                // ⊥ is implicit in the sparse form.
                return Err(KsError::BadLabel { node: node.clone() });
            }
        }
        Ok(KsCondition { depth, labels, forbidden })
    }

    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    pub fn forbidden(&self) -> &[BitStream] {
        &self.forbidden
    }

    /// Adds forbidden paths, keeping labels unchanged. The result always
    /// extends self: no new labels means no new labels along any path.
    pub fn forbid(&self, paths: Vec<BitStream>) -> KsCondition {
        let mut forbidden = self.forbidden.clone();
        forbidden.extend(paths);
        KsCondition { depth: self.depth, labels: self.labels.clone(), forbidden }
    }

    /// The label state of a node: None outside the domain.
    pub fn label_at(&self, node: &str) -> Option<Label> {
        match self.depth {
            Some(d) if node.len() <= d => {
                Some(self.labels.get(node).copied().unwrap_or(Label::Bot))
            }
            _ => None,
        }
    }

    fn assigned_labels(&self) -> impl Iterator<Item = (&str, Label)> {
        self.labels.iter().map(|(n, &l)| (n.as_str(), l))
    }

    /// Serializable view: depth, the 0/1 labels, and how many paths are
    /// forbidden (the paths themselves are oracles).
    pub fn view(&self) -> ConditionView {
        ConditionView {
            depth: self.depth,
            labels: self
                .labels
                .iter()
                .map(|(n, l)| (n.clone(), l.as_char().unwrap().to_string()))
                .collect(),
            forbidden_paths: self.forbidden.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionView {
    pub depth: Option<usize>,
    pub labels: BTreeMap<String, String>,
    pub forbidden_paths: usize,
}

/// Parses the wire form `{"depth": n|null, "labels": {"<node>": 0|1|"bot"},
/// "forbidden": [<generator-json>…]}`. Nodes within the depth that are not
/// listed are ⊥.
pub fn condition_from_json(value: &serde_json::Value) -> Result<KsCondition, KsError> {
    let obj = value.as_object().ok_or_else(|| KsError::BadJson("expected an object".into()))?;
    let depth = match obj.get("depth") {
        None | Some(serde_json::Value::Null) => None,
        Some(v) => Some(
            v.as_u64().ok_or_else(|| KsError::BadJson("depth must be a number or null".into()))?
                as usize,
        ),
    };
    let mut labels = BTreeMap::new();
    if let Some(map) = obj.get("labels") {
        let map =
            map.as_object().ok_or_else(|| KsError::BadJson("labels must be an object".into()))?;
        for (node, raw) in map {
            let label = match raw {
                serde_json::Value::Number(n) if n.as_u64() == Some(0) => Label::Zero,
                serde_json::Value::Number(n) if n.as_u64() == Some(1) => Label::One,
                serde_json::Value::String(s) if s == "bot" => Label::Bot,
                _ => return Err(KsError::BadLabel { node: node.clone() }),
            };
            if label != Label::Bot {
                labels.insert(node.clone(), label);
            } else if !node.chars().all(|c| c == '0' || c == '1') {
                return Err(KsError::BadNode { node: node.clone() });
            }
        }
    }
    let mut forbidden = Vec::new();
    if let Some(list) = obj.get("forbidden") {
        let list =
            list.as_array().ok_or_else(|| KsError::BadJson("forbidden must be a list".into()))?;
        for desc in list {
            let desc: GenDescriptor = serde_json::from_value(desc.clone())
                .map_err(|e| KsError::BadJson(e.to_string()))?;
            forbidden.push(build_stream(&desc).map_err(|e| KsError::BadJson(e.to_string()))?);
        }
    }
    KsCondition::from_sparse(depth, labels, forbidden)
}

/// The three-clause extension check: q preserves p's labels and explicit
/// ⊥ decisions, keeps every forbidden path, and adds no labels along p's
/// forbidden paths outside p's domain.
///
/// Forbidden paths are oracles, so clause 2 identifies them by shared
/// object identity or by prefix agreement up to `probe_depth`.
pub fn extends(q: &KsCondition, p: &KsCondition, probe_depth: u64) -> bool {
    // Domains nest: q's labeled depth reaches at least p's.
    match (p.depth, q.depth) {
        (Some(dp), Some(dq)) if dq < dp => return false,
        (Some(_), None) => return false,
        _ => {}
    }
    // Clause 1: agreement on p's whole domain, ⊥ included.
    for (node, label) in p.assigned_labels() {
        if q.label_at(node) != Some(label) {
            return false;
        }
    }
    if let Some(dp) = p.depth {
        for (node, label) in q.assigned_labels() {
            if node.len() <= dp && p.label_at(node) != Some(label) {
                return false;
            }
        }
    }
    // Clause 2: every forbidden path of p is still forbidden in q.
    for x in &p.forbidden {
        let matched = q.forbidden.iter().any(|y| {
            BitStream::same_oracle(x, y)
                || (0..probe_depth).all(|i| x.query(i) == y.query(i))
        });
        if !matched {
            return false;
        }
    }
    // Clause 3: no new labels along p's forbidden paths.
    let p_depth_end = p.depth.map(|d| d as i64).unwrap_or(-1);
    for x in &p.forbidden {
        for (node, _) in q.assigned_labels() {
            if (node.len() as i64) > p_depth_end && path_prefix(x, node.len()) == node {
                return false;
            }
        }
    }
    true
}

/// Anything that labels tree nodes: conditions and chain unions.
pub trait Labeling {
    fn label_at(&self, node: &str) -> Option<Label>;
    fn labeled_depth(&self) -> Option<usize>;
}

impl Labeling for KsCondition {
    fn label_at(&self, node: &str) -> Option<Label> {
        KsCondition::label_at(self, node)
    }
    fn labeled_depth(&self) -> Option<usize> {
        self.depth
    }
}

/// Walks the path x through the tree up to `max_depth`, writing down every
/// 0/1 label encountered, in order.
pub fn eval_labels<L: Labeling + ?Sized>(g: &L, x: &BitStream, max_depth: usize) -> String {
    let mut node = String::new();
    let mut out = String::new();
    for len in 0..=max_depth {
        if len > 0 {
            node.push(if x.query(len as u64 - 1) == 0 { '0' } else { '1' });
        }
        if let Some(c) = g.label_at(&node).and_then(Label::as_char) {
            out.push(c);
        }
    }
    out
}

/// Extends p by one coded bit along x: the canonical σ is the shortest
/// initial segment of x strictly longer than p's depth and strictly longer
/// than the first difference against every forbidden path. σ gets the bit;
/// every other newly covered node is explicitly ⊥.
pub fn encode_bit_along(
    p: &KsCondition,
    x: &BitStream,
    bit: Bit,
    diff_budget: u64,
) -> Result<KsCondition, KsError> {
    let mut sigma_len = p.depth.map_or(1, |d| d + 1);
    for (path_index, y) in p.forbidden.iter().enumerate() {
        let diff = (0..diff_budget).find(|&i| x.query(i) != y.query(i));
        match diff {
            // Strictly longer than the difference position: the segment
            // contains the differing bit, so it cannot lie along y.
            Some(i) => sigma_len = sigma_len.max(i as usize + 1),
            None => return Err(KsError::DiffBudgetExhausted { path_index, budget: diff_budget }),
        }
    }
    let sigma = path_prefix(x, sigma_len);
    let mut labels = p.labels.clone();
    labels.insert(sigma, Label::from_bit(bit));
    KsCondition::from_sparse(Some(sigma_len), labels, p.forbidden.clone())
}

/// What one selector application yields: the extended condition, and
/// optionally a decision for the bit coded this round. A decision stands in
/// for evaluating a formula against the condition; when present it replaces
/// the round's payload bit.
pub struct SelectorOutput {
    pub condition: KsCondition,
    pub decided_bit: Option<Bit>,
}

impl From<KsCondition> for SelectorOutput {
    fn from(condition: KsCondition) -> Self {
        SelectorOutput { condition, decided_bit: None }
    }
}

/// A caller-supplied stand-in for meeting a dense set: any
/// condition-extending function. When `protects_path` is set the output
/// must add no labels along the protected path; the coding loop checks
/// both obligations on every application.
#[derive(Clone)]
pub struct DenseSelector {
    pub name: String,
    pub protects_path: bool,
    func: Arc<dyn Fn(&KsCondition) -> SelectorOutput + Send + Sync>,
}

impl DenseSelector {
    pub fn new<F>(name: &str, protects_path: bool, func: F) -> Self
    where
        F: Fn(&KsCondition) -> KsCondition + Send + Sync + 'static,
    {
        DenseSelector {
            name: name.to_string(),
            protects_path,
            func: Arc::new(move |p| func(p).into()),
        }
    }

    /// A selector that also decides the bit to code this round.
    pub fn deciding<F>(name: &str, protects_path: bool, func: F) -> Self
    where
        F: Fn(&KsCondition) -> (KsCondition, Bit) + Send + Sync + 'static,
    {
        DenseSelector {
            name: name.to_string(),
            protects_path,
            func: Arc::new(move |p| {
                let (condition, bit) = func(p);
                SelectorOutput { condition, decided_bit: Some(bit) }
            }),
        }
    }

    /// The identity selector; a valid extension by reflexivity.
    pub fn identity() -> Self {
        DenseSelector::new("identity", true, |p| p.clone())
    }

    /// A deciding selector whose decision is the parity of the number of
    /// labels assigned so far: a simple, replayable stand-in for deciding a
    /// statement about the condition.
    pub fn decide_label_parity() -> Self {
        DenseSelector::deciding("decide-label-parity", true, |p| {
            (p.clone(), (p.labels.len() % 2) as Bit)
        })
    }

    /// Deepens the labeling by one level and labels the off-path sibling of
    /// the protected path, leaving everything else ⊥. Honors its contract
    /// as long as the condition carries no forbidden paths through that
    /// sibling.
    pub fn label_beside(x: &BitStream, label: Bit) -> Self {
        let x = x.clone();
        DenseSelector::new("label-beside", true, move |p| {
            let new_depth = p.depth.map_or(1, |d| d + 1);
            let mut node = path_prefix(&x, new_depth - 1);
            node.push(if x.query(new_depth as u64 - 1) == 0 { '1' } else { '0' });
            let mut labels = p.labels.clone();
            labels.insert(node, Label::from_bit(label));
            KsCondition::from_sparse(Some(new_depth), labels, p.forbidden.clone())
                .expect("sibling node is within the new depth")
        })
    }

    /// A deliberately broken selector that labels the protected path's next
    /// node while claiming to protect it. Exists to exercise contract
    /// detection.
    pub fn path_violator(x: &BitStream) -> Self {
        let x = x.clone();
        DenseSelector::new("path-violator", true, move |p| {
            let new_depth = p.depth.map_or(1, |d| d + 1);
            let node = path_prefix(&x, new_depth);
            let mut labels = p.labels.clone();
            labels.insert(node, Label::One);
            KsCondition::from_sparse(Some(new_depth), labels, p.forbidden.clone())
                .expect("path node is within the new depth")
        })
    }

    pub fn apply(&self, p: &KsCondition) -> SelectorOutput {
        (self.func)(p)
    }
}

impl std::fmt::Debug for DenseSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseSelector")
            .field("name", &self.name)
            .field("protects_path", &self.protects_path)
            .finish()
    }
}

/// The union of a finite descending chain of conditions, with the chain
/// retained for audit.
#[derive(Debug, Clone)]
pub struct GenericLabelingPrefix {
    chain: Vec<KsCondition>,
}

impl GenericLabelingPrefix {
    pub fn chain(&self) -> &[KsCondition] {
        &self.chain
    }

    fn last(&self) -> &KsCondition {
        self.chain.last().expect("chain is never empty")
    }

    /// Checks the chain is descending and that explicit ⊥ decisions are
    /// permanent along it.
    pub fn audit(&self, probe_depth: u64) -> Result<(), String> {
        for (i, w) in self.chain.windows(2).enumerate() {
            if !extends(&w[1], &w[0], probe_depth) {
                return Err(format!("chain step {} does not extend step {}", i + 1, i));
            }
        }
        for (i, earlier) in self.chain.iter().enumerate() {
            let Some(d) = earlier.depth else { continue };
            for later in &self.chain[i + 1..] {
                for (node, label) in later.assigned_labels() {
                    if node.len() <= d && earlier.label_at(node) != Some(label) {
                        return Err(format!(
                            "node {node:?} relabeled later in the chain (⊥-permanence broken)"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Labeling for GenericLabelingPrefix {
    fn label_at(&self, node: &str) -> Option<Label> {
        self.last().label_at(node)
    }
    fn labeled_depth(&self) -> Option<usize> {
        self.last().depth
    }
}

/// The coding loop: each round applies the next selector (verifying
/// extension, and the protected-path contract when flagged), then codes one
/// bit along x: the selector's decision if it made one, the round's
/// payload bit otherwise. Selectors never label along x, so the labels read
/// back along x are exactly the coded bits in order.
pub fn build_generic(
    p0: &KsCondition,
    selectors: &[DenseSelector],
    x: &BitStream,
    payload: &BitStream,
    rounds: u64,
    diff_budget: u64,
) -> Result<GenericLabelingPrefix, KsError> {
    let mut chain = vec![p0.clone()];
    let mut current = p0.clone();
    for round in 0..rounds {
        let mut bit = payload.query(round);
        if !selectors.is_empty() {
            let selector = &selectors[(round % selectors.len() as u64) as usize];
            let output = selector.apply(&current);
            let next = output.condition;
            if let Some(decided) = output.decided_bit {
                bit = decided;
            }
            if !extends(&next, &current, diff_budget) {
                return Err(KsError::SelectorContractViolation {
                    round,
                    selector: selector.name.clone(),
                    reason: "output does not extend its input".into(),
                });
            }
            if selector.protects_path {
                let boundary = current.depth.map(|d| d as i64).unwrap_or(-1);
                for (node, _) in next.assigned_labels() {
                    if (node.len() as i64) > boundary && path_prefix(x, node.len()) == node {
                        return Err(KsError::SelectorContractViolation {
                            round,
                            selector: selector.name.clone(),
                            reason: format!("new label on node {node:?} along the protected path"),
                        });
                    }
                }
            }
            chain.push(next.clone());
            current = next;
        }
        let coded = encode_bit_along(&current, x, bit, diff_budget)?;
        chain.push(coded.clone());
        current = coded;
    }
    Ok(GenericLabelingPrefix { chain })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros() -> BitStream {
        BitStream::constant(0)
    }

    #[test]
    fn make_validates_full_domain() {
        let p0 = KsCondition::make(BTreeMap::new(), vec![]).unwrap();
        assert_eq!(p0.depth(), None);

        let mut ok = BTreeMap::new();
        ok.insert("".into(), Label::One);
        ok.insert("0".into(), Label::Zero);
        ok.insert("1".into(), Label::Bot);
        let p = KsCondition::make(ok, vec![]).unwrap();
        assert_eq!(p.depth(), Some(1));
        assert_eq!(p.label_at("1"), Some(Label::Bot));
        assert_eq!(p.label_at("01"), None);

        let mut missing_root = BTreeMap::new();
        missing_root.insert("0".into(), Label::Zero);
        let err = KsCondition::make(missing_root, vec![]).unwrap_err();
        assert!(matches!(err, KsError::DomainNotFull { missing } if missing.is_empty()));
    }

    #[test]
    fn extends_is_reflexive() {
        let mut labels = BTreeMap::new();
        labels.insert("".into(), Label::Bot);
        labels.insert("0".into(), Label::One);
        labels.insert("1".into(), Label::Bot);
        let p = KsCondition::make(labels, vec![zeros()]).unwrap();
        assert!(extends(&p, &p, 64));
    }

    #[test]
    fn extends_allows_new_forbidden_paths() {
        let p0 = KsCondition::empty();
        let q = encode_bit_along(&p0, &BitStream::constant(1), 1, 64)
            .unwrap()
            .forbid(vec![zeros()]);
        assert!(extends(&q, &p0, 64));
    }

    #[test]
    fn extends_rejects_labels_along_forbidden_path() {
        let p = KsCondition::empty().forbid(vec![zeros()]);
        // q labels "00", which lies along the all-zeros path.
        let mut labels = BTreeMap::new();
        labels.insert("00".into(), Label::One);
        let q = KsCondition::from_sparse(Some(2), labels, vec![zeros()]).unwrap();
        assert!(!extends(&q, &p, 64));
    }

    #[test]
    fn extends_rejects_relabeling_bot() {
        let p0 = KsCondition::empty();
        let p = encode_bit_along(&p0, &zeros(), 1, 64).unwrap();
        // p: depth 1, "0" ↦ 1, "" and "1" ⊥. Relabeling "1" breaks clause 1.
        let mut labels = BTreeMap::new();
        labels.insert("0".into(), Label::One);
        labels.insert("1".into(), Label::One);
        let q = KsCondition::from_sparse(Some(1), labels, vec![]).unwrap();
        assert!(!extends(&q, &p, 64));
    }

    #[test]
    fn eval_walks_the_path() {
        let mut labels = BTreeMap::new();
        labels.insert("".into(), Label::One);
        labels.insert("0".into(), Label::Zero);
        labels.insert("1".into(), Label::Bot);
        let g = KsCondition::make(labels, vec![]).unwrap();
        assert_eq!(eval_labels(&g, &zeros(), 8), "10");
        assert_eq!(eval_labels(&KsCondition::empty(), &zeros(), 8), "");

        let mut off = BTreeMap::new();
        off.insert("".into(), Label::Bot);
        off.insert("0".into(), Label::Bot);
        off.insert("1".into(), Label::One);
        let g = KsCondition::make(off, vec![]).unwrap();
        assert_eq!(eval_labels(&g, &zeros(), 8), "");
    }

    #[test]
    fn encode_bit_from_empty_condition() {
        let q = encode_bit_along(&KsCondition::empty(), &zeros(), 1, 64).unwrap();
        assert_eq!(q.depth(), Some(1));
        assert_eq!(q.label_at(""), Some(Label::Bot));
        assert_eq!(q.label_at("0"), Some(Label::One));
        assert_eq!(q.label_at("1"), Some(Label::Bot));
    }

    #[test]
    fn encode_bit_clears_forbidden_paths() {
        let p = KsCondition::empty().forbid(vec![zeros()]);
        let x = BitStream::from_bits(vec![0, 1, 0]);
        // First difference from the all-zeros path is at index 1, so σ = "01".
        let q = encode_bit_along(&p, &x, 0, 64).unwrap();
        assert_eq!(q.depth(), Some(2));
        assert_eq!(q.label_at("01"), Some(Label::Zero));
        assert_eq!(q.label_at("00"), Some(Label::Bot));
        assert!(extends(&q, &p, 64));
    }

    #[test]
    fn encode_bit_on_forbidden_path_exhausts() {
        let x = zeros();
        let p = KsCondition::empty().forbid(vec![x.clone()]);
        for budget in [1, 100, 10_000] {
            let err = encode_bit_along(&p, &x, 1, budget).unwrap_err();
            assert!(matches!(err, KsError::DiffBudgetExhausted { path_index: 0, .. }));
        }
    }

    #[test]
    fn build_generic_codes_payload_along_path() {
        let x = BitStream::constant(1);
        let payload = BitStream::from_bits(vec![1, 0, 1]);
        let g = build_generic(
            &KsCondition::empty(),
            &[DenseSelector::identity()],
            &x,
            &payload,
            3,
            64,
        )
        .unwrap();
        assert_eq!(eval_labels(&g, &x, g.labeled_depth().unwrap()), "101");
        g.audit(64).unwrap();

        let empty = build_generic(&KsCondition::empty(), &[], &x, &payload, 0, 64).unwrap();
        assert_eq!(eval_labels(&empty, &x, 8), "");
    }

    #[test]
    fn build_generic_with_side_labels_still_codes_exactly() {
        let x = BitStream::from_fn(|n| ((n * 7 + 3) % 2) as u8);
        let payload = BitStream::from_bits(vec![0, 1, 1, 0, 1]);
        let selectors = [DenseSelector::identity(), DenseSelector::label_beside(&x, 1)];
        let g = build_generic(&KsCondition::empty(), &selectors, &x, &payload, 5, 64).unwrap();
        assert_eq!(eval_labels(&g, &x, g.labeled_depth().unwrap()), "01101");
        g.audit(64).unwrap();
    }

    #[test]
    fn deciding_selector_overrides_payload() {
        // Decisions stand in for forcing-language truth values: the coded
        // string is the decision sequence, not the payload.
        let x = BitStream::constant(1);
        let g = build_generic(
            &KsCondition::empty(),
            &[DenseSelector::decide_label_parity()],
            &x,
            &BitStream::constant(0),
            4,
            64,
        )
        .unwrap();
        // Round k sees k labels assigned so far (one per earlier round).
        assert_eq!(eval_labels(&g, &x, g.labeled_depth().unwrap()), "0101");
        g.audit(64).unwrap();
    }

    #[test]
    fn violating_selector_is_caught_first_round() {
        let x = BitStream::constant(0);
        let err = build_generic(
            &KsCondition::empty(),
            &[DenseSelector::path_violator(&x)],
            &x,
            &BitStream::constant(1),
            4,
            64,
        )
        .unwrap_err();
        match err {
            KsError::SelectorContractViolation { round, .. } => assert_eq!(round, 0),
            other => panic!("expected contract violation, got {other:?}"),
        }
    }

    #[test]
    fn label_monotonicity_along_chain() {
        let x = BitStream::constant(0);
        let payload = BitStream::from_bits(vec![1, 1, 0, 1]);
        let g = build_generic(
            &KsCondition::empty(),
            &[DenseSelector::label_beside(&x, 0)],
            &x,
            &payload,
            4,
            64,
        )
        .unwrap();
        let mut previous = String::new();
        for cond in g.chain() {
            let s = eval_labels(cond, &x, cond.depth().unwrap_or(0));
            assert!(s.starts_with(&previous), "{s:?} does not extend {previous:?}");
            previous = s;
        }
        assert_eq!(previous, "1101");
    }

    #[test]
    fn condition_json_round_trip() {
        let value = serde_json::json!({
            "depth": 2,
            "labels": {"": 1, "01": 0, "1": "bot"},
            "forbidden": [{"kind": "zeros"}]
        });
        let cond = condition_from_json(&value).unwrap();
        assert_eq!(cond.depth(), Some(2));
        assert_eq!(cond.label_at(""), Some(Label::One));
        assert_eq!(cond.label_at("01"), Some(Label::Zero));
        assert_eq!(cond.label_at("1"), Some(Label::Bot));
        assert_eq!(cond.forbidden().len(), 1);

        let view = cond.view();
        assert_eq!(view.depth, Some(2));
        assert_eq!(view.forbidden_paths, 1);
        assert_eq!(view.labels.get(""), Some(&"1".to_string()));
    }
}
