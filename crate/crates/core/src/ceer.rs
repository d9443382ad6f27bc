//! Diameter-2 computable graphing of computably enumerable equivalence
//! relations with all-infinite classes.
//!
//! A ceer is presented by its enumeration function: column x of
//! `enumerate(x, ·)` lists x's equivalence class without duplicates,
//! starting with x itself. The graphing puts an edge between x and y when a
//! bounded enumeration experiment connects them; the midpoint construction
//! ([`connect`]) realizes diameter 2.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::oracles::{pair, unpair};

/// Enumeration presentation of a ceer: `enumerate(x, n)` is the n-th element
/// of x's class, listed without duplicates. Generators guarantee
/// `enumerate(x, 0) == x`.
#[derive(Clone)]
pub struct CeerEnumeration {
    inner: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
}

impl CeerEnumeration {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u64, u64) -> u64 + Send + Sync + 'static,
    {
        CeerEnumeration { inner: Arc::new(f) }
    }

    pub fn enumerate(&self, x: u64, n: u64) -> u64 {
        (self.inner)(x, n)
    }
}

impl std::fmt::Debug for CeerEnumeration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CeerEnumeration")
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CeerError {
    /// The graphing is a simple graph: loops are excluded by precondition.
    #[error("x and y must be distinct (got {0} twice)")]
    SamePoint(u64),
    /// y never showed up in x's column within the budget. Either the two are
    /// not equivalent or the budget was too small; the enumeration alone
    /// cannot tell the difference.
    #[error("budget {budget} exhausted searching column {column} for {target}")]
    BudgetExhausted { column: u64, target: u64, budget: u64 },
    /// The midpoint failed its own adjacency check. This would falsify the
    /// implementation, never the construction.
    #[error("internal contradiction: midpoint {z} not adjacent to {x} and {y}")]
    InternalContradiction { x: u64, y: u64, z: u64 },
    #[error("merge schedule stages must be non-decreasing (entry {index})")]
    MalformedSchedule { index: usize },
}

/// The finite graph examined by one adjacency experiment. Every edge carries
/// its provenance: the column and index that enumerated it, so the graph is
/// a replayable subset of the ceer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "WitnessGraphRepr", try_from = "WitnessGraphRepr")]
pub struct FiniteWitnessGraph {
    /// The bound of the experiment (the larger of the two queried points).
    pub bound: u64,
    pub vertices: BTreeSet<u64>,
    /// Unordered edges keyed as (min, max) with provenance (column, index):
    /// `enumerate(column, index)` produced the other endpoint.
    pub edges: BTreeMap<(u64, u64), (u64, u64)>,
}

#[derive(Serialize, Deserialize)]
struct WitnessGraphRepr {
    bound: u64,
    vertices: Vec<u64>,
    edges: Vec<EdgeRepr>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    u: u64,
    v: u64,
    column: u64,
    index: u64,
}

impl From<FiniteWitnessGraph> for WitnessGraphRepr {
    fn from(g: FiniteWitnessGraph) -> Self {
        WitnessGraphRepr {
            bound: g.bound,
            vertices: g.vertices.into_iter().collect(),
            edges: g
                .edges
                .into_iter()
                .map(|((u, v), (column, index))| EdgeRepr { u, v, column, index })
                .collect(),
        }
    }
}

impl TryFrom<WitnessGraphRepr> for FiniteWitnessGraph {
    type Error = String;
    fn try_from(repr: WitnessGraphRepr) -> Result<Self, Self::Error> {
        let vertices: BTreeSet<u64> = repr.vertices.into_iter().collect();
        let mut edges = BTreeMap::new();
        for e in repr.edges {
            if !vertices.contains(&e.u) || !vertices.contains(&e.v) {
                return Err(format!("edge ({}, {}) has an unknown endpoint", e.u, e.v));
            }
            edges.insert((e.u.min(e.v), e.u.max(e.v)), (e.column, e.index));
        }
        Ok(FiniteWitnessGraph { bound: repr.bound, vertices, edges })
    }
}

impl FiniteWitnessGraph {
    fn neighbors(&self) -> HashMap<u64, Vec<u64>> {
        let mut adj: HashMap<u64, Vec<u64>> = HashMap::new();
        for &(u, v) in self.edges.keys() {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        adj
    }

    /// BFS path between two vertices, if any.
    fn path(&self, from: u64, to: u64) -> Option<Vec<u64>> {
        if !self.vertices.contains(&from) || !self.vertices.contains(&to) {
            return None;
        }
        if from == to {
            return Some(vec![from]);
        }
        let adj = self.neighbors();
        let mut prev: HashMap<u64, u64> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = HashSet::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).map(|n| n.as_slice()).unwrap_or(&[]) {
                if seen.insert(v) {
                    prev.insert(v, u);
                    if v == to {
                        let mut path = vec![to];
                        let mut cur = to;
                        while cur != from {
                            cur = prev[&cur];
                            path.push(cur);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    pub fn connected(&self, a: u64, b: u64) -> bool {
        self.path(a, b).is_some()
    }

    /// Composes the edge provenances along a path from x to y into a single
    /// replayable certificate.
    pub fn certificate(&self, x: u64, y: u64) -> Option<EquivalenceCertificate> {
        let path = self.path(x, y)?;
        let mut chain = Vec::with_capacity(path.len().saturating_sub(1));
        for w in path.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            chain.push(self.edges[&key]);
        }
        Some(EquivalenceCertificate { x, y, chain })
    }

    /// DOT rendering with provenance indices as edge labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph witness {\n");
        for v in &self.vertices {
            out.push_str(&format!("  {v};\n"));
        }
        for (&(u, v), &(col, idx)) in &self.edges {
            out.push_str(&format!("  {u} -- {v} [label=\"f({col},{idx})\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// A replayable positive witness that x and y are equivalent: a chain of
/// enumeration facts leading from x to y.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    pub x: u64,
    pub y: u64,
    /// Each step is (column, index); `enumerate(column, index)` must produce
    /// the step's other endpoint, starting from x and ending at y.
    pub chain: Vec<(u64, u64)>,
}

impl EquivalenceCertificate {
    /// Replays the chain against the enumeration. Returns true iff every
    /// step checks out and the walk ends at y.
    pub fn replay(&self, ceer: &CeerEnumeration) -> bool {
        let mut current = self.x;
        for &(column, index) in &self.chain {
            let value = ceer.enumerate(column, index);
            if column == current {
                current = value;
            } else if value == current {
                current = column;
            } else {
                return false;
            }
        }
        current == self.y
    }
}

/// Builds the finite witness graph for the experiment at `bound`: vertices
/// are all z < bound plus everything enumerated; for every column u < bound
/// the values `enumerate(u, 0..=bound)` contribute edges.
fn witness_graph(ceer: &CeerEnumeration, bound: u64) -> FiniteWitnessGraph {
    let mut vertices: BTreeSet<u64> = (0..bound).collect();
    let mut edges = BTreeMap::new();
    for u in 0..bound {
        for n in 0..=bound {
            let v = ceer.enumerate(u, n);
            vertices.insert(v);
            if v != u {
                let key = (u.min(v), u.max(v));
                edges.entry(key).or_insert((u, n));
            }
        }
    }
    FiniteWitnessGraph { bound, vertices, edges }
}

/// Decides adjacency of x and y in the computable graphing. The larger
/// argument plays the experiment bound, so the answer is symmetric. The
/// returned graph is the finite subset of the ceer that was examined.
///
/// Adjacency implies equivalence: every edge of the witness graph is an
/// enumeration fact.
pub fn adjacent(
    ceer: &CeerEnumeration,
    x: u64,
    y: u64,
) -> Result<(bool, FiniteWitnessGraph), CeerError> {
    if x == y {
        return Err(CeerError::SamePoint(x));
    }
    let bound = x.max(y);
    let graph = witness_graph(ceer, bound);
    let mut graph = graph;
    // x (the smaller point) is a vertex by construction; the bound itself
    // may never have been enumerated, in which case it sits isolated.
    graph.vertices.insert(bound);
    let answer = graph.connected(x, y);
    Ok((answer, graph))
}

/// Finds a midpoint z adjacent to both x and y, witnessing diameter 2. The
/// smaller argument's column is searched for the larger; `budget` bounds
/// that search. N is chosen minimal so the result is deterministic.
pub fn connect(ceer: &CeerEnumeration, x: u64, y: u64, budget: u64) -> Result<u64, CeerError> {
    if x == y {
        return Err(CeerError::SamePoint(x));
    }
    let (lo, hi) = (x.min(y), x.max(y));
    let hit = (0..budget).find(|&n| ceer.enumerate(lo, n) == hi);
    let Some(n_star) = hit else {
        return Err(CeerError::BudgetExhausted { column: lo, target: hi, budget });
    };
    // Least N with: hi appears among enumerate(lo, 0..N-1) and lo, hi < N.
    let n_bound = (n_star + 1).max(hi + 1);
    // The first value in lo's column exceeding N. Duplicate-freeness means
    // at most N+1 values can be ≤ N, so this scan terminates.
    let z = (0..=n_bound + 1)
        .map(|n| ceer.enumerate(lo, n))
        .find(|&v| v > n_bound)
        .expect("duplicate-free column must exceed any bound");
    // z exceeds both x and y, so both adjacency experiments share the same
    // witness graph at bound z.
    let (adj_x, graph) = adjacent(ceer, x, z)?;
    if !(adj_x && graph.connected(y, z)) {
        return Err(CeerError::InternalContradiction { x, y, z });
    }
    Ok(z)
}

/// Searches column x for y, up to `budget` indices. A returned certificate
/// is always sound; `None` means unknown, never "not equivalent".
pub fn witness_equivalent(
    ceer: &CeerEnumeration,
    x: u64,
    y: u64,
    budget: u64,
) -> Option<EquivalenceCertificate> {
    (0..budget)
        .find(|&n| ceer.enumerate(x, n) == y)
        .map(|n| EquivalenceCertificate { x, y, chain: vec![(x, n)] })
}

/// The residue ceer: x ~ y iff x ≡ y (mod k). Column x is x, x+k, x+2k, …,
/// so every class is infinite and enumeration starts with the point itself.
pub fn mod_k_ceer(k: u64) -> CeerEnumeration {
    assert!(k >= 1, "k must be at least 1");
    CeerEnumeration::from_fn(move |x, n| x + k * n)
}

/// One merge instruction: at `stage`, the classes of `column_a` and
/// `column_b` become one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEntry {
    pub stage: u64,
    pub column_a: u64,
    pub column_b: u64,
}

/// State of the dovetailed enumeration for one source point.
struct MergeColumn {
    emitted: Vec<u64>,
    seen: HashSet<u64>,
    /// Next index to read from each merged column.
    cursors: BTreeMap<u64, u64>,
    stage: u64,
}

/// A ceer whose classes are unions of pairing columns, revealed only through
/// enumeration. Element ⟨i, n⟩ = pair(i, n) lies in column i; schedule
/// entries merge whole columns at the given stages.
///
/// Column x enumerates x first, then dovetails over all columns currently
/// merged with x's column, in stage order, deduplicating. Every class is a
/// union of infinite columns, hence infinite.
pub fn merge_schedule_ceer(schedule: Vec<MergeEntry>) -> Result<CeerEnumeration, CeerError> {
    for (index, w) in schedule.windows(2).enumerate() {
        if w[1].stage < w[0].stage {
            return Err(CeerError::MalformedSchedule { index: index + 1 });
        }
    }
    let schedule = Arc::new(schedule);
    let cache: Arc<Mutex<HashMap<u64, MergeColumn>>> = Arc::new(Mutex::new(HashMap::new()));
    Ok(CeerEnumeration::from_fn(move |x, n| {
        let mut cache = cache.lock().unwrap();
        let state = cache.entry(x).or_insert_with(|| {
            let (column, _) = unpair(x);
            MergeColumn {
                emitted: vec![x],
                seen: HashSet::from([x]),
                cursors: BTreeMap::from([(column, 0)]),
                stage: 0,
            }
        });
        while state.emitted.len() <= n as usize {
            step_merge_column(state, &schedule);
        }
        state.emitted[n as usize]
    }))
}

fn step_merge_column(state: &mut MergeColumn, schedule: &[MergeEntry]) {
    // Columns merging in at this stage join the dovetail with a fresh cursor.
    let group = merged_group(state.cursors.keys().copied().collect(), schedule, state.stage);
    for column in group {
        state.cursors.entry(column).or_insert(0);
    }
    let columns: Vec<u64> = state.cursors.keys().copied().collect();
    for column in columns {
        let cursor = state.cursors[&column];
        let value = pair(column, cursor);
        *state.cursors.get_mut(&column).unwrap() = cursor + 1;
        if state.seen.insert(value) {
            state.emitted.push(value);
        }
    }
    state.stage += 1;
}

/// The set of columns connected to any of `start` by schedule entries with
/// stage ≤ `stage`.
fn merged_group(start: BTreeSet<u64>, schedule: &[MergeEntry], stage: u64) -> BTreeSet<u64> {
    let mut group = start;
    loop {
        let mut grew = false;
        for e in schedule.iter().take_while(|e| e.stage <= stage) {
            let has_a = group.contains(&e.column_a);
            let has_b = group.contains(&e.column_b);
            if has_a != has_b {
                group.insert(if has_a { e.column_b } else { e.column_a });
                grew = true;
            }
        }
        if !grew {
            return group;
        }
    }
}
