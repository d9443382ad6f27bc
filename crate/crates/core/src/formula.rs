//! Quantifier-free formulas over a finite relational signature, with a
//! canonical size-ordered enumeration and total evaluation against an
//! atomic-diagram oracle.
//!
//! Formulas live over two sorts of terms: parameters `a0, a1, …` naming
//! already-placed elements, and free variables `y1, y2, …` ranging over the
//! tuples a search tries out. The enumeration is a bijection between ℕ and
//! all formulas, ordered by encoded size, then fewest free variables, then
//! generation order, so "the least formula such that …" is well defined
//! and reproducible on both sides of a round trip.

use crate::oracles::{Signature, StructTable, StructureOracle};

/// A term: either the i-th parameter or the j-th free variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(usize),
    Param(usize),
}

impl Term {
    fn size(self) -> usize {
        match self {
            Term::Var(j) => j + 1,
            Term::Param(i) => i + 1,
        }
    }

    fn resolve(self, params: &[u64], tuple: &[u64]) -> u64 {
        match self {
            Term::Var(j) => tuple[j],
            Term::Param(i) => params[i],
        }
    }
}

/// A quantifier-free formula: relation atoms, equalities, and the boolean
/// connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QfFormula {
    Atom { rel: usize, args: Vec<Term> },
    Eq(Term, Term),
    Not(Box<QfFormula>),
    And(Box<QfFormula>, Box<QfFormula>),
    Or(Box<QfFormula>, Box<QfFormula>),
}

impl QfFormula {
    /// Structural size: one node per connective or atom, plus term sizes.
    /// Term indices count toward size so every size class is finite.
    pub fn size(&self) -> usize {
        match self {
            QfFormula::Atom { args, .. } => 1 + args.iter().map(|t| t.size()).sum::<usize>(),
            QfFormula::Eq(a, b) => 1 + a.size() + b.size(),
            QfFormula::Not(inner) => 1 + inner.size(),
            QfFormula::And(l, r) | QfFormula::Or(l, r) => 1 + l.size() + r.size(),
        }
    }

    fn max_term(&self, pick_var: bool) -> Option<usize> {
        let term = |t: &Term| match (t, pick_var) {
            (Term::Var(j), true) => Some(*j),
            (Term::Param(i), false) => Some(*i),
            _ => None,
        };
        match self {
            QfFormula::Atom { args, .. } => args.iter().filter_map(term).max(),
            QfFormula::Eq(a, b) => term(a).max(term(b)),
            QfFormula::Not(inner) => inner.max_term(pick_var),
            QfFormula::And(l, r) | QfFormula::Or(l, r) => {
                l.max_term(pick_var).max(r.max_term(pick_var))
            }
        }
    }

    /// Number of free variables: 1 + the largest variable index mentioned.
    pub fn free_var_count(&self) -> usize {
        self.max_term(true).map_or(0, |j| j + 1)
    }

    /// Number of parameters required: 1 + the largest parameter index.
    pub fn param_count(&self) -> usize {
        self.max_term(false).map_or(0, |i| i + 1)
    }

    /// Total, deterministic evaluation. `params` must cover `param_count()`
    /// and `tuple` must cover `free_var_count()`.
    pub fn eval<S: AtomEval + ?Sized>(&self, structure: &S, params: &[u64], tuple: &[u64]) -> bool {
        match self {
            QfFormula::Atom { rel, args } => {
                let resolved: Vec<u64> =
                    args.iter().map(|t| t.resolve(params, tuple)).collect();
                structure.eval_atom(*rel, &resolved)
            }
            QfFormula::Eq(a, b) => a.resolve(params, tuple) == b.resolve(params, tuple),
            QfFormula::Not(inner) => !inner.eval(structure, params, tuple),
            QfFormula::And(l, r) => {
                l.eval(structure, params, tuple) && r.eval(structure, params, tuple)
            }
            QfFormula::Or(l, r) => {
                l.eval(structure, params, tuple) || r.eval(structure, params, tuple)
            }
        }
    }

    /// Human-readable rendering, used in logs and JSON exports.
    pub fn render(&self, signature: &Signature) -> String {
        match self {
            QfFormula::Atom { rel, args } => {
                let args: Vec<String> = args.iter().map(render_term).collect();
                format!("{}({})", signature.relations()[*rel].name, args.join(","))
            }
            QfFormula::Eq(a, b) => format!("{}={}", render_term(a), render_term(b)),
            QfFormula::Not(inner) => format!("!{}", inner.render(signature)),
            QfFormula::And(l, r) => {
                format!("({} & {})", l.render(signature), r.render(signature))
            }
            QfFormula::Or(l, r) => {
                format!("({} | {})", l.render(signature), r.render(signature))
            }
        }
    }
}

fn render_term(t: &Term) -> String {
    match t {
        Term::Var(j) => format!("y{}", j + 1),
        Term::Param(i) => format!("a{i}"),
    }
}

/// Oracles a formula can be evaluated against.
pub trait AtomEval {
    fn signature(&self) -> &Signature;
    fn eval_atom(&self, rel: usize, args: &[u64]) -> bool;
}

impl AtomEval for StructureOracle {
    fn signature(&self) -> &Signature {
        self.signature()
    }
    fn eval_atom(&self, rel: usize, args: &[u64]) -> bool {
        self.holds_at(rel, args)
    }
}

impl AtomEval for StructTable {
    fn signature(&self) -> &Signature {
        self.signature()
    }
    fn eval_atom(&self, rel: usize, args: &[u64]) -> bool {
        self.holds_at(rel, args)
    }
}

/// Lazily materialized canonical enumeration of all formulas over one
/// signature. Index i is the i-th formula in (size, free-variable count,
/// generation) order.
pub struct FormulaEnumerator {
    signature: Signature,
    /// Finalized formula lists per size, `by_size[s]` for size s.
    by_size: Vec<Vec<QfFormula>>,
    flat: Vec<QfFormula>,
}

impl FormulaEnumerator {
    pub fn new(signature: Signature) -> Self {
        FormulaEnumerator { signature, by_size: vec![Vec::new(), Vec::new()], flat: Vec::new() }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// The formula at a canonical index, extending the enumeration on
    /// demand.
    pub fn get(&mut self, index: usize) -> &QfFormula {
        while self.flat.len() <= index {
            let size = self.by_size.len();
            let class = self.generate_size(size);
            self.flat.extend(class.iter().cloned());
            self.by_size.push(class);
        }
        &self.flat[index]
    }

    /// All formulas of exactly this size in generation order, then stably
    /// sorted so fewer free variables come first.
    fn generate_size(&self, size: usize) -> Vec<QfFormula> {
        let mut out = Vec::new();
        // Relation atoms: distribute size - 1 over the argument slots.
        for (rel, decl) in self.signature.relations().iter().enumerate() {
            if size < 1 + decl.arity {
                continue;
            }
            for split in compositions(size - 1, decl.arity) {
                for args in term_assignments(&split) {
                    out.push(QfFormula::Atom { rel, args });
                }
            }
        }
        // Equalities.
        if size >= 3 {
            for split in compositions(size - 1, 2) {
                for args in term_assignments(&split) {
                    out.push(QfFormula::Eq(args[0], args[1]));
                }
            }
        }
        // Negations wrap every formula one size down.
        if size >= 2 {
            for inner in &self.by_size[size - 1] {
                out.push(QfFormula::Not(Box::new(inner.clone())));
            }
        }
        // Binary connectives over all smaller size splits.
        for left_size in 1..size.saturating_sub(1) {
            let right_size = size - 1 - left_size;
            for l in &self.by_size[left_size] {
                for r in &self.by_size[right_size] {
                    out.push(QfFormula::And(Box::new(l.clone()), Box::new(r.clone())));
                }
            }
        }
        for left_size in 1..size.saturating_sub(1) {
            let right_size = size - 1 - left_size;
            for l in &self.by_size[left_size] {
                for r in &self.by_size[right_size] {
                    out.push(QfFormula::Or(Box::new(l.clone()), Box::new(r.clone())));
                }
            }
        }
        out.sort_by_key(|f| f.free_var_count());
        out
    }
}

/// All ways to write `total` as an ordered sum of `parts` positive numbers,
/// lexicographically.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for rest in compositions(total - first, parts - 1) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// For each slot size, the two candidate terms (variable first), expanded
/// as a cartesian product in slot-major order.
fn term_assignments(split: &[usize]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for &slot in split {
        let choices = [Term::Var(slot - 1), Term::Param(slot - 1)];
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&t| {
                    let mut next = prefix.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph() -> StructureOracle {
        StructureOracle::from_fn(Signature::binary("R"), |_, args| {
            args[0].abs_diff(args[1]) == 1
        })
    }

    #[test]
    fn sizes_and_counts() {
        let r_xy = QfFormula::Atom { rel: 0, args: vec![Term::Var(0), Term::Var(1)] };
        assert_eq!(r_xy.size(), 4);
        assert_eq!(r_xy.free_var_count(), 2);
        assert_eq!(r_xy.param_count(), 0);

        let mixed = QfFormula::Atom { rel: 0, args: vec![Term::Var(0), Term::Param(2)] };
        assert_eq!(mixed.size(), 5);
        assert_eq!(mixed.param_count(), 3);
    }

    #[test]
    fn unary_predicate_enumeration_smallest_first() {
        // Size 2 is the whole first class: the parameter atom (0 free
        // variables) sorts before the variable atom.
        let mut e = FormulaEnumerator::new(Signature::unary("P"));
        assert_eq!(e.get(0), &QfFormula::Atom { rel: 0, args: vec![Term::Param(0)] });
        assert_eq!(e.get(1), &QfFormula::Atom { rel: 0, args: vec![Term::Var(0)] });
        assert!(e.get(2).size() > 2);
    }

    #[test]
    fn binary_enumeration_prefix() {
        let sig = Signature::binary("R");
        let mut e = FormulaEnumerator::new(sig.clone());
        let rendered: Vec<String> =
            (0..30).map(|i| e.get(i).clone()).map(|f| f.render(&sig)).collect();
        // The diagonal atom (size 3) precedes the edge atom (size 4), and
        // within size 4 the one-variable negations precede it.
        let idx_self = rendered.iter().position(|s| s == "R(y1,y1)").unwrap();
        let idx_not_self = rendered.iter().position(|s| s == "!R(y1,y1)").unwrap();
        let idx_edge = rendered.iter().position(|s| s == "R(y1,y2)").unwrap();
        assert!(idx_self < idx_not_self);
        assert!(idx_not_self < idx_edge);
    }

    #[test]
    fn enumeration_is_injective_and_size_ordered() {
        let mut e = FormulaEnumerator::new(Signature::binary("R"));
        let mut seen = std::collections::HashSet::new();
        let mut last_size = 0;
        for i in 0..600 {
            let f = e.get(i).clone();
            assert!(seen.insert(f.clone()), "formula repeated at index {i}: {f:?}");
            assert!(f.size() >= last_size, "size order violated at {i}");
            last_size = last_size.max(f.size());
        }
    }

    #[test]
    fn evaluation_matches_oracle() {
        let m = path_graph();
        let edge = QfFormula::Atom { rel: 0, args: vec![Term::Var(0), Term::Var(1)] };
        assert!(edge.eval(&m, &[], &[0, 1]));
        assert!(!edge.eval(&m, &[], &[0, 2]));

        let with_param = QfFormula::Atom { rel: 0, args: vec![Term::Var(0), Term::Param(0)] };
        assert!(with_param.eval(&m, &[5], &[4]));
        assert!(!with_param.eval(&m, &[5], &[3]));

        let not_eq = QfFormula::Not(Box::new(QfFormula::Eq(Term::Var(0), Term::Var(1))));
        assert!(not_eq.eval(&m, &[], &[1, 2]));
        assert!(!not_eq.eval(&m, &[], &[2, 2]));
    }
}
