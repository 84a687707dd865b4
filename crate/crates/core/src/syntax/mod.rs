//! Signatures, terms, formula ASTs and the purely syntactic operations:
//! substitution of constants for variables, abstraction of constants back
//! into variables, quantification over constants, and renamings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod gen;
mod parse;
mod print;

pub use parse::parse_formula;
pub use print::print_formula;

/// Words reserved by the formula grammar; never valid identifiers.
pub const KEYWORDS: &[&str] = &["forall", "exists"];

/// `true` iff `s` is a grammar identifier: a letter followed by letters,
/// digits or underscores, and not a reserved word.
pub fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown predicate `{0}`")]
    UnknownPred(String),
    #[error("predicate `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("predicate `{0}` declared with arity 0")]
    ZeroArity(String),
    #[error("equality atom used, but the signature has no equality")]
    EqualityNotInLanguage,
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
    #[error("predicate symbol `{0}` used in term position")]
    PredAsTerm(String),
    #[error("name `{0}` occurs in more than one name space")]
    NameSpaceClash(String),
    #[error("constant `{0}` is not fresh for the formula")]
    NonFreshConstant(String),
    #[error("`{0}` occurs twice in the binding")]
    DuplicateInBinding(String),
    #[error("target variable `{0}` would be captured (occurs in the formula)")]
    VarCapture(String),
    #[error("symbol `{0}` is not covered by the renaming")]
    NotCovered(String),
    #[error("renaming is not a bijection: `{0}` is hit twice")]
    NotInjective(String),
    #[error("constant `{0}` is missing from the signature")]
    UnknownConst(String),
}

/// A relational signature: predicate symbols with positive arities,
/// constant symbols, and a flag selecting the equality-enriched atom
/// family.  Predicate, constant and variable names live in one lexical
/// space; classification of an identifier is by signature membership.
#[derive(
    Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Signature {
    #[serde(default)]
    pub preds: BTreeMap<String, usize>,
    #[serde(default)]
    pub consts: BTreeSet<String>,
    #[serde(default)]
    pub equality: bool,
}

impl Signature {
    pub fn new<P, C>(preds: P, consts: C, equality: bool) -> Result<Self, SyntaxError>
    where
        P: IntoIterator<Item = (String, usize)>,
        C: IntoIterator<Item = String>,
    {
        let sig = Signature {
            preds: preds.into_iter().collect(),
            consts: consts.into_iter().collect(),
            equality,
        };
        sig.check_names()?;
        Ok(sig)
    }

    /// Validates identifier syntax, positive arities and name-space
    /// disjointness.
    pub fn check_names(&self) -> Result<(), SyntaxError> {
        for (p, &ar) in &self.preds {
            if !is_valid_ident(p) {
                return Err(SyntaxError::BadName(p.clone()));
            }
            if ar == 0 {
                return Err(SyntaxError::ZeroArity(p.clone()));
            }
        }
        for c in &self.consts {
            if !is_valid_ident(c) {
                return Err(SyntaxError::BadName(c.clone()));
            }
            if self.preds.contains_key(c) {
                return Err(SyntaxError::NameSpaceClash(c.clone()));
            }
        }
        Ok(())
    }

    /// `self` ⊆ `other`: every predicate with the same arity, every
    /// constant, and no equality unless `other` has it.
    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        self.preds
            .iter()
            .all(|(p, a)| other.preds.get(p) == Some(a))
            && self.consts.is_subset(&other.consts)
            && (!self.equality || other.equality)
    }

    /// Extends the constant pool with fresh constants.
    pub fn with_consts<I: IntoIterator<Item = String>>(
        &self,
        extra: I,
    ) -> Result<Signature, SyntaxError> {
        let mut out = self.clone();
        for c in extra {
            if !is_valid_ident(&c) {
                return Err(SyntaxError::BadName(c));
            }
            if out.preds.contains_key(&c) {
                return Err(SyntaxError::NameSpaceClash(c));
            }
            if !out.consts.insert(c.clone()) {
                return Err(SyntaxError::NonFreshConstant(c));
            }
        }
        Ok(out)
    }

    /// Same signature with the equality flag replaced.
    pub fn with_equality(&self, equality: bool) -> Signature {
        Signature {
            equality,
            ..self.clone()
        }
    }
}

/// Deterministic fresh names: the `n` smallest unused names of the scheme
/// `c1, c2, …`.
pub fn fresh_consts(n: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    fresh_names("c", n, avoid)
}

/// Deterministic fresh names: the `n` smallest unused names of the scheme
/// `x1, x2, …`.
pub fn fresh_vars(n: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    fresh_names("x", n, avoid)
}

fn fresh_names(stem: &str, n: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1usize;
    while out.len() < n {
        let cand = format!("{stem}{i}");
        if !avoid.contains(&cand) {
            out.push(cand);
        }
        i += 1;
    }
    out
}

/// A term is a variable or a constant occurrence; which one an identifier
/// denotes is fixed at parse time by signature membership.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Formula AST.  Negation and the biconditional are not nodes: `~f` is
/// `Implies(f, Bottom)` and `f <-> g` desugars at parse time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Bottom,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl Formula {
    pub fn atom<S: Into<String>>(p: S, terms: Vec<Term>) -> Formula {
        Formula::Atom(p.into(), terms)
    }
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }
    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }
    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }
    pub fn not(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bottom)
    }
    pub fn forall<S: Into<String>>(x: S, f: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(f))
    }
    pub fn exists<S: Into<String>>(x: S, f: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(f))
    }

    /// Conjunction of a list; the empty conjunction is `⊥ → ⊥`.
    pub fn big_and<I: IntoIterator<Item = Formula>>(fs: I) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::implies(Formula::Bottom, Formula::Bottom),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; the empty disjunction is `⊥`.
    pub fn big_or<I: IntoIterator<Item = Formula>>(fs: I) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::Bottom,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Free variables, by structural induction.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, shadow: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom(_, ts) => {
                    for t in ts {
                        if let Term::Var(v) = t {
                            if !shadow.iter().any(|s| s == v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Eq(l, r) => {
                    for t in [l, r] {
                        if let Term::Var(v) = t {
                            if !shadow.iter().any(|s| s == v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Bottom => {}
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                    go(l, shadow, out);
                    go(r, shadow, out);
                }
                Formula::Forall(x, b) | Formula::Exists(x, b) => {
                    shadow.push(x.clone());
                    go(b, shadow, out);
                    shadow.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Variables bound by some quantifier occurrence.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Forall(x, _) | Formula::Exists(x, _) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    /// Constant symbols occurring in the formula.
    pub fn consts_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            let terms: &[Term] = match f {
                Formula::Atom(_, ts) => ts,
                Formula::Eq(l, r) => {
                    for t in [l, r] {
                        if let Term::Const(c) = t {
                            out.insert(c.clone());
                        }
                    }
                    &[]
                }
                _ => &[],
            };
            for t in terms {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        });
        out
    }

    /// Every identifier occurring anywhere: predicates, constants,
    /// free and bound variables.
    pub fn all_idents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Atom(p, ts) => {
                out.insert(p.clone());
                for t in ts {
                    out.insert(t.name().to_string());
                }
            }
            Formula::Eq(l, r) => {
                out.insert(l.name().to_string());
                out.insert(r.name().to_string());
            }
            Formula::Forall(x, _) | Formula::Exists(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.walk(f),
            _ => {}
        }
    }

    /// Connective-quantifying rank: atoms and `⊥` have rank 0, `∧`/`∨`
    /// take the maximum of their children, and `→`/`∀`/`∃` add one.
    pub fn rank(&self) -> u32 {
        match self {
            Formula::Atom(..) | Formula::Eq(..) | Formula::Bottom => 0,
            Formula::And(l, r) | Formula::Or(l, r) => l.rank().max(r.rank()),
            Formula::Implies(l, r) => 1 + l.rank().max(r.rank()),
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.rank(),
        }
    }

    /// Node count; the yardstick for deterministic enumeration.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(..) | Formula::Eq(..) | Formula::Bottom => 1,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                1 + l.size() + r.size()
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.size(),
        }
    }

    /// Well-formedness over `sig`: known predicates with matching arity,
    /// known constants, equality only when the signature has it, and no
    /// name bleeding between the variable space and the signature.
    pub fn check(&self, sig: &Signature) -> Result<(), SyntaxError> {
        let check_term = |t: &Term| match t {
            Term::Const(c) => {
                if sig.consts.contains(c) {
                    Ok(())
                } else {
                    Err(SyntaxError::UnknownConst(c.clone()))
                }
            }
            Term::Var(v) => {
                if sig.preds.contains_key(v) {
                    Err(SyntaxError::PredAsTerm(v.clone()))
                } else if sig.consts.contains(v) {
                    Err(SyntaxError::NameSpaceClash(v.clone()))
                } else if !is_valid_ident(v) {
                    Err(SyntaxError::BadName(v.clone()))
                } else {
                    Ok(())
                }
            }
        };
        match self {
            Formula::Atom(p, ts) => {
                let Some(&ar) = sig.preds.get(p) else {
                    return Err(SyntaxError::UnknownPred(p.clone()));
                };
                if ar != ts.len() {
                    return Err(SyntaxError::ArityMismatch {
                        name: p.clone(),
                        expected: ar,
                        got: ts.len(),
                    });
                }
                ts.iter().try_for_each(check_term)
            }
            Formula::Eq(l, r) => {
                if !sig.equality {
                    return Err(SyntaxError::EqualityNotInLanguage);
                }
                check_term(l)?;
                check_term(r)
            }
            Formula::Bottom => Ok(()),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.check(sig)?;
                r.check(sig)
            }
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                check_term(&Term::Var(x.clone()))?;
                b.check(sig)
            }
        }
    }

    /// Simultaneously replaces every free occurrence of each bound
    /// variable by its constant.  Constants must be fresh for the formula
    /// and variables pairwise distinct.
    pub fn substitute_constants(
        &self,
        binding: &[(String, String)],
    ) -> Result<Formula, SyntaxError> {
        let idents = self.all_idents();
        let mut seen = BTreeSet::new();
        for (x, c) in binding {
            if !seen.insert(x.clone()) {
                return Err(SyntaxError::DuplicateInBinding(x.clone()));
            }
            if idents.contains(c) {
                return Err(SyntaxError::NonFreshConstant(c.clone()));
            }
            if !is_valid_ident(c) {
                return Err(SyntaxError::BadName(c.clone()));
            }
            if !is_valid_ident(x) {
                return Err(SyntaxError::BadName(x.clone()));
            }
        }
        fn go(f: &Formula, binding: &[(String, String)], shadow: &mut Vec<String>) -> Formula {
            let map_term = |t: &Term, shadow: &Vec<String>| match t {
                Term::Var(v) if !shadow.iter().any(|s| s == v) => {
                    match binding.iter().find(|(x, _)| x == v) {
                        Some((_, c)) => Term::Const(c.clone()),
                        None => t.clone(),
                    }
                }
                _ => t.clone(),
            };
            match f {
                Formula::Atom(p, ts) => {
                    Formula::Atom(p.clone(), ts.iter().map(|t| map_term(t, shadow)).collect())
                }
                Formula::Eq(l, r) => Formula::Eq(map_term(l, shadow), map_term(r, shadow)),
                Formula::Bottom => Formula::Bottom,
                Formula::And(l, r) => {
                    Formula::and(go(l, binding, shadow), go(r, binding, shadow))
                }
                Formula::Or(l, r) => Formula::or(go(l, binding, shadow), go(r, binding, shadow)),
                Formula::Implies(l, r) => {
                    Formula::implies(go(l, binding, shadow), go(r, binding, shadow))
                }
                Formula::Forall(x, b) => {
                    shadow.push(x.clone());
                    let b = go(b, binding, shadow);
                    shadow.pop();
                    Formula::forall(x.clone(), b)
                }
                Formula::Exists(x, b) => {
                    shadow.push(x.clone());
                    let b = go(b, binding, shadow);
                    shadow.pop();
                    Formula::exists(x.clone(), b)
                }
            }
        }
        Ok(go(self, binding, &mut Vec::new()))
    }

    /// Replaces every occurrence of each constant by a variable; the
    /// inverse direction of [`Formula::substitute_constants`].  Target
    /// variables must avoid all variables of the formula.
    pub fn abstract_constants(
        &self,
        binding: &[(String, String)],
    ) -> Result<Formula, SyntaxError> {
        let fv = self.free_vars();
        let bv = self.bound_vars();
        let mut seen_c = BTreeSet::new();
        let mut seen_v = BTreeSet::new();
        for (c, y) in binding {
            if !seen_c.insert(c.clone()) {
                return Err(SyntaxError::DuplicateInBinding(c.clone()));
            }
            if !seen_v.insert(y.clone()) {
                return Err(SyntaxError::DuplicateInBinding(y.clone()));
            }
            if fv.contains(y) || bv.contains(y) {
                return Err(SyntaxError::VarCapture(y.clone()));
            }
            if !is_valid_ident(y) {
                return Err(SyntaxError::BadName(y.clone()));
            }
        }
        let map_term = |t: &Term| match t {
            Term::Const(c) => match binding.iter().find(|(d, _)| d == c) {
                Some((_, y)) => Term::Var(y.clone()),
                None => t.clone(),
            },
            _ => t.clone(),
        };
        Ok(self.map_terms(&map_term))
    }

    fn map_terms(&self, m: &impl Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(m).collect()),
            Formula::Eq(l, r) => Formula::Eq(m(l), m(r)),
            Formula::Bottom => Formula::Bottom,
            Formula::And(l, r) => Formula::and(l.map_terms(m), r.map_terms(m)),
            Formula::Or(l, r) => Formula::or(l.map_terms(m), r.map_terms(m)),
            Formula::Implies(l, r) => Formula::implies(l.map_terms(m), r.map_terms(m)),
            Formula::Forall(x, b) => Formula::forall(x.clone(), b.map_terms(m)),
            Formula::Exists(x, b) => Formula::exists(x.clone(), b.map_terms(m)),
        }
    }

    /// Quantifies directly over a constant: returns `∃x.ψ` (or `∀x.ψ`)
    /// where `ψ` is the formula with `c` abstracted into a fresh `x`.
    pub fn quantify_constant(&self, c: &str, kind: QuantKind) -> Formula {
        let avoid = self.all_idents();
        let x = fresh_vars(1, &avoid).pop().expect("fresh name");
        let body = self.map_terms(&|t| match t {
            Term::Const(d) if d == c => Term::Var(x.clone()),
            _ => t.clone(),
        });
        match kind {
            QuantKind::Exists => Formula::exists(x, body),
            QuantKind::Forall => Formula::forall(x, body),
        }
    }

    /// Applies a renaming to every predicate and constant occurrence.
    pub fn rename(&self, r: &RenamingMap) -> Result<Formula, SyntaxError> {
        for p in self.preds_used().keys() {
            if !r.pred_map.contains_key(p) {
                return Err(SyntaxError::NotCovered(p.clone()));
            }
        }
        for c in self.consts_used() {
            if !r.const_map.contains_key(&c) {
                return Err(SyntaxError::NotCovered(c));
            }
        }
        let fv = self.free_vars();
        let bv = self.bound_vars();
        for tgt in r.pred_map.values().chain(r.const_map.values()) {
            if fv.contains(tgt) || bv.contains(tgt) {
                return Err(SyntaxError::NameSpaceClash(tgt.clone()));
            }
        }
        let map_term = |t: &Term| match t {
            Term::Const(c) => Term::Const(r.const_map[c].clone()),
            _ => t.clone(),
        };
        fn go(f: &Formula, r: &RenamingMap, m: &impl Fn(&Term) -> Term) -> Formula {
            match f {
                Formula::Atom(p, ts) => {
                    Formula::Atom(r.pred_map[p].clone(), ts.iter().map(m).collect())
                }
                Formula::Eq(l, rr) => Formula::Eq(m(l), m(rr)),
                Formula::Bottom => Formula::Bottom,
                Formula::And(l, rr) => Formula::and(go(l, r, m), go(rr, r, m)),
                Formula::Or(l, rr) => Formula::or(go(l, r, m), go(rr, r, m)),
                Formula::Implies(l, rr) => Formula::implies(go(l, r, m), go(rr, r, m)),
                Formula::Forall(x, b) => Formula::forall(x.clone(), go(b, r, m)),
                Formula::Exists(x, b) => Formula::exists(x.clone(), go(b, r, m)),
            }
        }
        Ok(go(self, r, &map_term))
    }

    /// Predicates used, with the arity of their first occurrence.
    pub fn preds_used(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.walk(&mut |f| {
            if let Formula::Atom(p, ts) = f {
                out.entry(p.clone()).or_insert(ts.len());
            }
        });
        out
    }

    /// The least signature over which the formula is well-formed.
    pub fn minimal_signature(&self) -> Signature {
        let mut has_eq = false;
        self.walk(&mut |f| {
            if matches!(f, Formula::Eq(..)) {
                has_eq = true;
            }
        });
        Signature {
            preds: self.preds_used(),
            consts: self.consts_used(),
            equality: has_eq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantKind {
    Exists,
    Forall,
}

/// An arity-preserving bijective renaming of predicate and constant
/// symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenamingMap {
    pub pred_map: BTreeMap<String, String>,
    pub const_map: BTreeMap<String, String>,
}

impl RenamingMap {
    pub fn identity(sig: &Signature) -> RenamingMap {
        RenamingMap {
            pred_map: sig.preds.keys().map(|p| (p.clone(), p.clone())).collect(),
            const_map: sig.consts.iter().map(|c| (c.clone(), c.clone())).collect(),
        }
    }

    /// Checks that the maps are total on `source` and bijective, and
    /// returns the image signature.
    pub fn validate(&self, source: &Signature) -> Result<Signature, SyntaxError> {
        let mut preds = BTreeMap::new();
        let mut hit = BTreeSet::new();
        for (p, &ar) in &source.preds {
            let Some(q) = self.pred_map.get(p) else {
                return Err(SyntaxError::NotCovered(p.clone()));
            };
            if !hit.insert(q.clone()) {
                return Err(SyntaxError::NotInjective(q.clone()));
            }
            preds.insert(q.clone(), ar);
        }
        let mut consts = BTreeSet::new();
        let mut hit_c = BTreeSet::new();
        for c in &source.consts {
            let Some(d) = self.const_map.get(c) else {
                return Err(SyntaxError::NotCovered(c.clone()));
            };
            if !hit_c.insert(d.clone()) {
                return Err(SyntaxError::NotInjective(d.clone()));
            }
            consts.insert(d.clone());
        }
        Signature::new(preds, consts, source.equality)
    }

    pub fn inverse(&self) -> RenamingMap {
        RenamingMap {
            pred_map: self
                .pred_map
                .iter()
                .map(|(k, v)| (v.clone(), k.clone()))
                .collect(),
            const_map: self
                .const_map
                .iter()
                .map(|(k, v)| (v.clone(), k.clone()))
                .collect(),
        }
    }
}

/// Alpha-canonical normal form for closed sentences: bound variables are
/// renamed to `x1, x2, …` by binder depth and the children of `∧`/`∨`
/// chains (and of `≡`) are flattened and sorted.  Two sentences differing
/// only by bound-variable names or commutative order normalize equal.
pub fn normalize_sentence(f: &Formula) -> Formula {
    debug_assert!(f.free_vars().is_empty(), "normalize_sentence wants a sentence");
    fn go(f: &Formula, depth: usize, ren: &mut Vec<(String, String)>) -> Formula {
        match f {
            Formula::Atom(p, ts) => Formula::Atom(
                p.clone(),
                ts.iter().map(|t| ren_term(t, ren)).collect(),
            ),
            Formula::Eq(l, r) => {
                let (l, r) = (ren_term(l, ren), ren_term(r, ren));
                if l <= r {
                    Formula::Eq(l, r)
                } else {
                    Formula::Eq(r, l)
                }
            }
            Formula::Bottom => Formula::Bottom,
            Formula::And(..) => {
                let mut parts = Vec::new();
                flatten(f, true, depth, ren, &mut parts);
                parts.sort();
                Formula::big_and(parts)
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                flatten(f, false, depth, ren, &mut parts);
                parts.sort();
                Formula::big_or(parts)
            }
            Formula::Implies(l, r) => Formula::implies(go(l, depth, ren), go(r, depth, ren)),
            Formula::Forall(x, b) => {
                let fresh = format!("x{}", depth + 1);
                ren.push((x.clone(), fresh.clone()));
                let b = go(b, depth + 1, ren);
                ren.pop();
                Formula::forall(fresh, b)
            }
            Formula::Exists(x, b) => {
                let fresh = format!("x{}", depth + 1);
                ren.push((x.clone(), fresh.clone()));
                let b = go(b, depth + 1, ren);
                ren.pop();
                Formula::exists(fresh, b)
            }
        }
    }
    fn flatten(
        f: &Formula,
        conj: bool,
        depth: usize,
        ren: &mut Vec<(String, String)>,
        out: &mut Vec<Formula>,
    ) {
        match (f, conj) {
            (Formula::And(l, r), true) | (Formula::Or(l, r), false) => {
                flatten(l, conj, depth, ren, out);
                flatten(r, conj, depth, ren, out);
            }
            _ => out.push(go(f, depth, ren)),
        }
    }
    fn ren_term(t: &Term, ren: &[(String, String)]) -> Term {
        match t {
            Term::Var(v) => {
                // Innermost binder wins, matching shadowing.
                for (old, new) in ren.iter().rev() {
                    if old == v {
                        return Term::Var(new.clone());
                    }
                }
                t.clone()
            }
            _ => t.clone(),
        }
    }
    go(f, 0, &mut Vec::new())
}
