//! World-object asimulations between pointed models.
//!
//! An asimulation relates positions `(w; ᾱ)` of one model to positions
//! `(v; β̄)` of the other, in both directions.  Four transfer conditions
//! close the relation: every atomic sentence over the signature constants
//! and the tuple that holds at the source holds at the target (`atom`);
//! an order step on the target side is answered by one on the source
//! side, keeping both orientations of the stepped pair (`s-back`); and
//! tuples extend by one element picked on the source side (`obj-forth`)
//! or on a target successor (`obj-back`).  Positive sentences transfer
//! along any such relation, which makes asimulations the workbench's
//! notion of directed equivalence.
//!
//! [`check_asimulation_raw`] verifies a user-supplied finite pair set
//! literally against the conditions.  Because a finite set cannot contain
//! extensions of its longest tuples, pairs at the maximum tuple length
//! are exempt from the two extension conditions: a passing set is an
//! asimulation *up to its tuple budget*.  Existence questions go through
//! the position engine in [`quotient`]; the classical derived relations
//! live in [`derived`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{KripkeModel, ModelError};
use crate::semantics::{check_admissible, EvalError, Logic};

mod derived;
mod quotient;

pub use derived::{project_subtuple, relation_from_type_inclusion, restrict_generated};
pub use quotient::{
    asim_exists, bounded_game_exists, expand_relation, greatest_asimulation, AsimRelation,
    Position, POSITION_BUDGET,
};

/// Which model the source side of a pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dir {
    #[serde(rename = "1->2")]
    OneTwo,
    #[serde(rename = "2->1")]
    TwoOne,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::OneTwo => Dir::TwoOne,
            Dir::TwoOne => Dir::OneTwo,
        }
    }

    /// 0 for `1->2`, 1 for `2->1`; indexes `[m1, m2]`-shaped tables.
    pub(crate) fn index(self) -> usize {
        match self {
            Dir::OneTwo => 0,
            Dir::TwoOne => 1,
        }
    }

    pub(crate) fn of(index: usize) -> Dir {
        if index == 0 {
            Dir::OneTwo
        } else {
            Dir::TwoOne
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::OneTwo => "1->2",
            Dir::TwoOne => "2->1",
        })
    }
}

/// One direction-tagged pair `(from_world; from_tuple) A (to_world; to_tuple)`.
///
/// Worlds and elements are named; the source side lives in model 1 when
/// `dir` is `1->2` and in model 2 otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TuplePair {
    pub dir: Dir,
    pub from_world: String,
    pub from_tuple: Vec<String>,
    pub to_world: String,
    pub to_tuple: Vec<String>,
}

impl TuplePair {
    pub fn new(
        dir: Dir,
        from_world: impl Into<String>,
        from_tuple: &[&str],
        to_world: impl Into<String>,
        to_tuple: &[&str],
    ) -> TuplePair {
        TuplePair {
            dir,
            from_world: from_world.into(),
            from_tuple: from_tuple.iter().map(|s| s.to_string()).collect(),
            to_world: to_world.into(),
            to_tuple: to_tuple.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for TuplePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}; {}) -> ({}; {})",
            self.dir,
            self.from_world,
            self.from_tuple.join(","),
            self.to_world,
            self.to_tuple.join(",")
        )
    }
}

/// A finite asimulation candidate: a set of [`TuplePair`]s.
///
/// Serializes as a bare JSON list of pair records, the on-disk format
/// accepted by the `asim` subcommand.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawAsimulation {
    pub pairs: Vec<TuplePair>,
}

impl RawAsimulation {
    pub fn new(pairs: Vec<TuplePair>) -> RawAsimulation {
        RawAsimulation { pairs }
    }

    pub fn from_json(text: &str) -> Result<RawAsimulation, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pair records serialize")
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: &TuplePair) -> bool {
        self.pairs.contains(pair)
    }

    /// The same pair set read with the two models' roles exchanged: a
    /// `1->2` pair becomes a `2->1` pair and vice versa.  Point data is
    /// untouched, so a relation built for `(m1, m2)` can be checked as a
    /// candidate between `(m2, m1)`.
    pub fn flip(&self) -> RawAsimulation {
        RawAsimulation {
            pairs: self
                .pairs
                .iter()
                .map(|p| TuplePair {
                    dir: p.dir.flip(),
                    ..p.clone()
                })
                .collect(),
        }
    }
}

/// The conditions a pair set must satisfy, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsimCondition {
    Elem,
    Atom,
    SBack,
    ObjForth,
    ObjBack,
}

impl fmt::Display for AsimCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsimCondition::Elem => "elem",
            AsimCondition::Atom => "atom",
            AsimCondition::SBack => "s-back",
            AsimCondition::ObjForth => "obj-forth",
            AsimCondition::ObjBack => "obj-back",
        })
    }
}

/// The first condition a candidate set fails, with the offending pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: AsimCondition,
    pub pair: TuplePair,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition ({}) fails at `{}`: {}",
            self.condition, self.pair, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the two models must share one signature")]
    SignatureMismatch,
    #[error("malformed pair `{pair}`: {why}")]
    MalformedPair { pair: String, why: String },
    #[error("start tuples have different lengths: {left} vs {right}")]
    StartLengths { left: usize, right: usize },
    #[error("{positions} positions exceed the budget of {limit}")]
    Budget { positions: u64, limit: u64 },
    #[error("index {0} is out of range for every pair")]
    InvalidIndex(usize),
    #[error("no pair runs from `{from}` to `{to}`")]
    MissingStart { from: String, to: String },
}

/// All `k`-sequences (with repetition) over `0..n`, in lexicographic
/// order; `k = 0` yields the single empty sequence.
pub(crate) fn index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// The both-direction diagonal relation on `m`: every world paired with
/// itself under every tuple of length ≤ `max_len`.  Mostly a testing aid.
pub fn identity_asimulation(m: &KripkeModel, max_len: usize) -> RawAsimulation {
    let mut pairs = Vec::new();
    for dir in [Dir::OneTwo, Dir::TwoOne] {
        for w in 0..m.n_worlds() {
            let name = m.world_name(w);
            for l in 0..=max_len {
                for t in index_tuples(m.domain(w).len(), l) {
                    let tuple: Vec<String> =
                        t.iter().map(|&e| m.elem_name(w, e as u32).to_string()).collect();
                    pairs.push(TuplePair {
                        dir,
                        from_world: name.to_string(),
                        from_tuple: tuple.clone(),
                        to_world: name.to_string(),
                        to_tuple: tuple,
                    });
                }
            }
        }
    }
    RawAsimulation { pairs }
}

/// A pair resolved to world and element indices.
struct Resolved {
    dir: usize,
    w: usize,
    at: Vec<u32>,
    v: usize,
    bt: Vec<u32>,
}

type PairKey = (usize, usize, Vec<u32>, usize, Vec<u32>);

impl Resolved {
    fn key(&self) -> PairKey {
        (
            self.dir,
            self.w,
            self.at.clone(),
            self.v,
            self.bt.clone(),
        )
    }
}

fn resolve_side(m: &KripkeModel, world: &str, tuple: &[String]) -> Result<(usize, Vec<u32>), String> {
    let w = m
        .world_index(world)
        .ok_or_else(|| format!("unknown world `{world}`"))?;
    let mut out = Vec::with_capacity(tuple.len());
    for local in tuple {
        out.push(
            m.elem_index(w, local)
                .ok_or_else(|| format!("no element `{local}` at `{world}`"))?,
        );
    }
    Ok((w, out))
}

fn resolve_pair(models: [&KripkeModel; 2], p: &TuplePair) -> Result<Resolved, AsimError> {
    let bad = |why: String| AsimError::MalformedPair {
        pair: p.to_string(),
        why,
    };
    if p.from_tuple.len() != p.to_tuple.len() {
        return Err(bad(format!(
            "tuple lengths differ ({} vs {})",
            p.from_tuple.len(),
            p.to_tuple.len()
        )));
    }
    let dir = p.dir.index();
    let (w, at) = resolve_side(models[dir], &p.from_world, &p.from_tuple).map_err(&bad)?;
    let (v, bt) = resolve_side(models[1 ^ dir], &p.to_world, &p.to_tuple).map_err(bad)?;
    Ok(Resolved { dir, w, at, v, bt })
}

/// The ground atoms available at a pair: the tuple pairs plus the
/// interpretation of every signature constant on both sides.
fn atom_pairs(
    models: [&KripkeModel; 2],
    dir: usize,
    w: usize,
    v: usize,
    at: &[u32],
    bt: &[u32],
) -> Vec<((u32, u32), String)> {
    let from = models[dir];
    let to = models[1 ^ dir];
    let mut pairs: Vec<((u32, u32), String)> = at
        .iter()
        .zip(bt)
        .enumerate()
        .map(|(i, (&a, &b))| ((a, b), format!("c{}", i + 1)))
        .collect();
    for c in &from.sig().consts {
        let a = from.const_at(w, c).expect("validated constant");
        let b = to.const_at(v, c).expect("validated constant");
        pairs.push(((a, b), c.clone()));
    }
    pairs
}

/// Scans the pair for a false atom transfer; returns the atom's text.
fn atom_defect(
    models: [&KripkeModel; 2],
    eq_on: bool,
    r: &Resolved,
) -> Option<String> {
    let from = models[r.dir];
    let to = models[1 ^ r.dir];
    let pairs = atom_pairs(models, r.dir, r.w, r.v, &r.at, &r.bt);
    for (p, &arity) in &from.sig().preds {
        for sel in index_tuples(pairs.len(), arity) {
            let srcs: Vec<u32> = sel.iter().map(|&i| pairs[i].0 .0).collect();
            let tgts: Vec<u32> = sel.iter().map(|&i| pairs[i].0 .1).collect();
            if from.holds(r.w, p, &srcs) && !to.holds(r.v, p, &tgts) {
                let args: Vec<&str> = sel.iter().map(|&i| pairs[i].1.as_str()).collect();
                return Some(format!("{}({}) holds on the source side only", p, args.join(",")));
            }
        }
    }
    if eq_on {
        for (i, ((s1, t1), n1)) in pairs.iter().enumerate() {
            for ((s2, t2), n2) in &pairs[i + 1..] {
                if s1 == s2 && t1 != t2 {
                    return Some(format!("{n1} = {n2} holds on the source side only"));
                }
            }
        }
    }
    None
}

/// Literal check of a finite pair set against the asimulation conditions.
///
/// The start point `((w1; ā), (w2; b̄))` must appear as a `1->2` pair
/// (`elem`); every pair must transfer atoms and answer target-side order
/// steps (`atom`, `s-back`); and every pair below the set's maximum tuple
/// length must extend (`obj-forth`, `obj-back`).  Returns the first
/// violation in pair order, or `None` when the set passes.  The CD and Bi
/// presentations additionally require both models inside their class.
#[allow(clippy::too_many_arguments)]
pub fn check_asimulation_raw(
    logic: Logic,
    m1: &KripkeModel,
    m2: &KripkeModel,
    a: &RawAsimulation,
    w1: &str,
    a_tuple: &[String],
    w2: &str,
    b_tuple: &[String],
) -> Result<Option<Violation>, AsimError> {
    m1.require_valid()?;
    m2.require_valid()?;
    if m1.sig() != m2.sig() {
        return Err(AsimError::SignatureMismatch);
    }
    check_admissible(logic, m1).map_err(AsimError::Eval)?;
    check_admissible(logic, m2).map_err(AsimError::Eval)?;
    let models = [m1, m2];
    let eq_on = logic.has_equality() && m1.sig().equality;

    if a_tuple.len() != b_tuple.len() {
        return Err(AsimError::StartLengths {
            left: a_tuple.len(),
            right: b_tuple.len(),
        });
    }
    let start = TuplePair {
        dir: Dir::OneTwo,
        from_world: w1.to_string(),
        from_tuple: a_tuple.to_vec(),
        to_world: w2.to_string(),
        to_tuple: b_tuple.to_vec(),
    };
    let start = resolve_pair(models, &start)?;

    let mut resolved = Vec::with_capacity(a.pairs.len());
    let mut member: HashSet<PairKey> = HashSet::new();
    let mut cap = start.at.len();
    for p in &a.pairs {
        let r = resolve_pair(models, p)?;
        cap = cap.max(r.at.len());
        member.insert(r.key());
        resolved.push(r);
    }

    let named = |dir: usize, w: usize, at: &[u32], v: usize, bt: &[u32]| TuplePair {
        dir: Dir::of(dir),
        from_world: models[dir].world_name(w).to_string(),
        from_tuple: at
            .iter()
            .map(|&e| models[dir].elem_name(w, e).to_string())
            .collect(),
        to_world: models[1 ^ dir].world_name(v).to_string(),
        to_tuple: bt
            .iter()
            .map(|&e| models[1 ^ dir].elem_name(v, e).to_string())
            .collect(),
    };

    if !member.contains(&start.key()) {
        return Ok(Some(Violation {
            condition: AsimCondition::Elem,
            pair: named(0, start.w, &start.at, start.v, &start.bt),
            detail: "the start pair is not in the set".to_string(),
        }));
    }

    for r in &resolved {
        let from = models[r.dir];
        let to = models[1 ^ r.dir];
        let fail = |condition, detail| {
            Ok(Some(Violation {
                condition,
                pair: named(r.dir, r.w, &r.at, r.v, &r.bt),
                detail,
            }))
        };

        if let Some(detail) = atom_defect(models, eq_on, r) {
            return fail(AsimCondition::Atom, detail);
        }

        for &t in to.successors(r.v) {
            let bt: Vec<u32> = r.bt.iter().map(|&b| to.push(r.v, t, b)).collect();
            let hit = from.successors(r.w).iter().any(|&u| {
                let at: Vec<u32> = r.at.iter().map(|&a| from.push(r.w, u, a)).collect();
                member.contains(&(r.dir, u, at.clone(), t, bt.clone()))
                    && member.contains(&(1 ^ r.dir, t, bt.clone(), u, at))
            });
            if !hit {
                return fail(
                    AsimCondition::SBack,
                    format!(
                        "no successor of `{}` answers the step to `{}` in both orientations",
                        from.world_name(r.w),
                        to.world_name(t)
                    ),
                );
            }
        }

        // Extension conditions only below the tuple budget: a finite set
        // cannot contain extensions of its longest tuples.
        if r.at.len() < cap {
            for a2 in 0..from.domain(r.w).len() as u32 {
                let hit = (0..to.domain(r.v).len() as u32).any(|b2| {
                    let mut at = r.at.clone();
                    at.push(a2);
                    let mut bt = r.bt.clone();
                    bt.push(b2);
                    member.contains(&(r.dir, r.w, at, r.v, bt))
                });
                if !hit {
                    return fail(
                        AsimCondition::ObjForth,
                        format!(
                            "element `{}` of `{}` has no partner",
                            from.elem_name(r.w, a2),
                            from.world_name(r.w)
                        ),
                    );
                }
            }
            for &t in to.successors(r.v) {
                let bt: Vec<u32> = r.bt.iter().map(|&b| to.push(r.v, t, b)).collect();
                for b2 in 0..to.domain(t).len() as u32 {
                    let hit = from.successors(r.w).iter().any(|&u| {
                        let at: Vec<u32> = r.at.iter().map(|&a| from.push(r.w, u, a)).collect();
                        (0..from.domain(u).len() as u32).any(|a2| {
                            let mut at = at.clone();
                            at.push(a2);
                            let mut bt = bt.clone();
                            bt.push(b2);
                            member.contains(&(r.dir, u, at, t, bt))
                        })
                    });
                    if !hit {
                        return fail(
                            AsimCondition::ObjBack,
                            format!(
                                "element `{}` of successor `{}` has no answering extension",
                                to.elem_name(t, b2),
                                to.world_name(t)
                            ),
                        );
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};

    fn t(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identity_relation_passes_on_every_fixture() {
        for m in [fix_chain(), fix_cd(), fix_eq()] {
            let a = identity_asimulation(&m, 2);
            let v = check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &[], "w", &[]).unwrap();
            assert_eq!(v, None);
        }
        let m = fix_eq();
        let a = identity_asimulation(&m, 2);
        let v = check_asimulation_raw(Logic::IlEq, &m, &m, &a, "w", &[], "w", &[]).unwrap();
        assert_eq!(v, None);
    }

    #[test]
    fn a_deleted_s_back_witness_is_named() {
        let m = fix_chain();
        let mut a = identity_asimulation(&m, 1);
        let victim = TuplePair::new(Dir::OneTwo, "v", &[], "v", &[]);
        a.pairs.retain(|p| *p != victim);
        let v = check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &[], "w", &[])
            .unwrap()
            .expect("a violation");
        assert_eq!(v.condition, AsimCondition::SBack);
    }

    #[test]
    fn missing_start_is_an_elem_violation() {
        let m = fix_chain();
        let a = identity_asimulation(&m, 1);
        let v = check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &t(&["a"]), "v", &t(&["b"]))
            .unwrap()
            .expect("a violation");
        assert_eq!(v.condition, AsimCondition::Elem);
    }

    #[test]
    fn atom_transfer_failures_name_the_atom() {
        // Pairing top with bottom sends the true `P(b)` to the false `P(a)`.
        let m = fix_chain();
        let mut a = identity_asimulation(&m, 1);
        a.pairs.push(TuplePair::new(Dir::OneTwo, "v", &["b"], "w", &["a"]));
        let v = check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &[], "w", &[])
            .unwrap()
            .expect("a violation");
        assert_eq!(v.condition, AsimCondition::Atom);
        assert!(v.detail.contains("P(c1)"), "got: {}", v.detail);
    }

    #[test]
    fn equality_atoms_force_functional_tuples() {
        let m = fix_eq();
        let mut a = identity_asimulation(&m, 2);
        let collapse = TuplePair::new(Dir::OneTwo, "w", &["a1", "a1"], "w", &["a1", "a2"]);
        a.pairs.push(collapse.clone());
        // s-back at the bottom world demands the reversed orientation too.
        a.pairs
            .push(TuplePair::new(Dir::TwoOne, "w", &["a1", "a2"], "w", &["a1", "a1"]));
        assert_eq!(
            check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &[], "w", &[]).unwrap(),
            None,
            "without equality the collapse is harmless"
        );
        let v = check_asimulation_raw(Logic::IlEq, &m, &m, &a, "w", &[], "w", &[])
            .unwrap()
            .expect("a violation");
        assert_eq!(v.condition, AsimCondition::Atom);
        assert_eq!(v.pair, collapse);
        assert!(v.detail.contains("c1 = c2"), "got: {}", v.detail);
    }

    #[test]
    fn cd_checks_need_surjective_models() {
        let m = fix_cd();
        let a = identity_asimulation(&m, 1);
        let err = check_asimulation_raw(Logic::Cd, &m, &m, &a, "w", &[], "w", &[]).unwrap_err();
        assert!(matches!(
            err,
            AsimError::Eval(EvalError::NotAdmissible { .. })
        ));
    }

    #[test]
    fn malformed_pairs_are_rejected() {
        let m = fix_chain();
        let mut a = identity_asimulation(&m, 1);
        a.pairs.push(TuplePair::new(Dir::OneTwo, "w", &["a"], "v", &[]));
        let err =
            check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &[], "w", &[]).unwrap_err();
        assert!(matches!(err, AsimError::MalformedPair { .. }));

        let mut a = identity_asimulation(&m, 1);
        a.pairs.push(TuplePair::new(Dir::OneTwo, "nowhere", &[], "v", &[]));
        let err =
            check_asimulation_raw(Logic::Il, &m, &m, &a, "w", &[], "w", &[]).unwrap_err();
        assert!(matches!(err, AsimError::MalformedPair { .. }));
    }

    #[test]
    fn pair_records_round_trip_through_json() {
        let a = identity_asimulation(&fix_chain(), 1);
        let text = a.to_json();
        assert!(text.contains("\"1->2\""));
        let b = RawAsimulation::from_json(&text).unwrap();
        assert_eq!(a, b);
    }
}
