//! Existence engine: the greatest asimulation over quotient positions.
//!
//! Every condition on a pair `(w; ᾱ) A (v; β̄)` depends on the tuples
//! only through the set of componentwise element pairs, so pairs collapse
//! to *positions* `(dir, w, v, rel ⊆ A_w × B_v)`.  The engine enumerates
//! all positions as bitmasks, keeps those whose atoms transfer, and
//! deletes violators of the three transfer conditions until the set is
//! stable — the greatest post-fixpoint.  An asimulation from the start
//! point exists iff the start position survives.
//!
//! [`bounded_game_exists`] is the slow cross-check: the same greatest
//! fixpoint computed over explicit tuple pairs up to a length bound,
//! straight from the raw conditions, with no position quotient.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{index_tuples, resolve_pair, AsimError, Dir, RawAsimulation, TuplePair};
use crate::kripke::KripkeModel;
use crate::semantics::{check_admissible, Logic};

/// The engine refuses inputs whose position space exceeds this bound.
pub const POSITION_BUDGET: u64 = 1 << 20;

/// Key budget for the tuple-space game in [`bounded_game_exists`].
const GAME_BUDGET: u64 = 1 << 21;

/// One surviving quotient position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub dir: Dir,
    pub from_world: String,
    pub to_world: String,
    pub rel: BTreeSet<(String, String)>,
}

/// The greatest post-fixpoint, reported as named positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsimRelation {
    pub positions: BTreeSet<Position>,
}

impl AsimRelation {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Shared validation for a model pair; returns whether `=` atoms apply.
pub(crate) fn validate_model_pair(
    logic: Logic,
    m1: &KripkeModel,
    m2: &KripkeModel,
) -> Result<bool, AsimError> {
    m1.require_valid()?;
    m2.require_valid()?;
    if m1.sig() != m2.sig() {
        return Err(AsimError::SignatureMismatch);
    }
    check_admissible(logic, m1)?;
    check_admissible(logic, m2)?;
    Ok(logic.has_equality() && m1.sig().equality)
}

struct Engine<'a> {
    m: [&'a KripkeModel; 2],
    eq_on: bool,
    // alive[dir][w][v] is indexed by the pair-set bitmask over A_w × B_v.
    alive: [Vec<Vec<Vec<bool>>>; 2],
}

impl<'a> Engine<'a> {
    fn new(logic: Logic, m1: &'a KripkeModel, m2: &'a KripkeModel) -> Result<Engine<'a>, AsimError> {
        let eq_on = validate_model_pair(logic, m1, m2)?;
        let m = [m1, m2];
        let mut total: u64 = 0;
        for dir in 0..2 {
            for w in 0..m[dir].n_worlds() {
                for v in 0..m[1 ^ dir].n_worlds() {
                    let bits = (m[dir].domain(w).len() * m[1 ^ dir].domain(v).len()) as u32;
                    total = total.saturating_add(1u64.checked_shl(bits).unwrap_or(u64::MAX));
                }
            }
        }
        if total > POSITION_BUDGET {
            return Err(AsimError::Budget {
                positions: total,
                limit: POSITION_BUDGET,
            });
        }
        let mut engine = Engine {
            m,
            eq_on,
            alive: [Vec::new(), Vec::new()],
        };
        for dir in 0..2 {
            engine.alive[dir] = (0..m[dir].n_worlds())
                .map(|w| {
                    (0..m[1 ^ dir].n_worlds())
                        .map(|v| {
                            let bits = m[dir].domain(w).len() * m[1 ^ dir].domain(v).len();
                            (0..1usize << bits)
                                .map(|mask| engine.atoms_transfer(dir, w, v, mask))
                                .collect()
                        })
                        .collect()
                })
                .collect();
        }
        Ok(engine)
    }

    fn pairs_of(&self, dir: usize, w: usize, v: usize, mask: usize) -> Vec<(u32, u32)> {
        let from = self.m[dir];
        let to = self.m[1 ^ dir];
        let nb = to.domain(v).len();
        let mut pairs: Vec<(u32, u32)> = (0..from.domain(w).len() * nb)
            .filter(|bit| mask >> bit & 1 == 1)
            .map(|bit| ((bit / nb) as u32, (bit % nb) as u32))
            .collect();
        for c in &from.sig().consts {
            pairs.push((
                from.const_at(w, c).expect("validated constant"),
                to.const_at(v, c).expect("validated constant"),
            ));
        }
        pairs
    }

    /// Quotiented (atom): every predicate row over rel ∪ constant pairs
    /// transfers, and under `=` the pair set is functional.
    fn atoms_transfer(&self, dir: usize, w: usize, v: usize, mask: usize) -> bool {
        let from = self.m[dir];
        let to = self.m[1 ^ dir];
        let pairs = self.pairs_of(dir, w, v, mask);
        for (p, &arity) in &from.sig().preds {
            for sel in index_tuples(pairs.len(), arity) {
                let srcs: Vec<u32> = sel.iter().map(|&i| pairs[i].0).collect();
                let tgts: Vec<u32> = sel.iter().map(|&i| pairs[i].1).collect();
                if from.holds(w, p, &srcs) && !to.holds(v, p, &tgts) {
                    return false;
                }
            }
        }
        if self.eq_on {
            for (i, (s1, t1)) in pairs.iter().enumerate() {
                for (s2, t2) in &pairs[i + 1..] {
                    if s1 == s2 && t1 != t2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The pair set pushed through `H_wu` and `H_vt`, as a mask over
    /// `A_u × B_t`.
    fn image_mask(&self, dir: usize, w: usize, u: usize, v: usize, t: usize, mask: usize) -> usize {
        let from = self.m[dir];
        let to = self.m[1 ^ dir];
        let nb = to.domain(v).len();
        let nbt = to.domain(t).len();
        let mut out = 0usize;
        for bit in 0..from.domain(w).len() * nb {
            if mask >> bit & 1 == 1 {
                let a = from.push(w, u, (bit / nb) as u32) as usize;
                let b = to.push(v, t, (bit % nb) as u32) as usize;
                out |= 1 << (a * nbt + b);
            }
        }
        out
    }

    /// A mask over `A_u × B_t` in `dir`, rewritten as the swapped mask
    /// over `B_t × A_u` in the flipped direction.
    fn swap_mask(&self, dir: usize, u: usize, t: usize, mask: usize) -> usize {
        let na = self.m[dir].domain(u).len();
        let nbt = self.m[1 ^ dir].domain(t).len();
        let mut out = 0usize;
        for bit in 0..na * nbt {
            if mask >> bit & 1 == 1 {
                out |= 1 << ((bit % nbt) * na + bit / nbt);
            }
        }
        out
    }

    fn survives(&self, dir: usize, w: usize, v: usize, mask: usize) -> bool {
        let from = self.m[dir];
        let to = self.m[1 ^ dir];
        // (s-back): every target step is answered, both orientations kept.
        for &t in to.successors(v) {
            let ok = from.successors(w).iter().any(|&u| {
                let im = self.image_mask(dir, w, u, v, t, mask);
                self.alive[dir][u][t][im]
                    && self.alive[1 ^ dir][t][u][self.swap_mask(dir, u, t, im)]
            });
            if !ok {
                return false;
            }
        }
        // (obj-forth): every source element pairs with some target element.
        let nb = to.domain(v).len();
        for a2 in 0..from.domain(w).len() {
            let ok = (0..nb).any(|b2| self.alive[dir][w][v][mask | 1 << (a2 * nb + b2)]);
            if !ok {
                return false;
            }
        }
        // (obj-back): every element of a target step is answered above.
        for &t in to.successors(v) {
            let nbt = to.domain(t).len();
            for b2 in 0..nbt {
                let ok = from.successors(w).iter().any(|&u| {
                    let im = self.image_mask(dir, w, u, v, t, mask);
                    (0..from.domain(u).len()).any(|a2| self.alive[dir][u][t][im | 1 << (a2 * nbt + b2)])
                });
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Deletes violators in deterministic sweeps until stable.
    fn run(&mut self) {
        loop {
            let mut kills = Vec::new();
            for dir in 0..2 {
                for w in 0..self.m[dir].n_worlds() {
                    for v in 0..self.m[1 ^ dir].n_worlds() {
                        for mask in 0..self.alive[dir][w][v].len() {
                            if self.alive[dir][w][v][mask] && !self.survives(dir, w, v, mask) {
                                kills.push((dir, w, v, mask));
                            }
                        }
                    }
                }
            }
            if kills.is_empty() {
                break;
            }
            for (dir, w, v, mask) in kills {
                self.alive[dir][w][v][mask] = false;
            }
        }
    }

    fn relation(&self) -> AsimRelation {
        let mut positions = BTreeSet::new();
        for dir in 0..2 {
            let from = self.m[dir];
            let to = self.m[1 ^ dir];
            for w in 0..from.n_worlds() {
                for v in 0..to.n_worlds() {
                    let nb = to.domain(v).len();
                    for (mask, &ok) in self.alive[dir][w][v].iter().enumerate() {
                        if !ok {
                            continue;
                        }
                        let rel = (0..from.domain(w).len() * nb)
                            .filter(|bit| mask >> bit & 1 == 1)
                            .map(|bit| {
                                (
                                    from.elem_name(w, (bit / nb) as u32).to_string(),
                                    to.elem_name(v, (bit % nb) as u32).to_string(),
                                )
                            })
                            .collect();
                        positions.insert(Position {
                            dir: Dir::of(dir),
                            from_world: from.world_name(w).to_string(),
                            to_world: to.world_name(v).to_string(),
                            rel,
                        });
                    }
                }
            }
        }
        AsimRelation { positions }
    }
}

/// Decides whether any asimulation relates `(m1, w1, ā)` to `(m2, w2, b̄)`,
/// returning the full surviving position set when one exists.
#[allow(clippy::too_many_arguments)]
pub fn greatest_asimulation(
    logic: Logic,
    m1: &KripkeModel,
    w1: &str,
    a_tuple: &[String],
    m2: &KripkeModel,
    w2: &str,
    b_tuple: &[String],
) -> Result<Option<AsimRelation>, AsimError> {
    if a_tuple.len() != b_tuple.len() {
        return Err(AsimError::StartLengths {
            left: a_tuple.len(),
            right: b_tuple.len(),
        });
    }
    let mut engine = Engine::new(logic, m1, m2)?;
    let start = resolve_pair(
        [m1, m2],
        &TuplePair {
            dir: Dir::OneTwo,
            from_world: w1.to_string(),
            from_tuple: a_tuple.to_vec(),
            to_world: w2.to_string(),
            to_tuple: b_tuple.to_vec(),
        },
    )?;
    engine.run();
    let nb = m2.domain(start.v).len();
    let mut mask = 0usize;
    for (&a, &b) in start.at.iter().zip(&start.bt) {
        mask |= 1 << (a as usize * nb + b as usize);
    }
    if engine.alive[0][start.w][start.v][mask] {
        Ok(Some(engine.relation()))
    } else {
        Ok(None)
    }
}

/// [`greatest_asimulation`] collapsed to its verdict.
#[allow(clippy::too_many_arguments)]
pub fn asim_exists(
    logic: Logic,
    m1: &KripkeModel,
    w1: &str,
    a_tuple: &[String],
    m2: &KripkeModel,
    w2: &str,
    b_tuple: &[String],
) -> Result<bool, AsimError> {
    Ok(greatest_asimulation(logic, m1, w1, a_tuple, m2, w2, b_tuple)?.is_some())
}

/// Expands surviving positions into explicit tuple pairs: every sequence
/// over a position's pair set that covers it, up to length `max_len`.
/// The result passes [`super::check_asimulation_raw`] by construction.
pub fn expand_relation(rel: &AsimRelation, max_len: usize) -> RawAsimulation {
    let mut out = BTreeSet::new();
    for pos in &rel.positions {
        let pairs: Vec<&(String, String)> = pos.rel.iter().collect();
        if pairs.len() > max_len {
            continue;
        }
        for len in pairs.len()..=max_len {
            for seq in index_tuples(pairs.len(), len) {
                if !(0..pairs.len()).all(|i| seq.contains(&i)) {
                    continue;
                }
                out.insert(TuplePair {
                    dir: pos.dir,
                    from_world: pos.from_world.clone(),
                    from_tuple: seq.iter().map(|&i| pairs[i].0.clone()).collect(),
                    to_world: pos.to_world.clone(),
                    to_tuple: seq.iter().map(|&i| pairs[i].1.clone()).collect(),
                });
            }
        }
    }
    RawAsimulation {
        pairs: out.into_iter().collect(),
    }
}

type GameKey = (usize, usize, usize, Vec<u32>, Vec<u32>);

/// Element tuples of length `len` over a domain of size `n`.
fn element_tuples(n: usize, len: usize) -> Vec<Vec<u32>> {
    index_tuples(n, len)
        .into_iter()
        .map(|t| t.into_iter().map(|i| i as u32).collect())
        .collect()
}

/// Direct bounded search straight from the raw conditions: the greatest
/// fixpoint over explicit tuple pairs of length ≤ `max_len`, extension
/// conditions exempt at the bound.  Slow; used to cross-check the
/// position engine on small inputs.
#[allow(clippy::too_many_arguments)]
pub fn bounded_game_exists(
    logic: Logic,
    m1: &KripkeModel,
    w1: &str,
    a_tuple: &[String],
    m2: &KripkeModel,
    w2: &str,
    b_tuple: &[String],
    max_len: usize,
) -> Result<bool, AsimError> {
    if a_tuple.len() != b_tuple.len() {
        return Err(AsimError::StartLengths {
            left: a_tuple.len(),
            right: b_tuple.len(),
        });
    }
    let eq_on = validate_model_pair(logic, m1, m2)?;
    let m = [m1, m2];
    let start = resolve_pair(
        [m1, m2],
        &TuplePair {
            dir: Dir::OneTwo,
            from_world: w1.to_string(),
            from_tuple: a_tuple.to_vec(),
            to_world: w2.to_string(),
            to_tuple: b_tuple.to_vec(),
        },
    )?;
    if start.at.len() > max_len {
        return Err(AsimError::MalformedPair {
            pair: format!("({w1}; {}) -> ({w2}; {})", a_tuple.join(","), b_tuple.join(",")),
            why: format!("start tuples are longer than the game bound {max_len}"),
        });
    }

    let mut count: u64 = 0;
    for dir in 0..2 {
        for w in 0..m[dir].n_worlds() {
            for v in 0..m[1 ^ dir].n_worlds() {
                let cell = (m[dir].domain(w).len() * m[1 ^ dir].domain(v).len()) as u64;
                let mut layer = 1u64;
                for _ in 0..=max_len {
                    count = count.saturating_add(layer);
                    layer = layer.saturating_mul(cell);
                }
            }
        }
    }
    if count > GAME_BUDGET {
        return Err(AsimError::Budget {
            positions: count,
            limit: GAME_BUDGET,
        });
    }

    // The raw (atom) clause: ground atoms are built from signature
    // constants and the tuple constants c1..cl of each pair.
    let atom_ok = |dir: usize, w: usize, v: usize, at: &[u32], bt: &[u32]| -> bool {
        let from = m[dir];
        let to = m[1 ^ dir];
        let consts: Vec<&String> = from.sig().consts.iter().collect();
        let src_of = |ti: usize| {
            if ti < consts.len() {
                from.const_at(w, consts[ti]).expect("validated constant")
            } else {
                at[ti - consts.len()]
            }
        };
        let tgt_of = |ti: usize| {
            if ti < consts.len() {
                to.const_at(v, consts[ti]).expect("validated constant")
            } else {
                bt[ti - consts.len()]
            }
        };
        let n_terms = consts.len() + at.len();
        for (p, &arity) in &from.sig().preds {
            for sel in index_tuples(n_terms, arity) {
                let srcs: Vec<u32> = sel.iter().map(|&ti| src_of(ti)).collect();
                let tgts: Vec<u32> = sel.iter().map(|&ti| tgt_of(ti)).collect();
                if from.holds(w, p, &srcs) && !to.holds(v, p, &tgts) {
                    return false;
                }
            }
        }
        if eq_on {
            for t1 in 0..n_terms {
                for t2 in 0..n_terms {
                    if src_of(t1) == src_of(t2) && tgt_of(t1) != tgt_of(t2) {
                        return false;
                    }
                }
            }
        }
        true
    };

    let mut keys: Vec<GameKey> = Vec::new();
    let mut alive: HashMap<GameKey, bool> = HashMap::new();
    for dir in 0..2 {
        for w in 0..m[dir].n_worlds() {
            for v in 0..m[1 ^ dir].n_worlds() {
                for len in 0..=max_len {
                    for at in element_tuples(m[dir].domain(w).len(), len) {
                        for bt in element_tuples(m[1 ^ dir].domain(v).len(), len) {
                            let ok = atom_ok(dir, w, v, &at, &bt);
                            let key = (dir, w, v, at.clone(), bt);
                            alive.insert(key.clone(), ok);
                            keys.push(key);
                        }
                    }
                }
            }
        }
    }

    let is_alive = |alive: &HashMap<GameKey, bool>, key: &GameKey| alive.get(key) == Some(&true);
    loop {
        let mut kills = Vec::new();
        for key in &keys {
            if !is_alive(&alive, key) {
                continue;
            }
            let (dir, w, v, at, bt) = key;
            let (dir, w, v) = (*dir, *w, *v);
            let from = m[dir];
            let to = m[1 ^ dir];
            let mut ok = true;
            'check: {
                for &t in to.successors(v) {
                    let bt2: Vec<u32> = bt.iter().map(|&b| to.push(v, t, b)).collect();
                    let hit = from.successors(w).iter().any(|&u| {
                        let at2: Vec<u32> = at.iter().map(|&a| from.push(w, u, a)).collect();
                        is_alive(&alive, &(dir, u, t, at2.clone(), bt2.clone()))
                            && is_alive(&alive, &(1 ^ dir, t, u, bt2.clone(), at2))
                    });
                    if !hit {
                        ok = false;
                        break 'check;
                    }
                }
                if at.len() < max_len {
                    for a2 in 0..from.domain(w).len() as u32 {
                        let hit = (0..to.domain(v).len() as u32).any(|b2| {
                            let mut at = at.clone();
                            at.push(a2);
                            let mut bt = bt.clone();
                            bt.push(b2);
                            is_alive(&alive, &(dir, w, v, at, bt))
                        });
                        if !hit {
                            ok = false;
                            break 'check;
                        }
                    }
                    for &t in to.successors(v) {
                        let bt2: Vec<u32> = bt.iter().map(|&b| to.push(v, t, b)).collect();
                        for b2 in 0..to.domain(t).len() as u32 {
                            let hit = from.successors(w).iter().any(|&u| {
                                let at2: Vec<u32> =
                                    at.iter().map(|&a| from.push(w, u, a)).collect();
                                (0..from.domain(u).len() as u32).any(|a2| {
                                    let mut at2 = at2.clone();
                                    at2.push(a2);
                                    let mut bt2 = bt2.clone();
                                    bt2.push(b2);
                                    is_alive(&alive, &(dir, u, t, at2, bt2))
                                })
                            });
                            if !hit {
                                ok = false;
                                break 'check;
                            }
                        }
                    }
                }
            }
            if !ok {
                kills.push(key.clone());
            }
        }
        if kills.is_empty() {
            break;
        }
        for key in kills {
            alive.insert(key, false);
        }
    }
    Ok(is_alive(&alive, &(0, start.w, start.v, start.at, start.bt)))
}

#[cfg(test)]
mod tests {
    use super::super::check_asimulation_raw;
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};
    use crate::semantics::theory_slice;
    use crate::syntax::{parse_formula, Signature};

    fn t(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn p_only() -> Signature {
        Signature::new([("P".to_string(), 1)], [], false).unwrap()
    }

    #[test]
    fn a_model_simulates_itself_with_the_full_diagonal() {
        for m in [fix_chain(), fix_cd(), fix_eq()] {
            let rel = greatest_asimulation(Logic::Il, &m, "w", &[], &m, "w", &[])
                .unwrap()
                .expect("reflexive existence");
            for dir in [Dir::OneTwo, Dir::TwoOne] {
                for w in 0..m.n_worlds() {
                    let name = m.world_name(w).to_string();
                    let diag = Position {
                        dir,
                        from_world: name.clone(),
                        to_world: name,
                        rel: m.domain(w)
                            .iter()
                            .map(|a| (a.clone(), a.clone()))
                            .collect(),
                    };
                    assert!(rel.positions.contains(&diag), "missing {diag:?}");
                }
            }
        }
    }

    #[test]
    fn existence_is_direction_sensitive_on_the_chain() {
        let m = fix_chain();
        assert!(asim_exists(Logic::Il, &m, "w", &[], &m, "v", &[]).unwrap());
        assert!(!asim_exists(Logic::Il, &m, "v", &[], &m, "w", &[]).unwrap());
    }

    #[test]
    fn existence_transfers_positive_slices_to_the_reduct() {
        // Positive instance: the chain simulates its own top.
        let m1 = fix_chain();
        assert!(asim_exists(Logic::Il, &m1, "w", &[], &m1, "v", &[]).unwrap());
        let thw = theory_slice(Logic::Il, &m1, "w", 2, 200).unwrap();
        let thv = theory_slice(Logic::Il, &m1, "v", 2, 200).unwrap();
        assert!(thw.positive.is_subset(&thv.positive));

        // The {P/1} reduct of FIX-CD refuses: its top element `b2` sits
        // outside `P`, so `¬¬∀x P(x)` separates the two points and no
        // asimulation can run left to right.
        let m2 = fix_cd().reduct(&p_only()).unwrap();
        assert!(!asim_exists(Logic::Il, &m1, "w", &[], &m2, "w", &[]).unwrap());
        let sep = parse_formula("((forall x1. P(x1)) -> _|_) -> _|_", m1.sig()).unwrap();
        assert!(crate::semantics::eval(Logic::Il, &m1, "w", &sep, &[]).unwrap());
        assert!(!crate::semantics::eval(Logic::Il, &m2, "w", &sep, &[]).unwrap());
    }

    #[test]
    fn a_separating_sentence_blocks_existence() {
        // FIX-CHAIN enriched with an empty Q and the constant c.
        let m2 = KripkeModel::from_json(
            r#"{
              "signature": {"preds": {"P": 1, "Q": 1}, "consts": ["c"], "equality": false},
              "worlds": ["w", "v"],
              "order": [["w", "v"]],
              "domains": {"w": ["a"], "v": ["b"]},
              "interp": {"w": {"c": "a"}, "v": {"P": [["b"]], "c": "b"}},
              "homs": {"w>v": {"a": "b"}}
            }"#,
        )
        .unwrap();
        let m1 = fix_cd();
        assert!(!asim_exists(Logic::Il, &m1, "w", &[], &m2, "w", &[]).unwrap());
        assert!(!asim_exists(Logic::Il, &m2, "w", &[], &m1, "w", &[]).unwrap());

        let th1 = theory_slice(Logic::Il, &m1, "w", 2, 200).unwrap();
        let th2 = theory_slice(Logic::Il, &m2, "w", 2, 200).unwrap();
        let atom = parse_formula("P(c)", m1.sig()).unwrap();
        assert!(th1.positive.contains(&atom) && th2.negative.contains(&atom));
        let no_q = parse_formula("(exists x1. Q(x1)) -> _|_", m1.sig()).unwrap();
        assert!(crate::semantics::eval(Logic::Il, &m2, "w", &no_q, &[]).unwrap());
        assert!(!crate::semantics::eval(Logic::Il, &m1, "w", &no_q, &[]).unwrap());
    }

    #[test]
    fn equality_blocks_tuple_collapses() {
        let m = fix_eq();
        let a = t(&["a1", "a2"]);
        let b = t(&["a1", "a1"]);
        assert!(asim_exists(Logic::Il, &m, "w", &a, &m, "w", &b).unwrap());
        assert!(!asim_exists(Logic::IlEq, &m, "w", &a, &m, "w", &b).unwrap());
    }

    #[test]
    fn existence_survives_a_signature_reduct() {
        let m1 = fix_chain();
        let m2 = fix_cd().reduct(&p_only()).unwrap();
        assert!(asim_exists(Logic::Il, &m1, "w", &[], &m1, "v", &[]).unwrap());
        assert!(asim_exists(Logic::Il, &m2, "w", &[], &m2, "v", &[]).unwrap());
        let empty = Signature::new([], [], false).unwrap();
        for m in [&m1, &m2] {
            let r = m.reduct(&empty).unwrap();
            assert!(asim_exists(Logic::Il, &r, "w", &[], &r, "v", &[]).unwrap());
        }
        // Forgetting symbols can only help: the blocked pair above opens up.
        let r1 = m1.reduct(&empty).unwrap();
        let r2 = m2.reduct(&empty).unwrap();
        assert!(asim_exists(Logic::Il, &r1, "w", &[], &r2, "w", &[]).unwrap());
    }

    #[test]
    fn the_position_budget_refuses_wide_domains() {
        let elems: Vec<String> = (0..21).map(|i| format!("\"e{i}\"")).collect();
        let m = KripkeModel::from_json(&format!(
            r#"{{
              "signature": {{"preds": {{}}, "consts": [], "equality": false}},
              "worlds": ["w"],
              "order": [],
              "domains": {{"w": [{}]}},
              "interp": {{}},
              "homs": {{}}
            }}"#,
            elems.join(", ")
        ))
        .unwrap();
        let err = greatest_asimulation(Logic::Il, &m, "w", &[], &m, "w", &[]).unwrap_err();
        assert!(matches!(err, AsimError::Budget { .. }));
    }

    #[test]
    fn expansions_of_the_fixpoint_pass_the_raw_check() {
        let m1 = fix_cd();
        let rel = greatest_asimulation(Logic::Il, &m1, "w", &[], &m1, "w", &[])
            .unwrap()
            .expect("reflexive existence");
        let a = expand_relation(&rel, 3);
        let v = check_asimulation_raw(Logic::Il, &m1, &m1, &a, "w", &[], "w", &[]).unwrap();
        assert_eq!(v, None);

        let m2 = fix_chain();
        let rel = greatest_asimulation(Logic::Il, &m2, "w", &[], &m2, "v", &[])
            .unwrap()
            .expect("chain existence");
        let a = expand_relation(&rel, 3);
        let v = check_asimulation_raw(Logic::Il, &m2, &m2, &a, "w", &[], "v", &[]).unwrap();
        assert_eq!(v, None);
    }

    #[test]
    fn the_game_oracle_agrees_on_the_fixtures() {
        let models = [fix_chain(), fix_cd(), fix_eq()];
        for m1 in &models {
            for m2 in &models {
                if m1.sig() != m2.sig() {
                    continue;
                }
                for w1 in 0..m1.n_worlds() {
                    for w2 in 0..m2.n_worlds() {
                        let (w1, w2) = (m1.world_name(w1), m2.world_name(w2));
                        let quick = asim_exists(Logic::Il, m1, w1, &[], m2, w2, &[]).unwrap();
                        let slow =
                            bounded_game_exists(Logic::Il, m1, w1, &[], m2, w2, &[], 3).unwrap();
                        assert_eq!(quick, slow, "{w1} vs {w2}");
                    }
                }
            }
        }
    }

    #[test]
    fn preservation_holds_on_random_pairs() {
        use crate::kripke::{generate_random_model, RandomModelParams};
        let mut params = RandomModelParams::new(p_only());
        params.max_worlds = 3;
        params.max_domain = 2;
        let mut hits = 0;
        for seed in 0..12 {
            let m1 = generate_random_model(seed, &params).unwrap();
            let m2 = generate_random_model(seed + 100, &params).unwrap();
            if asim_exists(Logic::Il, &m1, m1.world_name(0), &[], &m2, m2.world_name(0), &[])
                .unwrap()
            {
                hits += 1;
                let th1 = theory_slice(Logic::Il, &m1, m1.world_name(0), 3, 200).unwrap();
                let th2 = theory_slice(Logic::Il, &m2, m2.world_name(0), 3, 200).unwrap();
                assert!(
                    th1.positive.is_subset(&th2.positive),
                    "seed {seed}: a positive sentence failed to transfer"
                );
            }
        }
        assert!(hits > 0, "no pair related at all; the suite is vacuous");
    }
}
