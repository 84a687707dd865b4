//! Rank-bounded theory and type slices, satisfaction of formula pairs,
//! and the slice-based elementary-submodel and elementary-embedding
//! checks.  A slice never claims full elementary equivalence: it records
//! the rank and sentence cap at which the comparison was made.

use std::collections::{BTreeMap, BTreeSet};

use crate::kripke::{Element, KripkeModel};
use crate::syntax::{fresh_consts, normalize_sentence, Formula};

use super::{eval, family::sentence_family, EvalError, Logic};

/// Tuple length cap for elementary-submodel and embedding checks.
pub const TUPLE_CAP: usize = 2;

/// The verdicts of a pointed model over one sentence family.  `positive`
/// and `negative` partition the family: they are disjoint and exhaust it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheorySlice {
    pub logic: Logic,
    pub rank: u32,
    pub max_sentences: usize,
    pub positive: BTreeSet<Formula>,
    pub negative: BTreeSet<Formula>,
}

impl TheorySlice {
    pub fn family_size(&self) -> usize {
        self.positive.len() + self.negative.len()
    }
}

/// The theory slice of `([M,w], c̄/ā)`: a [`TheorySlice`] over the
/// extended signature, together with the names adjoined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSlice {
    pub consts: Vec<String>,
    pub slice: TheorySlice,
}

/// A pair of formula sets: `gamma` to satisfy and `delta` to falsify.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormulaPair {
    pub gamma: Vec<Formula>,
    pub delta: Vec<Formula>,
}

impl FormulaPair {
    pub fn new(gamma: Vec<Formula>, delta: Vec<Formula>) -> FormulaPair {
        FormulaPair { gamma, delta }
    }

    /// Componentwise inclusion, the partial order on pairs.
    pub fn le(&self, other: &FormulaPair) -> bool {
        let within = |small: &[Formula], big: &[Formula]| {
            small
                .iter()
                .all(|f| big.iter().any(|g| normalize_sentence(g) == normalize_sentence(f)))
        };
        within(&self.gamma, &other.gamma) && within(&self.delta, &other.delta)
    }
}

/// Classifies the sentence family of rank ≤ `rank` (capped at
/// `max_sentences`) by truth at `(m, w)`.  Equality atoms enter the
/// family only when both the signature and the logic carry equality.
pub fn theory_slice(
    logic: Logic,
    m: &KripkeModel,
    w: &str,
    rank: u32,
    max_sentences: usize,
) -> Result<TheorySlice, EvalError> {
    let lang = m.sig().with_equality(m.sig().equality && logic.has_equality());
    let family = sentence_family(&lang, rank, max_sentences);
    let mut positive = BTreeSet::new();
    let mut negative = BTreeSet::new();
    for f in family.iter() {
        if eval(logic, m, w, f, &[])? {
            positive.insert(f.clone());
        } else {
            negative.insert(f.clone());
        }
    }
    Ok(TheorySlice {
        logic,
        rank,
        max_sentences,
        positive,
        negative,
    })
}

/// The type slice of `(m, w, c̄/ā)`: the theory slice of the canonical
/// constant extension `([M,w], c̄/ā)` at `w`.
pub fn type_slice(
    logic: Logic,
    m: &KripkeModel,
    w: &str,
    names: &[String],
    values: &[String],
    rank: u32,
    max_sentences: usize,
) -> Result<TypeSlice, EvalError> {
    let ext = m.constant_extension(w, names, values)?;
    let slice = theory_slice(logic, &ext, w, rank, max_sentences)?;
    Ok(TypeSlice {
        consts: names.to_vec(),
        slice,
    })
}

/// All of `gamma` true and all of `delta` false at `(m, w, ā)`.
pub fn satisfies_pair(
    logic: Logic,
    m: &KripkeModel,
    w: &str,
    pair: &FormulaPair,
    tuple: &[String],
) -> Result<bool, EvalError> {
    for f in &pair.gamma {
        if !eval(logic, m, w, f, tuple)? {
            return Ok(false);
        }
    }
    for f in &pair.delta {
        if eval(logic, m, w, f, tuple)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fresh constant names avoiding every symbol of the signature.
fn fresh_tuple_names(m: &KripkeModel, len: usize) -> Vec<String> {
    let mut avoid: BTreeSet<String> = m.sig().consts.clone();
    avoid.extend(m.sig().preds.keys().cloned());
    fresh_consts(len, &avoid)
}

/// All tuples over `domain` of exactly `len` entries.
fn tuples(domain: &[String], len: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .iter()
            .flat_map(|t| {
                domain.iter().map(move |a| {
                    let mut t = t.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Checks `m ≼ n` up to rank `rank`: `m` must be a submodel of `n`, and
/// at every world of `m` and every tuple of length ≤ [`TUPLE_CAP`] the
/// type slices of the two models must agree.
pub fn is_elementary_submodel_upto(
    logic: Logic,
    m: &KripkeModel,
    n: &KripkeModel,
    rank: u32,
) -> Result<bool, EvalError> {
    if let Some(defect) = m.submodel_defect(n) {
        return Err(EvalError::NotASubmodel(defect));
    }
    let names = fresh_tuple_names(n, TUPLE_CAP);
    for w in m.worlds() {
        let wi = m.world_index(w).expect("own world");
        for len in 0..=TUPLE_CAP {
            for tuple in tuples(m.domain(wi), len) {
                let tm = type_slice(logic, m, w, &names[..len], &tuple, rank, super::DEFAULT_MAX_SENTENCES)?;
                let tn = type_slice(logic, n, w, &names[..len], &tuple, rank, super::DEFAULT_MAX_SENTENCES)?;
                if tm.slice.positive != tn.slice.positive {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Checks that `(g, h)` is an elementary embedding of `m` into `n` up to
/// rank `rank`: `g` embeds the frame, `h` maps each `A_v` into
/// `B_{g(v)}`, the hom squares commute, and the type slices agree along
/// the maps.  Structural defects yield `false`, never an error.
pub fn check_elementary_embedding_upto(
    logic: Logic,
    m: &KripkeModel,
    n: &KripkeModel,
    g: &BTreeMap<String, String>,
    h: &BTreeMap<Element, Element>,
    rank: u32,
) -> Result<bool, EvalError> {
    if m.sig() != n.sig() {
        return Ok(false);
    }
    // g: total, injective, order-preserving both ways.
    let mut g_idx = Vec::with_capacity(m.n_worlds());
    let mut hit = BTreeSet::new();
    for w in m.worlds() {
        let Some(target) = g.get(w) else {
            return Ok(false);
        };
        let Some(ti) = n.world_index(target) else {
            return Ok(false);
        };
        if !hit.insert(ti) {
            return Ok(false);
        }
        g_idx.push(ti);
    }
    for w in 0..m.n_worlds() {
        for v in 0..m.n_worlds() {
            if m.le(w, v) != n.le(g_idx[w], g_idx[v]) {
                return Ok(false);
            }
        }
    }
    // h: total, injective, world-compatible.
    let mut h_idx: Vec<Vec<u32>> = Vec::with_capacity(m.n_worlds());
    let mut hit_e = BTreeSet::new();
    for w in 0..m.n_worlds() {
        let mut row = Vec::with_capacity(m.domain(w).len());
        for a in m.domain(w) {
            let Some(img) = h.get(&Element::new(m.worlds()[w].clone(), a.clone())) else {
                return Ok(false);
            };
            if img.world != n.worlds()[g_idx[w]] {
                return Ok(false);
            }
            let Some(bi) = n.elem_index(g_idx[w], &img.local) else {
                return Ok(false);
            };
            if !hit_e.insert((g_idx[w], bi)) {
                return Ok(false);
            }
            row.push(bi);
        }
        h_idx.push(row);
    }
    // Hom squares: h(H_wv(a)) = G_{g(w)g(v)}(h(a)).
    for w in 0..m.n_worlds() {
        for &v in m.successors(w) {
            for a in 0..m.domain(w).len() {
                let lhs = h_idx[v][m.push(w, v, a as u32) as usize];
                let rhs = n.push(g_idx[w], g_idx[v], h_idx[w][a as usize]);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    // c-types along the maps.
    let names = fresh_tuple_names(n, TUPLE_CAP);
    for w in 0..m.n_worlds() {
        for len in 0..=TUPLE_CAP {
            for tuple in tuples(m.domain(w), len) {
                let image: Vec<String> = tuple
                    .iter()
                    .map(|a| {
                        let ai = m.elem_index(w, a).expect("own element");
                        n.elem_name(g_idx[w], h_idx[w][ai as usize]).to_string()
                    })
                    .collect();
                let tm = type_slice(
                    logic,
                    m,
                    &m.worlds()[w],
                    &names[..len],
                    &tuple,
                    rank,
                    super::DEFAULT_MAX_SENTENCES,
                )?;
                let tn = type_slice(
                    logic,
                    n,
                    &n.worlds()[g_idx[w]],
                    &names[..len],
                    &image,
                    rank,
                    super::DEFAULT_MAX_SENTENCES,
                )?;
                if tm.slice.positive != tn.slice.positive {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain};
    use crate::kripke::{generate_random_model, KripkeModel, RandomModelParams};
    use crate::syntax::{parse_formula, Signature};

    #[test]
    fn rank_zero_atoms_follow_the_interpretation() {
        let m = fix_cd();
        let th = theory_slice(Logic::Il, &m, "w", 0, 60).unwrap();
        let s = m.sig().clone();
        assert!(th.positive.contains(&parse_formula("P(c)", &s).unwrap()));
        assert!(th.negative.contains(&parse_formula("Q(c)", &s).unwrap()));
        assert_eq!(th.family_size(), 60);
        assert!(th.positive.is_disjoint(&th.negative));
    }

    #[test]
    fn missing_witness_lands_in_the_negative_part() {
        // No element of A_w refutes P once and for all: P grows at v.
        let m = fix_chain();
        let th = theory_slice(Logic::Il, &m, "w", 2, super::super::DEFAULT_MAX_SENTENCES).unwrap();
        let f = parse_formula("exists x1. (P(x1) -> _|_)", m.sig()).unwrap();
        assert!(th.negative.contains(&normalize_sentence(&f)));
    }

    #[test]
    fn positive_theories_grow_along_the_order() {
        let sig = Signature::new([("P".to_string(), 1)], ["c".to_string()], false).unwrap();
        let params = RandomModelParams::new(sig);
        for seed in 0..8 {
            let m = generate_random_model(seed, &params).unwrap();
            let slices: Vec<_> = (0..m.n_worlds())
                .map(|w| theory_slice(Logic::Il, &m, &m.worlds()[w], 1, 60).unwrap())
                .collect();
            for w in 0..m.n_worlds() {
                for &v in m.successors(w) {
                    assert!(
                        slices[w].positive.is_subset(&slices[v].positive),
                        "seed {seed}: Th+ shrank from {} to {}",
                        m.worlds()[w],
                        m.worlds()[v]
                    );
                }
            }
        }
    }

    #[test]
    fn empty_type_is_the_generated_theory() {
        let m = fix_cd();
        let tp = type_slice(Logic::Il, &m, "v", &[], &[], 1, 80).unwrap();
        let th = theory_slice(Logic::Il, &m.generated_submodel("v").unwrap(), "v", 1, 80).unwrap();
        assert_eq!(tp.slice, th);
    }

    #[test]
    fn named_elements_show_up_in_the_type() {
        let m = fix_cd();
        let tp = type_slice(
            Logic::Il,
            &m,
            "w",
            &["d".to_string()],
            &["a".to_string()],
            0,
            120,
        )
        .unwrap();
        let ext_sig = m.sig().with_consts(["d".to_string()]).unwrap();
        assert!(tp
            .slice
            .positive
            .contains(&parse_formula("P(d)", &ext_sig).unwrap()));
    }

    #[test]
    fn types_commute_with_reducts_on_the_common_family() {
        // Forget Q; verdicts on sentences both families share must agree.
        let m = fix_cd();
        let mut small = m.sig().clone();
        small.preds.remove("Q");
        let r = m.reduct(&small).unwrap();
        let names = ["d".to_string()];
        let values = ["a".to_string()];
        let full = type_slice(Logic::Il, &m, "w", &names, &values, 1, 150).unwrap();
        let red = type_slice(Logic::Il, &r, "w", &names, &values, 1, 150).unwrap();
        for f in red.slice.positive.iter() {
            if full.slice.positive.contains(f) || full.slice.negative.contains(f) {
                assert!(full.slice.positive.contains(f), "verdict flipped on `{f}`");
            }
        }
        for f in red.slice.negative.iter() {
            if full.slice.positive.contains(f) || full.slice.negative.contains(f) {
                assert!(full.slice.negative.contains(f), "verdict flipped on `{f}`");
            }
        }
    }

    #[test]
    fn pair_satisfaction_is_componentwise() {
        let m = fix_cd();
        let s = m.sig().clone();
        let p = parse_formula("P(c)", &s).unwrap();
        let q = parse_formula("Q(c)", &s).unwrap();
        assert!(satisfies_pair(Logic::Il, &m, "w", &FormulaPair::default(), &[]).unwrap());
        assert!(satisfies_pair(
            Logic::Il,
            &m,
            "w",
            &FormulaPair::new(vec![p.clone()], vec![q.clone()]),
            &[]
        )
        .unwrap());
        // The same formula cannot be satisfied and falsified at once.
        for f in [p.clone(), q.clone()] {
            assert!(!satisfies_pair(
                Logic::Il,
                &m,
                "w",
                &FormulaPair::new(vec![f.clone()], vec![f]),
                &[]
            )
            .unwrap());
        }
        // Sentence pairs inside the theory slice are exactly the satisfied ones.
        let th = theory_slice(Logic::Il, &m, "w", 1, 40).unwrap();
        let pos: Vec<Formula> = th.positive.iter().take(3).cloned().collect();
        let neg: Vec<Formula> = th.negative.iter().take(3).cloned().collect();
        assert!(satisfies_pair(Logic::Il, &m, "w", &FormulaPair::new(pos.clone(), neg.clone()), &[]).unwrap());
        assert!(!satisfies_pair(Logic::Il, &m, "w", &FormulaPair::new(neg, pos), &[]).unwrap());
    }

    #[test]
    fn every_model_is_its_own_elementary_submodel() {
        let m = fix_cd();
        assert!(is_elementary_submodel_upto(Logic::Il, &m, &m, 1).unwrap());
    }

    #[test]
    fn generated_submodels_are_elementary() {
        let sig = Signature::new([("P".to_string(), 1)], [], false).unwrap();
        let mut params = RandomModelParams::new(sig);
        params.max_worlds = 3;
        params.max_domain = 2;
        for seed in [1u64, 3, 5] {
            let n = generate_random_model(seed, &params).unwrap();
            let w = n.worlds()[n.n_worlds() / 2].clone();
            let m = n.generated_submodel(&w).unwrap();
            assert!(
                is_elementary_submodel_upto(Logic::Il, &m, &n, 1).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn dropping_a_successor_world_is_detected_at_rank_one() {
        let n = fix_cd();
        let m = n
            .induced_submodel(
                &["w".to_string()],
                &[Element::new("w", "a")],
            )
            .unwrap();
        assert!(!is_elementary_submodel_upto(Logic::Il, &m, &n, 1).unwrap());
        // The culprit: ~Q(c) holds in the one-world model but not under n,
        // where Q(c) becomes true at v.
        let neg_q = parse_formula("Q(c) -> _|_", m.sig()).unwrap();
        assert!(eval(Logic::Il, &m, "w", &neg_q, &[]).unwrap());
        assert!(!eval(Logic::Il, &n, "w", &neg_q, &[]).unwrap());
    }

    #[test]
    fn non_submodels_are_rejected() {
        let m = fix_chain();
        let n = fix_cd();
        assert!(matches!(
            is_elementary_submodel_upto(Logic::Il, &m, &n, 1),
            Err(EvalError::NotASubmodel(_))
        ));
    }

    #[test]
    fn identity_embeds_a_generated_submodel() {
        let n = fix_cd();
        let m = n.generated_submodel("v").unwrap();
        let (g, h) = crate::kripke::identity_maps(&m);
        assert!(check_elementary_embedding_upto(Logic::Il, &m, &n, &g, &h, 1).unwrap());
    }

    #[test]
    fn renamed_copies_embed_isomorphically() {
        let m = fix_chain();
        let n = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {"P": 1}, "consts": [], "equality": false},
                "worlds": ["w2", "v2"],
                "order": [["w2", "v2"]],
                "domains": {"w2": ["a2"], "v2": ["b2"]},
                "interp": {"v2": {"P": [["b2"]]}},
                "homs": {"w2>v2": {"a2": "b2"}}
            }"#,
        )
        .unwrap();
        let g: BTreeMap<String, String> =
            [("w".to_string(), "w2".to_string()), ("v".to_string(), "v2".to_string())].into();
        let h: BTreeMap<Element, Element> = [
            (Element::new("w", "a"), Element::new("w2", "a2")),
            (Element::new("v", "b"), Element::new("v2", "b2")),
        ]
        .into();
        assert!(check_elementary_embedding_upto(Logic::Il, &m, &n, &g, &h, 2).unwrap());
    }

    #[test]
    fn embeddings_fail_on_broken_squares_and_on_type_gaps() {
        let m = fix_chain();
        // Same frame, but v gains an element off P: structurally embeddable,
        // semantically not — forall x. P(x) separates the v-worlds at rank 1.
        let n = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {"P": 1}, "consts": [], "equality": false},
                "worlds": ["w", "v"],
                "order": [["w", "v"]],
                "domains": {"w": ["a"], "v": ["b", "b2"]},
                "interp": {"v": {"P": [["b"]]}},
                "homs": {"w>v": {"a": "b"}}
            }"#,
        )
        .unwrap();
        let (g, h) = crate::kripke::identity_maps(&m);
        assert!(!check_elementary_embedding_upto(Logic::Il, &m, &n, &g, &h, 1).unwrap());
        // Redirect the element map against the hom square: structural false.
        let mut h_bad = h.clone();
        h_bad.insert(Element::new("v", "b"), Element::new("v", "b2"));
        assert!(!check_elementary_embedding_upto(Logic::Il, &m, &n, &g, &h_bad, 0).unwrap());
    }
}
