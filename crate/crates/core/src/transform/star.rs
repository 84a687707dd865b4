//! The star expansion: one pair of fresh unary predicates per element.
//!
//! For each element `a` living at world `w`, the expanded model interprets
//! `P⁺_a` at `v` as the hom image of `a` when `w ≺ v` (and as empty
//! otherwise), and `P⁻_a` at `v` as everything except the preimage of `a`
//! when `v ≺ w` (and as the full domain otherwise).  The derived contexts
//! `Q⁺_w := ∃x P⁺_{a_w}(x)` and `Q⁻_w := ∀x P⁻_{a_w}(x)` then express the
//! order itself: `Q⁺_w` holds at `v` exactly when `w ≺ v`, and `Q⁻_w`
//! exactly when `v ⊀ w`.

use std::collections::{BTreeMap, BTreeSet};

use crate::kripke::{Element, KripkeModel, ModelError};
use crate::semantics::{check_admissible, Logic};
use crate::syntax::{parse_formula, Formula};

use super::congruence::Congruence;
use super::TransformError;

/// A model together with the bookkeeping of its star expansion: which
/// fresh predicate tracks which element, and the base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarModel {
    pub model: KripkeModel,
    pub base_world: String,
    /// Element `a` to the name of its positive tracker `P⁺_a`.
    pub plus: BTreeMap<Element, String>,
    /// Element `a` to the name of its negative tracker `P⁻_a`.
    pub minus: BTreeMap<Element, String>,
}

// World and element names may contain characters the formula grammar
// rejects; squash them to underscores before baking them into predicate
// names.
fn ident_chunk(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn claim_name(base: String, used: &mut BTreeSet<String>) -> String {
    if used.insert(base.clone()) {
        return base;
    }
    let mut i = 2usize;
    loop {
        let cand = format!("{base}_{i}");
        if used.insert(cand.clone()) {
            return cand;
        }
        i += 1;
    }
}

/// Expand `(m, w)` with the tracker predicates `P⁺_a`, `P⁻_a` for every
/// element `a` of every world.  Tracker names follow the scheme
/// `Pp_<world>_<element>` / `Pn_<world>_<element>`, suffixed when needed
/// to stay distinct from each other and from the base signature.
pub fn star_expand(m: &KripkeModel, w: &str) -> Result<StarModel, TransformError> {
    m.require_valid()?;
    if m.world_index(w).is_none() {
        return Err(ModelError::UnknownWorld(w.to_string()).into());
    }

    let mut used: BTreeSet<String> = m
        .sig()
        .preds
        .keys()
        .chain(m.sig().consts.iter())
        .cloned()
        .collect();
    let mut plus = BTreeMap::new();
    let mut minus = BTreeMap::new();
    for aw in 0..m.n_worlds() {
        let world = m.world_name(aw);
        for local in m.domain(aw) {
            let stem = format!("{}_{}", ident_chunk(world), ident_chunk(local));
            let p = claim_name(format!("Pp_{stem}"), &mut used);
            let n = claim_name(format!("Pn_{stem}"), &mut used);
            plus.insert(Element::new(world, local), p);
            minus.insert(Element::new(world, local), n);
        }
    }

    let mut exp = m.clone();
    for name in plus.values().chain(minus.values()) {
        exp.sig.preds.insert(name.clone(), 1);
    }
    for (a, pname) in &plus {
        let aw = m.world_index(&a.world).expect("tracked elements exist");
        let ai = m.elem_index(aw, &a.local).expect("tracked elements exist");
        for v in 0..m.n_worlds() {
            if !m.le(aw, v) {
                continue;
            }
            let image = m.push(aw, v, ai);
            exp.preds[v]
                .entry(pname.clone())
                .or_default()
                .insert(vec![image]);
        }
    }
    for (a, nname) in &minus {
        let aw = m.world_index(&a.world).expect("tracked elements exist");
        let ai = m.elem_index(aw, &a.local).expect("tracked elements exist");
        for v in 0..m.n_worlds() {
            let rows: Vec<u32> = if m.le(v, aw) {
                (0..m.domain(v).len() as u32)
                    .filter(|&b| m.push(v, aw, b) != ai)
                    .collect()
            } else {
                (0..m.domain(v).len() as u32).collect()
            };
            if !rows.is_empty() {
                let table = exp.preds[v].entry(nname.clone()).or_default();
                for b in rows {
                    table.insert(vec![b]);
                }
            }
        }
    }

    exp.prune_empty_preds();
    exp.require_valid()?;
    Ok(StarModel {
        model: exp,
        base_world: w.to_string(),
        plus,
        minus,
    })
}

/// The order-defining contexts of `w`: `(∃x P⁺_{a_w}(x), ∀x P⁻_{a_w}(x))`
/// with `a_w` the least element of `A_w`.
pub fn q_formulas(s: &StarModel, w: &str) -> Result<(Formula, Formula), TransformError> {
    let wi = s
        .model
        .world_index(w)
        .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
    let dom = s.model.domain(wi);
    let a_w = dom
        .first()
        .ok_or_else(|| TransformError::EmptyDomain(w.to_string()))?;
    let key = Element::new(w, a_w);
    let plus = s.plus.get(&key).ok_or_else(|| {
        TransformError::ShapeMismatch(format!("no positive tracker for `{key}`"))
    })?;
    let minus = s.minus.get(&key).ok_or_else(|| {
        TransformError::ShapeMismatch(format!("no negative tracker for `{key}`"))
    })?;
    let pos = parse_formula(&format!("exists x1. {plus}(x1)"), s.model.sig())
        .expect("tracker names are valid identifiers");
    let neg = parse_formula(&format!("forall x1. {minus}(x1)"), s.model.sig())
        .expect("tracker names are valid identifiers");
    Ok((pos, neg))
}

/// Read a congruence off a model over a star signature, at the submodel
/// generated by `v`: elements with some positive-tracker membership are
/// identified exactly when they sit in the same trackers; everything else
/// stays in its own class.
///
/// The returned partition lives on `n.generated_submodel(v)`.  No theory
/// hypothesis is assumed; run [`super::check_congruence`] on the result to
/// find out whether the candidate actually is one.
pub fn derive_star_congruence(
    logic: Logic,
    n: &KripkeModel,
    v: &str,
) -> Result<Congruence, TransformError> {
    n.require_valid()?;
    check_admissible(logic, n)?;
    let trackers: Vec<&String> = n
        .sig()
        .preds
        .iter()
        .filter(|(p, &ar)| ar == 1 && p.starts_with("Pp_"))
        .map(|(p, _)| p)
        .collect();
    if trackers.is_empty() {
        return Err(TransformError::NoStarPredicates);
    }

    let sub = n.generated_submodel(v)?;
    let mut gens: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for u in 0..sub.n_worlds() {
        let world = sub.world_name(u);
        let mut groups: BTreeMap<Vec<&String>, Vec<&String>> = BTreeMap::new();
        for (e, local) in sub.domain(u).iter().enumerate() {
            let memberships: Vec<&String> = trackers
                .iter()
                .filter(|p| sub.holds(u, p, &[e as u32]))
                .copied()
                .collect();
            if !memberships.is_empty() {
                groups.entry(memberships).or_default().push(local);
            }
        }
        for members in groups.into_values() {
            if members.len() > 1 {
                let pairs = gens.entry(world.to_string()).or_default();
                for pair in members.windows(2) {
                    pairs.push((pair[0].clone(), pair[1].clone()));
                }
            }
        }
    }
    Congruence::from_pairs(&sub, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_chain, fix_eq};
    use crate::kripke::{generate_random_model, ModelData, RandomModelParams};
    use crate::semantics::eval;
    use crate::syntax::Signature;
    use crate::transform::{check_congruence, unravel, UnravelMode};

    #[test]
    fn one_world_trackers_follow_the_displayed_rules() {
        let sig = Signature::new(vec![("P".into(), 1)], vec![], false).unwrap();
        let mut d = ModelData {
            signature: sig,
            worlds: vec!["w".into()],
            ..ModelData::default()
        };
        d.domains.insert("w".into(), vec!["a".into(), "b".into()]);
        d.interp
            .entry("w".into())
            .or_default()
            .insert("P".into(), serde_json::json!([["a"]]));
        let m = KripkeModel::from_data(&d).unwrap();

        let s = star_expand(&m, "w").unwrap();
        let a = Element::new("w", "a");
        let pa = &s.plus[&a];
        let na = &s.minus[&a];
        // w ≺ w and H is the identity, so P⁺_a = {a}; P⁻_a keeps every
        // element whose (identity) image differs from a, i.e. {b}.
        let ai = s.model.elem_index(0, "a").unwrap();
        let bi = s.model.elem_index(0, "b").unwrap();
        assert!(s.model.holds(0, pa, &[ai]));
        assert!(!s.model.holds(0, pa, &[bi]));
        assert!(s.model.holds(0, na, &[bi]));
        assert!(!s.model.holds(0, na, &[ai]));
    }

    #[test]
    fn chain_trackers_match_the_hand_computation() {
        let m = fix_chain();
        let s = star_expand(&m, "w").unwrap();
        let (w, v) = (
            s.model.world_index("w").unwrap(),
            s.model.world_index("v").unwrap(),
        );
        let a = Element::new("w", "a");
        let b = Element::new("v", "b");
        let bi = s.model.elem_index(v, "b").unwrap();
        let ai = s.model.elem_index(w, "a").unwrap();

        // P⁺_a: {a} at w, pushed to {b} at v.
        assert!(s.model.holds(w, &s.plus[&a], &[ai]));
        assert!(s.model.holds(v, &s.plus[&a], &[bi]));
        // P⁻_a: empty at w (identity hits a), empty... at v nothing maps
        // back to w at all, so the whole domain {b} qualifies.
        assert!(!s.model.holds(w, &s.minus[&a], &[ai]));
        assert!(s.model.holds(v, &s.minus[&a], &[bi]));
        // P⁺_b lives above v only; P⁻_b at w keeps a (its image is b).
        assert!(!s.model.holds(w, &s.plus[&b], &[ai]));
        assert!(s.model.holds(v, &s.plus[&b], &[bi]));
        assert!(!s.model.holds(w, &s.minus[&b], &[ai]));
        assert!(!s.model.holds(v, &s.minus[&b], &[bi]));
    }

    #[test]
    fn expansion_preserves_validity_and_class_on_random_models() {
        let sig = Signature::new(vec![("P".into(), 1), ("R".into(), 2)], vec![], false).unwrap();
        let params = RandomModelParams::new(sig);
        for seed in 0..50u64 {
            let m = generate_random_model(seed, &params).unwrap();
            let root = m.world_name(0).to_string();
            let s = star_expand(&m, &root).unwrap();
            assert!(s.model.validate().is_empty(), "seed {seed}");
            assert_eq!(
                m.classify().unwrap(),
                s.model.classify().unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn q_contexts_define_the_order() {
        let mut models = vec![fix_chain(), fix_eq()];
        let sig = Signature::new(vec![("P".into(), 1)], vec![], false).unwrap();
        let params = RandomModelParams::new(sig);
        for seed in 0..20u64 {
            models.push(generate_random_model(seed, &params).unwrap());
        }
        for m in models {
            let root = m.world_name(0).to_string();
            let s = star_expand(&m, &root).unwrap();
            for w in 0..m.n_worlds() {
                let wname = m.world_name(w).to_string();
                let (q_pos, q_neg) = q_formulas(&s, &wname).unwrap();
                for v in 0..m.n_worlds() {
                    let vname = m.world_name(v);
                    assert_eq!(
                        eval(Logic::Il, &s.model, vname, &q_pos, &[]).unwrap(),
                        m.le(w, v),
                        "Q+ at ({wname}, {vname})"
                    );
                    assert_eq!(
                        eval(Logic::Il, &s.model, vname, &q_neg, &[]).unwrap(),
                        !m.le(v, w),
                        "Q- at ({wname}, {vname})"
                    );
                }
            }
        }
    }

    #[test]
    fn the_derived_congruence_on_a_star_model_is_the_diagonal() {
        for m in [fix_chain(), fix_eq()] {
            let s = star_expand(&m, "w").unwrap();
            let cong = derive_star_congruence(Logic::Il, &s.model, "w").unwrap();
            assert!(cong.is_diagonal());
            let sub = s.model.generated_submodel("w").unwrap();
            assert!(check_congruence(Logic::Il, &sub, &cong).unwrap().ok);
        }
    }

    #[test]
    fn shared_trackers_merge_elements() {
        // A hand-built model whose signature looks like a star signature:
        // c and d sit in exactly the same positive tracker.
        let sig = Signature::new(vec![("Pp_w_a".into(), 1)], vec![], false).unwrap();
        let mut d = ModelData {
            signature: sig,
            worlds: vec!["w".into()],
            ..ModelData::default()
        };
        d.domains
            .insert("w".into(), vec!["c".into(), "d".into(), "e".into()]);
        d.interp
            .entry("w".into())
            .or_default()
            .insert("Pp_w_a".into(), serde_json::json!([["c"], ["d"]]));
        let n = KripkeModel::from_data(&d).unwrap();

        let cong = derive_star_congruence(Logic::Il, &n, "w").unwrap();
        assert!(cong.related("w", "c", "d"));
        assert!(!cong.related("w", "c", "e"));
        assert!(check_congruence(Logic::Il, &n, &cong).unwrap().ok);
    }

    #[test]
    fn plain_signatures_have_no_trackers() {
        assert_eq!(
            derive_star_congruence(Logic::Il, &fix_chain(), "w"),
            Err(TransformError::NoStarPredicates)
        );
    }

    #[test]
    fn awkward_names_are_sanitized() {
        // Unravelled worlds contain `>` and tagged elements contain `@`;
        // the tracker names must still be legal identifiers.
        let m = unravel(&fix_chain(), "w", UnravelMode::Strict).unwrap();
        let s = star_expand(&m, "w").unwrap();
        s.model.sig().check_names().unwrap();
        assert!(s.model.validate().is_empty());
        let tagged = Element::new("w>v", "b@w>v");
        assert_eq!(s.plus[&tagged], "Pp_w_v_b_w_v");
    }
}
