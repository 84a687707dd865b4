//! Unravelling a model around a point.
//!
//! The unravelling of `m` around `w` has as worlds the increasing sequences
//! `w ≺ u_1 ≺ … ≺ u_n` of base worlds starting at `w`, ordered by the prefix
//! relation.  Each sequence copies the structure of its last world, with every
//! element tagged by the full path so that distinct routes to the same base
//! world get disjoint domains.

use std::collections::{BTreeMap, BTreeSet};

use crate::asim::{index_tuples, Dir, RawAsimulation, TuplePair};
use crate::kripke::{KripkeModel, ModelError};

use super::TransformError;

/// How far to unwind the order into sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnravelMode {
    /// Consecutive entries must be distinct, so paths never stutter.  By
    /// antisymmetry every path is finite and the result covers all depths.
    Strict,
    /// Paths of length at most `k`, stuttering allowed.  `k` must be at
    /// least 1; the root path `(w)` already has length 1.
    Bounded(u32),
}

/// Unravel `m` around the world `w`.
///
/// Sequence worlds are named by joining their entries with `>`, e.g. `w>v`,
/// and the element `a` of the last world reappears as `a@w>v`.  Base world
/// names may therefore not contain `>` themselves.
pub fn unravel(m: &KripkeModel, w: &str, mode: UnravelMode) -> Result<KripkeModel, TransformError> {
    m.require_valid()?;
    if mode == UnravelMode::Bounded(0) {
        return Err(TransformError::BoundTooSmall);
    }
    if let Some(bad) = m.worlds().iter().find(|name| name.contains('>')) {
        return Err(TransformError::BadWorldName(bad.clone()));
    }
    let root = m
        .world_index(w)
        .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;

    // Breadth-first enumeration of the path worlds.
    let mut seqs: Vec<Vec<usize>> = vec![vec![root]];
    let mut next = 0;
    while next < seqs.len() {
        let seq = seqs[next].clone();
        next += 1;
        let grow = match mode {
            UnravelMode::Strict => true,
            UnravelMode::Bounded(k) => seq.len() < k as usize,
        };
        if !grow {
            continue;
        }
        let last = *seq.last().expect("paths are nonempty");
        for &u in m.successors(last) {
            if mode == UnravelMode::Strict && u == last {
                continue;
            }
            let mut longer = seq.clone();
            longer.push(u);
            seqs.push(longer);
        }
    }

    let path_name = |seq: &[usize]| {
        seq.iter()
            .map(|&u| m.world_name(u))
            .collect::<Vec<_>>()
            .join(">")
    };
    let names: Vec<String> = seqs.iter().map(|s| path_name(s)).collect();
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));

    let n = seqs.len();
    let mut worlds = Vec::with_capacity(n);
    let mut domains: Vec<Vec<String>> = Vec::with_capacity(n);
    let mut preds = Vec::with_capacity(n);
    let mut consts = Vec::with_capacity(n);
    // Tagging does not preserve the base sort order (`a2@s` < `a@s`), so each
    // domain is re-sorted and `maps[i]` carries base indices to new ones.
    let mut maps: Vec<Vec<u32>> = Vec::with_capacity(n);
    let mut inv_maps: Vec<Vec<u32>> = Vec::with_capacity(n);
    for &si in &order {
        let name = &names[si];
        let last = *seqs[si].last().expect("paths are nonempty");
        let mut tagged: Vec<(String, u32)> = m
            .domain(last)
            .iter()
            .enumerate()
            .map(|(e, a)| (format!("{a}@{name}"), e as u32))
            .collect();
        tagged.sort();
        let mut map = vec![0u32; tagged.len()];
        let mut inv = vec![0u32; tagged.len()];
        for (new, (_, old)) in tagged.iter().enumerate() {
            map[*old as usize] = new as u32;
            inv[new] = *old;
        }

        let mut table: BTreeMap<String, BTreeSet<Vec<u32>>> = BTreeMap::new();
        for p in m.sig().preds.keys() {
            if let Some(rows) = m.pred_rows(last, p) {
                let moved = rows
                    .iter()
                    .map(|row| row.iter().map(|&e| map[e as usize]).collect())
                    .collect();
                table.insert(p.clone(), moved);
            }
        }
        let ctable: BTreeMap<String, u32> = m
            .sig()
            .consts
            .iter()
            .map(|c| {
                let e = m.const_at(last, c).expect("valid models interpret constants");
                (c.clone(), map[e as usize])
            })
            .collect();

        worlds.push(name.clone());
        domains.push(tagged.into_iter().map(|(t, _)| t).collect());
        preds.push(table);
        consts.push(ctable);
        maps.push(map);
        inv_maps.push(inv);
    }

    let seq_at: Vec<&Vec<usize>> = order.iter().map(|&si| &seqs[si]).collect();
    let mut leq: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut homs = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let (sa, sb) = (seq_at[a], seq_at[b]);
            if sb.len() < sa.len() || sb[..sa.len()] != sa[..] {
                continue;
            }
            leq[a].insert(b);
            let (la, lb) = (
                *sa.last().expect("paths are nonempty"),
                *sb.last().expect("paths are nonempty"),
            );
            let table: Vec<u32> = (0..domains[a].len())
                .map(|e| {
                    let base = inv_maps[a][e];
                    maps[b][m.push(la, lb, base) as usize]
                })
                .collect();
            homs.insert((a, b), table);
        }
    }

    let mut un = KripkeModel {
        sig: m.sig().clone(),
        worlds,
        leq,
        domains,
        preds,
        consts,
        homs,
    };
    un.prune_empty_preds();
    un.require_valid()?;
    Ok(un)
}

/// The canonical relation between a model and its unravelling: every tuple
/// `ā` at the last world of a path `s` is paired with its tagged copy at `s`,
/// in both directions, for tuple lengths up to `max_len`.
pub fn unravel_relation(
    base: &KripkeModel,
    un: &KripkeModel,
    max_len: usize,
) -> Result<RawAsimulation, TransformError> {
    let mut pairs = Vec::new();
    for s in 0..un.n_worlds() {
        let sname = un.world_name(s);
        let last_name = sname.rsplit('>').next().expect("rsplit yields a piece");
        let last = base.world_index(last_name).ok_or_else(|| {
            TransformError::ShapeMismatch(format!(
                "path world `{sname}` does not end in a world of the base model"
            ))
        })?;
        let dom = base.domain(last);
        if dom.len() != un.domain(s).len() {
            return Err(TransformError::ShapeMismatch(format!(
                "domain sizes differ at `{sname}` and `{last_name}`"
            )));
        }
        for a in dom {
            let tag = format!("{a}@{sname}");
            if un.elem_index(s, &tag).is_none() {
                return Err(TransformError::ShapeMismatch(format!(
                    "`{tag}` is missing from the domain of `{sname}`"
                )));
            }
        }
        for len in 0..=max_len {
            for t in index_tuples(dom.len(), len) {
                let plain: Vec<String> = t.iter().map(|&e| dom[e].clone()).collect();
                let tagged: Vec<String> =
                    plain.iter().map(|a| format!("{a}@{sname}")).collect();
                pairs.push(TuplePair {
                    dir: Dir::OneTwo,
                    from_world: last_name.to_string(),
                    from_tuple: plain.clone(),
                    to_world: sname.to_string(),
                    to_tuple: tagged.clone(),
                });
                pairs.push(TuplePair {
                    dir: Dir::TwoOne,
                    from_world: sname.to_string(),
                    from_tuple: tagged,
                    to_world: last_name.to_string(),
                    to_tuple: plain,
                });
            }
        }
    }
    Ok(RawAsimulation::new(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asim::check_asimulation_raw;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};
    use crate::kripke::{
        check_isomorphism, generate_random_model, Element, ModelData, RandomModelParams,
    };
    use crate::semantics::{theory_slice, type_slice, Logic};
    use crate::syntax::parse_formula;
    use crate::syntax::Signature;

    #[test]
    fn a_single_world_unravels_to_an_isomorphic_copy() {
        let sig = Signature::new(vec![("P".into(), 1)], vec!["c".into()], false).unwrap();
        let mut d = ModelData {
            signature: sig,
            worlds: vec!["w".into()],
            ..ModelData::default()
        };
        d.domains.insert("w".into(), vec!["a".into(), "b".into()]);
        let table = d.interp.entry("w".into()).or_default();
        table.insert("P".into(), serde_json::json!([["a"]]));
        table.insert("c".into(), serde_json::json!("b"));
        let m = KripkeModel::from_data(&d).unwrap();

        let un = unravel(&m, "w", UnravelMode::Strict).unwrap();
        assert_eq!(un.worlds(), &["w".to_string()]);
        assert_eq!(un.domain(0), &["a@w".to_string(), "b@w".to_string()]);
        let mut g = std::collections::BTreeMap::new();
        g.insert("w".to_string(), "w".to_string());
        let mut h = std::collections::BTreeMap::new();
        for a in m.domain(0) {
            h.insert(Element::new("w", a), Element::new("w", format!("{a}@w")));
        }
        assert!(check_isomorphism(&m, &un, &g, &h));
    }

    #[test]
    fn the_chain_unravels_onto_itself() {
        let m = fix_chain();
        let un = unravel(&m, "w", UnravelMode::Strict).unwrap();
        assert_eq!(un.worlds(), &["w".to_string(), "w>v".to_string()]);
        assert_eq!(un.domain(0), &["a@w".to_string()]);
        assert_eq!(un.domain(1), &["b@w>v".to_string()]);
        assert!(un.holds(1, "P", &[0]));
        assert!(!un.holds(0, "P", &[0]));
        assert_eq!(un.hom(0, 1), Some(&vec![0u32]));
    }

    #[test]
    fn bounded_paths_may_stutter() {
        let m = fix_chain();
        let un = unravel(&m, "w", UnravelMode::Bounded(2)).unwrap();
        assert_eq!(
            un.worlds(),
            &["w".to_string(), "w>v".to_string(), "w>w".to_string()]
        );
        let wv = un.world_index("w>v").unwrap();
        let ww = un.world_index("w>w").unwrap();
        // Two different one-step extensions of the root are incomparable.
        assert!(!un.le(wv, ww));
        assert!(!un.le(ww, wv));
        assert!(un.le(un.world_index("w").unwrap(), ww));
    }

    #[test]
    fn the_tagged_relation_is_an_asimulation_both_ways() {
        let m = fix_cd();
        let un = unravel(&m, "w", UnravelMode::Strict).unwrap();
        let b = unravel_relation(&m, &un, 2).unwrap();
        for (from, to) in [("w", "w"), ("v", "w>v")] {
            assert_eq!(
                check_asimulation_raw(Logic::Il, &m, &un, &b, from, &[], to, &[]).unwrap(),
                None
            );
            assert_eq!(
                check_asimulation_raw(Logic::Il, &un, &m, &b.flip(), to, &[], from, &[]).unwrap(),
                None
            );
        }
    }

    #[test]
    fn paths_satisfy_the_same_sentences_as_their_last_world() {
        for (name, m) in [("chain", fix_chain()), ("cd", fix_cd()), ("eq", fix_eq())] {
            let un = unravel(&m, "w", UnravelMode::Strict).unwrap();
            for s in 0..un.n_worlds() {
                let sname = un.world_name(s);
                let last = sname.rsplit('>').next().unwrap();
                let here = theory_slice(Logic::Il, &un, sname, 2, 200).unwrap();
                let there = theory_slice(Logic::Il, &m, last, 2, 200).unwrap();
                assert_eq!(here.positive, there.positive, "{name}: {sname}");
                assert_eq!(here.negative, there.negative, "{name}: {sname}");
            }
        }
    }

    #[test]
    fn the_route_to_a_world_does_not_matter() {
        let m = fix_chain();
        let un = unravel(&m, "w", UnravelMode::Bounded(3)).unwrap();
        let short = theory_slice(Logic::Il, &un, "w>v", 2, 200).unwrap();
        let long = theory_slice(Logic::Il, &un, "w>w>v", 2, 200).unwrap();
        assert_eq!(short.positive, long.positive);
        assert_eq!(short.negative, long.negative);

        let names = vec!["c1".to_string()];
        let t_short = type_slice(
            Logic::Il,
            &un,
            "w>v",
            &names,
            &["b@w>v".to_string()],
            2,
            200,
        )
        .unwrap();
        let t_long = type_slice(
            Logic::Il,
            &un,
            "w>w>v",
            &names,
            &["b@w>w>v".to_string()],
            2,
            200,
        )
        .unwrap();
        assert_eq!(t_short.slice.positive, t_long.slice.positive);
        assert_eq!(t_short.slice.negative, t_long.slice.negative);
    }

    #[test]
    fn bounded_and_strict_agree_at_the_root_below_the_bound() {
        // Truncation is invisible to rank-1 sentences: one step can reach
        // the frontier, but only atoms get evaluated there.
        let m = fix_cd();
        let strict = unravel(&m, "w", UnravelMode::Strict).unwrap();
        for k in [2, 3] {
            let bounded = unravel(&m, "w", UnravelMode::Bounded(k)).unwrap();
            let a = theory_slice(Logic::Il, &strict, "w", 1, 200).unwrap();
            let b = theory_slice(Logic::Il, &bounded, "w", 1, 200).unwrap();
            assert_eq!(a.positive, b.positive, "k = {k}");
            assert_eq!(a.negative, b.negative, "k = {k}");
        }
    }

    #[test]
    fn truncation_shows_at_rank_two() {
        // The order is transitive, so a single implication step reaches a
        // cut-off path, where a rank-1 subformula can already go wrong: the
        // stuttering path (w,w,w) has no future left in which P fails.
        let m = fix_cd();
        let strict = unravel(&m, "w", UnravelMode::Strict).unwrap();
        let bounded = unravel(&m, "w", UnravelMode::Bounded(3)).unwrap();
        let not_all_p = parse_formula("(forall x1. P(x1)) -> _|_", m.sig()).unwrap();
        assert!(crate::semantics::eval(Logic::Il, &strict, "w", &not_all_p, &[]).unwrap());
        assert!(!crate::semantics::eval(Logic::Il, &bounded, "w", &not_all_p, &[]).unwrap());
    }

    #[test]
    fn random_unravellings_validate_and_match_the_root() {
        let sig = Signature::new(vec![("P".into(), 1), ("R".into(), 2)], vec![], false).unwrap();
        let params = RandomModelParams::new(sig);
        for seed in 0..30u64 {
            let m = generate_random_model(seed, &params).unwrap();
            let root = m.world_name(0).to_string();
            let un = unravel(&m, &root, UnravelMode::Strict).unwrap();
            let a = theory_slice(Logic::Il, &m, &root, 2, 120).unwrap();
            let b = theory_slice(Logic::Il, &un, &root, 2, 120).unwrap();
            assert_eq!(a.positive, b.positive, "seed {seed}");
            assert_eq!(a.negative, b.negative, "seed {seed}");
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let m = fix_chain();
        assert_eq!(
            unravel(&m, "w", UnravelMode::Bounded(0)),
            Err(TransformError::BoundTooSmall)
        );
        assert!(matches!(
            unravel(&m, "nowhere", UnravelMode::Strict),
            Err(TransformError::Model(ModelError::UnknownWorld(_)))
        ));
    }
}
