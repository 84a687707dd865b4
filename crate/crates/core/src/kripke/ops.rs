//! The model algebra: submodels, constant extensions, reducts, renamings,
//! chain unions, and isomorphism checking.

use std::collections::{BTreeMap, BTreeSet};

use super::{Element, KripkeModel, ModelError};
use crate::syntax::{RenamingMap, Signature};

impl KripkeModel {
    /// Induced submodel on the given worlds and elements: the order is
    /// restricted, predicates are cut down to the kept rows, constants
    /// and homomorphisms are inherited.  The element set must contain
    /// every constant's denotation at a kept world, keep every domain
    /// inhabited, and be closed under the homomorphisms between kept
    /// worlds.
    pub fn induced_submodel(
        &self,
        worlds: &[String],
        elems: &[Element],
    ) -> Result<KripkeModel, ModelError> {
        let mut keep_w = BTreeSet::new();
        for name in worlds {
            let w = self
                .world_index(name)
                .ok_or_else(|| ModelError::UnknownWorld(name.clone()))?;
            keep_w.insert(w);
        }
        let mut keep_e: BTreeMap<usize, BTreeSet<u32>> =
            keep_w.iter().map(|&w| (w, BTreeSet::new())).collect();
        for elem in elems {
            let w = self
                .world_index(&elem.world)
                .ok_or_else(|| ModelError::UnknownWorld(elem.world.clone()))?;
            let e = self
                .elem_index(w, &elem.local)
                .ok_or_else(|| ModelError::UnknownElement {
                    world: elem.world.clone(),
                    local: elem.local.clone(),
                })?;
            keep_e
                .get_mut(&w)
                .ok_or_else(|| ModelError::OutsideSelection(elem.clone()))?
                .insert(e);
        }
        for (&w, kept) in &keep_e {
            if kept.is_empty() {
                return Err(ModelError::WouldBeEmpty(self.worlds[w].clone()));
            }
            for (c, &e) in &self.consts[w] {
                if !kept.contains(&e) {
                    return Err(ModelError::ConstantOutside {
                        konst: c.clone(),
                        elem: self.element(w, e),
                    });
                }
            }
        }
        for (&w, kept) in &keep_e {
            for &v in &self.leq[w] {
                if v == w || !keep_w.contains(&v) {
                    continue;
                }
                for &e in kept {
                    if !keep_e[&v].contains(&self.push(w, v, e)) {
                        return Err(ModelError::NotClosed(self.element(w, e)));
                    }
                }
            }
        }

        // Reindex: world w -> position in keep_w, element e -> position in
        // its kept set (kept sets are ascending, so local names stay sorted).
        let w_new: BTreeMap<usize, usize> =
            keep_w.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let e_new: BTreeMap<usize, BTreeMap<u32, u32>> = keep_e
            .iter()
            .map(|(&w, kept)| {
                (
                    w,
                    kept.iter()
                        .enumerate()
                        .map(|(i, &e)| (e, i as u32))
                        .collect(),
                )
            })
            .collect();

        let worlds: Vec<String> = keep_w.iter().map(|&w| self.worlds[w].clone()).collect();
        let leq = keep_w
            .iter()
            .map(|&w| {
                self.leq[w]
                    .iter()
                    .filter(|v| keep_w.contains(v))
                    .map(|v| w_new[v])
                    .collect()
            })
            .collect();
        let domains: Vec<Vec<String>> = keep_w
            .iter()
            .map(|&w| {
                keep_e[&w]
                    .iter()
                    .map(|&e| self.domains[w][e as usize].clone())
                    .collect()
            })
            .collect();
        let preds = keep_w
            .iter()
            .map(|&w| {
                self.preds[w]
                    .iter()
                    .map(|(p, rows)| {
                        let kept_rows = rows
                            .iter()
                            .filter(|row| row.iter().all(|e| keep_e[&w].contains(e)))
                            .map(|row| row.iter().map(|e| e_new[&w][e]).collect())
                            .collect();
                        (p.clone(), kept_rows)
                    })
                    .collect()
            })
            .collect();
        let consts = keep_w
            .iter()
            .map(|&w| {
                self.consts[w]
                    .iter()
                    .map(|(c, e)| (c.clone(), e_new[&w][e]))
                    .collect()
            })
            .collect();
        let mut homs = BTreeMap::new();
        for &w in &keep_w {
            for &v in &self.leq[w] {
                if !keep_w.contains(&v) {
                    continue;
                }
                let h = keep_e[&w]
                    .iter()
                    .map(|&e| e_new[&v][&self.push(w, v, e)])
                    .collect();
                homs.insert((w_new[&w], w_new[&v]), h);
            }
        }
        let mut model = KripkeModel {
            sig: self.sig.clone(),
            worlds,
            leq,
            domains,
            preds,
            consts,
            homs,
        };
        model.prune_empty_preds();
        Ok(model)
    }

    /// The submodel generated by `w`: everything `w` sees, with full
    /// domains.
    pub fn generated_submodel(&self, w: &str) -> Result<KripkeModel, ModelError> {
        let wi = self
            .world_index(w)
            .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
        let worlds: Vec<String> = self.leq[wi]
            .iter()
            .map(|&v| self.worlds[v].clone())
            .collect();
        let elems: Vec<Element> = self.leq[wi]
            .iter()
            .flat_map(|&v| {
                self.domains[v]
                    .iter()
                    .map(move |e| Element::new(self.worlds[v].clone(), e.clone()))
            })
            .collect();
        self.induced_submodel(&worlds, &elems)
    }

    /// The submodel generated by `w`, expanded by fresh constants `names`
    /// denoting the given elements of `w`'s domain at `w` and their
    /// homomorphic images everywhere above.
    pub fn constant_extension(
        &self,
        w: &str,
        names: &[String],
        values: &[String],
    ) -> Result<KripkeModel, ModelError> {
        if names.len() != values.len() {
            return Err(ModelError::LengthMismatch {
                names: names.len(),
                values: values.len(),
            });
        }
        let wi = self
            .world_index(w)
            .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
        let anchors: Vec<u32> = values
            .iter()
            .map(|local| {
                self.elem_index(wi, local)
                    .ok_or_else(|| ModelError::UnknownElement {
                        world: w.to_string(),
                        local: local.clone(),
                    })
            })
            .collect::<Result<_, _>>()?;
        let mut out = self.generated_submodel(w)?;
        out.sig = self.sig.with_consts(names.iter().cloned())?;
        let base = out.world_index(w).expect("generating world is kept");
        let anchors: Vec<u32> = anchors
            .iter()
            .map(|&e| {
                out.elem_index(base, self.elem_name(wi, e))
                    .expect("full domains are kept")
            })
            .collect();
        for v in 0..out.n_worlds() {
            if !out.le(base, v) {
                continue;
            }
            for (name, &a) in names.iter().zip(&anchors) {
                let image = out.push(base, v, a);
                out.consts[v].insert(name.clone(), image);
            }
        }
        Ok(out)
    }

    /// Forgets the symbols outside `sub`; `sub` must be a subsignature.
    pub fn reduct(&self, sub: &Signature) -> Result<KripkeModel, ModelError> {
        sub.check_names()?;
        if !sub.is_subsignature_of(&self.sig) {
            return Err(ModelError::NotSubsignature);
        }
        let mut out = self.clone();
        out.sig = sub.clone();
        for w in 0..out.n_worlds() {
            out.preds[w].retain(|p, _| sub.preds.contains_key(p));
            out.consts[w].retain(|c, _| sub.consts.contains(c));
        }
        Ok(out)
    }

    /// Renames predicates and constants throughout; the map must cover
    /// the signature injectively.
    pub fn rename(&self, renaming: &RenamingMap) -> Result<KripkeModel, ModelError> {
        let target = renaming.validate(&self.sig)?;
        let mut out = self.clone();
        out.sig = target;
        for w in 0..out.n_worlds() {
            out.preds[w] = out.preds[w]
                .iter()
                .map(|(p, rows)| (renaming.pred_map[p].clone(), rows.clone()))
                .collect();
            out.consts[w] = out.consts[w]
                .iter()
                .map(|(c, &e)| (renaming.const_map[c].clone(), e))
                .collect();
        }
        Ok(out)
    }

    /// `None` when `self` is a submodel of `sup`: same signature, a
    /// subset of worlds with the restricted order, induced predicates,
    /// the same constants, and restricted homomorphisms.
    pub fn submodel_defect(&self, sup: &KripkeModel) -> Option<String> {
        if self.sig != sup.sig {
            return Some("signatures differ".to_string());
        }
        let mut w_map = Vec::with_capacity(self.n_worlds());
        for name in &self.worlds {
            match sup.world_index(name) {
                Some(w) => w_map.push(w),
                None => return Some(format!("world `{name}` is not in the larger model")),
            }
        }
        for w in 0..self.n_worlds() {
            for v in 0..self.n_worlds() {
                if self.le(w, v) != sup.le(w_map[w], w_map[v]) {
                    return Some(format!(
                        "order disagrees on `{}`, `{}`",
                        self.worlds[w], self.worlds[v]
                    ));
                }
            }
        }
        let mut e_maps: Vec<Vec<u32>> = Vec::with_capacity(self.n_worlds());
        for w in 0..self.n_worlds() {
            let mut map = Vec::with_capacity(self.domains[w].len());
            for local in &self.domains[w] {
                match sup.elem_index(w_map[w], local) {
                    Some(e) => map.push(e),
                    None => {
                        return Some(format!(
                            "element `{}` of `{}` is not in the larger model",
                            local, self.worlds[w]
                        ))
                    }
                }
            }
            e_maps.push(map);
        }
        for w in 0..self.n_worlds() {
            let kept: BTreeSet<u32> = e_maps[w].iter().copied().collect();
            for p in self.sig.preds.keys() {
                let mine: BTreeSet<Vec<u32>> = self
                    .pred_rows(w, p)
                    .map(|rows| {
                        rows.iter()
                            .map(|row| row.iter().map(|&e| e_maps[w][e as usize]).collect())
                            .collect()
                    })
                    .unwrap_or_default();
                let induced: BTreeSet<Vec<u32>> = sup
                    .pred_rows(w_map[w], p)
                    .map(|rows| {
                        rows.iter()
                            .filter(|row| row.iter().all(|e| kept.contains(e)))
                            .cloned()
                            .collect()
                    })
                    .unwrap_or_default();
                if mine != induced {
                    return Some(format!(
                        "`{}` at `{}` is not the induced relation",
                        p, self.worlds[w]
                    ));
                }
            }
            for c in &self.sig.consts {
                let (Some(&mine), Some(theirs)) =
                    (self.consts[w].get(c), sup.const_at(w_map[w], c))
                else {
                    return Some(format!("constant `{c}` missing at `{}`", self.worlds[w]));
                };
                if e_maps[w][mine as usize] != theirs {
                    return Some(format!(
                        "constant `{}` disagrees at `{}`",
                        c, self.worlds[w]
                    ));
                }
            }
        }
        for (&(w, v), h) in &self.homs {
            let big = &sup.homs[&(w_map[w], w_map[v])];
            for (e, &img) in h.iter().enumerate() {
                if big[e_maps[w][e] as usize] != e_maps[v][img as usize] {
                    return Some(format!(
                        "homomorphism `{}` -> `{}` disagrees on `{}`",
                        self.worlds[w], self.worlds[v], self.domains[w][e]
                    ));
                }
            }
        }
        None
    }

    pub fn is_submodel_of(&self, sup: &KripkeModel) -> bool {
        self.submodel_defect(sup).is_none()
    }
}

/// Union of a chain of submodels.  Every member must be a submodel of the
/// next; for a finite chain the union is its last member.
pub fn union_chain(models: &[KripkeModel]) -> Result<KripkeModel, ModelError> {
    let last = models.last().ok_or(ModelError::EmptyChain)?;
    for (i, pair) in models.windows(2).enumerate() {
        if let Some(detail) = pair[0].submodel_defect(&pair[1]) {
            return Err(ModelError::NotAChain {
                index: i,
                next: i + 1,
                detail,
            });
        }
    }
    Ok(last.clone())
}

/// Builds the identity world and element maps for a model, a convenient
/// starting point for isomorphism witnesses.
pub fn identity_maps(m: &KripkeModel) -> (BTreeMap<String, String>, BTreeMap<Element, Element>) {
    let g = m
        .worlds()
        .iter()
        .map(|w| (w.clone(), w.clone()))
        .collect();
    let h = m
        .all_elements()
        .into_iter()
        .map(|e| (e.clone(), e))
        .collect();
    (g, h)
}

/// Whether `(g, h)` is an isomorphism from `m1` onto `m2`: `g` an order
/// bijection of the worlds, `h` a domain-by-domain bijection of the
/// elements commuting with the homomorphisms and preserving all atoms.
pub fn check_isomorphism(
    m1: &KripkeModel,
    m2: &KripkeModel,
    g: &BTreeMap<String, String>,
    h: &BTreeMap<Element, Element>,
) -> bool {
    if m1.sig != m2.sig || m1.n_worlds() != m2.n_worlds() {
        return false;
    }
    let mut g_idx = vec![usize::MAX; m1.n_worlds()];
    let mut hit = BTreeSet::new();
    for (from, to) in g {
        let (Some(w), Some(v)) = (m1.world_index(from), m2.world_index(to)) else {
            return false;
        };
        g_idx[w] = v;
        hit.insert(v);
    }
    if g_idx.contains(&usize::MAX) || hit.len() != m2.n_worlds() {
        return false;
    }
    for w in 0..m1.n_worlds() {
        for v in 0..m1.n_worlds() {
            if m1.le(w, v) != m2.le(g_idx[w], g_idx[v]) {
                return false;
            }
        }
    }

    let mut h_idx: Vec<Vec<u32>> = m1
        .domains
        .iter()
        .map(|dom| vec![u32::MAX; dom.len()])
        .collect();
    let mut covered = vec![BTreeSet::new(); m1.n_worlds()];
    for (from, to) in h {
        let (Some(w), Some(v)) = (m1.world_index(&from.world), m2.world_index(&to.world)) else {
            return false;
        };
        if g_idx[w] != v {
            return false;
        }
        let (Some(e), Some(t)) = (m1.elem_index(w, &from.local), m2.elem_index(v, &to.local))
        else {
            return false;
        };
        h_idx[w][e as usize] = t;
        covered[w].insert(t);
    }
    for w in 0..m1.n_worlds() {
        if h_idx[w].contains(&u32::MAX) || covered[w].len() != m2.domains[g_idx[w]].len() {
            return false;
        }
    }

    for w in 0..m1.n_worlds() {
        for p in m1.sig.preds.keys() {
            let image: BTreeSet<Vec<u32>> = m1
                .pred_rows(w, p)
                .map(|rows| {
                    rows.iter()
                        .map(|row| row.iter().map(|&e| h_idx[w][e as usize]).collect())
                        .collect()
                })
                .unwrap_or_default();
            let target: BTreeSet<Vec<u32>> =
                m2.pred_rows(g_idx[w], p).cloned().unwrap_or_default();
            if image != target {
                return false;
            }
        }
        for c in &m1.sig.consts {
            let (Some(a), Some(b)) = (m1.const_at(w, c), m2.const_at(g_idx[w], c)) else {
                return false;
            };
            if h_idx[w][a as usize] != b {
                return false;
            }
        }
    }
    for (&(w, v), h1) in &m1.homs {
        let h2 = &m2.homs[&(g_idx[w], g_idx[v])];
        for (e, &img) in h1.iter().enumerate() {
            if h2[h_idx[w][e] as usize] != h_idx[v][img as usize] {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};
    use crate::syntax::Signature;

    fn elems(picks: &[(&str, &str)]) -> Vec<Element> {
        picks.iter().map(|(w, e)| Element::new(*w, *e)).collect()
    }

    #[test]
    fn restriction_to_the_top_world_is_classical() {
        let m = fix_cd();
        let sub = m
            .induced_submodel(
                &["v".to_string()],
                &elems(&[("v", "b"), ("v", "b2")]),
            )
            .unwrap();
        assert!(sub.validate().is_empty());
        assert_eq!(sub.worlds(), &["v".to_string()]);
        assert_eq!(sub.domain(0), &["b".to_string(), "b2".to_string()]);
        assert!(sub.holds(0, "P", &[0]));
        assert!(sub.holds(0, "Q", &[0]));
        assert_eq!(sub.const_at(0, "c"), Some(0));
    }

    #[test]
    fn restriction_errors_name_the_offence() {
        let m = fix_cd();
        // Constant c denotes b at v, so dropping b strands it.
        assert!(matches!(
            m.induced_submodel(&["v".to_string()], &elems(&[("v", "b2")])),
            Err(ModelError::ConstantOutside { konst, .. }) if konst == "c"
        ));
        // a's image b is missing: not closed.  (Constant-free variant of
        // the chain, since the stranded-constant check fires first.)
        let free = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {}, "consts": [], "equality": false},
                "worlds": ["w", "v"],
                "order": [["w", "v"]],
                "domains": {"w": ["a"], "v": ["b", "b2"]},
                "homs": {"w>v": {"a": "b"}}
            }"#,
        )
        .unwrap();
        assert!(matches!(
            free.induced_submodel(
                &["w".to_string(), "v".to_string()],
                &elems(&[("w", "a"), ("v", "b2")]),
            ),
            Err(ModelError::NotClosed(e)) if e == Element::new("w", "a")
        ));
        // Selecting a world with none of its elements empties the domain.
        let chain = fix_chain();
        assert!(matches!(
            chain.induced_submodel(
                &["w".to_string(), "v".to_string()],
                &elems(&[("v", "b")]),
            ),
            Err(ModelError::WouldBeEmpty(w)) if w == "w"
        ));
        // An element of an unselected world.
        assert!(matches!(
            chain.induced_submodel(&["v".to_string()], &elems(&[("w", "a")])),
            Err(ModelError::OutsideSelection(_))
        ));
    }

    #[test]
    fn generated_submodel_at_the_root_is_the_whole_model() {
        let m = fix_cd();
        assert_eq!(m.generated_submodel("w").unwrap(), m);
    }

    #[test]
    fn generated_submodel_at_the_top_is_one_world() {
        let m = fix_cd();
        let top = m.generated_submodel("v").unwrap();
        assert_eq!(top.n_worlds(), 1);
        assert_eq!(top.worlds(), &["v".to_string()]);
        assert!(top.validate().is_empty());
        assert!(top.is_submodel_of(&m));
    }

    #[test]
    fn constant_extension_pushes_the_anchor_up() {
        let m = fix_chain();
        let ext = m
            .constant_extension("w", &["d".to_string()], &["a".to_string()])
            .unwrap();
        assert!(ext.validate().is_empty());
        let w = ext.world_index("w").unwrap();
        let v = ext.world_index("v").unwrap();
        assert_eq!(ext.const_at(w, "d"), ext.elem_index(w, "a"));
        assert_eq!(ext.const_at(v, "d"), ext.elem_index(v, "b"));
    }

    #[test]
    fn empty_constant_extension_is_the_generated_submodel() {
        let m = fix_cd();
        assert_eq!(
            m.constant_extension("v", &[], &[]).unwrap(),
            m.generated_submodel("v").unwrap()
        );
    }

    #[test]
    fn constant_extension_rejects_clashing_names() {
        use crate::syntax::SyntaxError;
        let m = fix_cd();
        assert!(matches!(
            m.constant_extension("w", &["P".to_string()], &["a".to_string()]),
            Err(ModelError::Syntax(SyntaxError::NameSpaceClash(_)))
        ));
        assert!(matches!(
            m.constant_extension("w", &["c".to_string()], &["a".to_string()]),
            Err(ModelError::Syntax(SyntaxError::NonFreshConstant(_)))
        ));
        assert!(matches!(
            m.constant_extension("w", &["d".to_string()], &[]),
            Err(ModelError::LengthMismatch { names: 1, values: 0 })
        ));
    }

    #[test]
    fn reduct_forgets_symbols() {
        let m = fix_cd();
        let sub = Signature::new([("P".to_string(), 1)], [], false).unwrap();
        let r = m.reduct(&sub).unwrap();
        assert!(r.validate().is_empty());
        assert_eq!(r.sig(), &sub);
        let v = r.world_index("v").unwrap();
        assert!(r.pred_rows(v, "Q").is_none());
        assert_eq!(r.const_at(v, "c"), None);
        assert!(r.holds(v, "P", &[0]));

        let not_sub = Signature::new([("Q".to_string(), 2)], [], false).unwrap();
        assert!(matches!(m.reduct(&not_sub), Err(ModelError::NotSubsignature)));
    }

    #[test]
    fn renaming_rekeys_every_world() {
        let m = fix_cd();
        let mut r = RenamingMap::identity(m.sig());
        r.pred_map.insert("P".into(), "P2".into());
        r.const_map.insert("c".into(), "d".into());
        let out = m.rename(&r).unwrap();
        assert!(out.validate().is_empty());
        let w = out.world_index("w").unwrap();
        assert!(out.holds(w, "P2", &[0]));
        assert!(out.pred_rows(w, "P").is_none());
        assert_eq!(out.const_at(w, "d"), Some(0));
        assert_eq!(out.rename(&r.inverse()).unwrap(), m);

        let id = RenamingMap::identity(m.sig());
        assert_eq!(m.rename(&id).unwrap(), m);
    }

    #[test]
    fn chains_union_to_their_last_member() {
        let m = fix_cd();
        let top = m.generated_submodel("v").unwrap();
        assert_eq!(union_chain(&[top, m.clone()]).unwrap(), m);
        assert_eq!(union_chain(&[m.clone()]).unwrap(), m);
        assert!(matches!(union_chain(&[]), Err(ModelError::EmptyChain)));
    }

    #[test]
    fn non_chains_are_rejected_with_the_defect() {
        let chain = fix_chain();
        let mut bigger = chain.clone();
        let w = bigger.world_index("w").unwrap();
        bigger.preds[w].insert("P".into(), [vec![0u32]].into_iter().collect());
        // chain's empty P at w is not the induced relation of bigger's.
        let err = union_chain(&[chain, bigger]).unwrap_err();
        assert!(matches!(
            err,
            ModelError::NotAChain { index: 0, next: 1, ref detail } if detail.contains("P")
        ));
    }

    #[test]
    fn isomorphism_accepts_a_renamed_copy() {
        let m = fix_chain();
        let copy = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {"P": 1}, "consts": [], "equality": false},
                "worlds": ["s", "t"],
                "order": [["s", "t"]],
                "domains": {"s": ["x"], "t": ["y"]},
                "interp": {"t": {"P": [["y"]]}},
                "homs": {"s>t": {"x": "y"}}
            }"#,
        )
        .unwrap();
        let g: BTreeMap<String, String> =
            [("w".into(), "s".into()), ("v".into(), "t".into())].into();
        let h: BTreeMap<Element, Element> = [
            (Element::new("w", "a"), Element::new("s", "x")),
            (Element::new("v", "b"), Element::new("t", "y")),
        ]
        .into();
        assert!(check_isomorphism(&m, &copy, &g, &h));

        // Inverting the world map breaks order preservation.
        let g_bad: BTreeMap<String, String> =
            [("w".into(), "t".into()), ("v".into(), "s".into())].into();
        let h_bad: BTreeMap<Element, Element> = [
            (Element::new("w", "a"), Element::new("t", "y")),
            (Element::new("v", "b"), Element::new("s", "x")),
        ]
        .into();
        assert!(!check_isomorphism(&m, &copy, &g_bad, &h_bad));
    }

    #[test]
    fn identity_is_an_isomorphism() {
        for m in [fix_chain(), fix_cd(), fix_eq()] {
            let (g, h) = identity_maps(&m);
            assert!(check_isomorphism(&m, &m, &g, &h));
        }
    }

    #[test]
    fn swapping_hom_targets_breaks_isomorphism() {
        let m = fix_eq();
        let (g, mut h) = identity_maps(&m);
        h.insert(Element::new("w", "a1"), Element::new("w", "a2"));
        h.insert(Element::new("w", "a2"), Element::new("w", "a1"));
        // Swapping a1 and a2 is still an isomorphism here (both map to b),
        // but swapping across worlds is not even well-typed.
        assert!(check_isomorphism(&m, &m, &g, &h));
        h.insert(Element::new("w", "a1"), Element::new("v", "b"));
        assert!(!check_isomorphism(&m, &m, &g, &h));
    }
}
