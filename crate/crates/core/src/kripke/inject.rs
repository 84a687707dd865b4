//! Injectivization: replaces each element `a` of a world by the choice
//! functions that pick, at every world below, a preimage of `a`.  Homs
//! extend a choice function by the image of its top value, which makes
//! every hom of the result injective while preserving which atoms hold.
//!
//! The defining biconditional for the new homs pins the extension only on
//! the old function's domain and the target world; on posets where the
//! target sees strictly more history the remaining values are filled
//! deterministically (constant chains stay constant chains, otherwise
//! push forward from the deepest committed world, falling back to the
//! least preimage).  The fill keeps every law on chains of height at most
//! three, on forests, and on two-world models; hom composition can
//! genuinely fail beyond that, and surjectivity is not preserved in
//! general even though injectivity and atom agreement are.

use std::collections::{BTreeMap, BTreeSet};

use super::{Element, KripkeModel, ModelError};

/// A choice function: world index -> element of that world's domain.
type Choice = BTreeMap<usize, u32>;

/// The result of injectivizing, with the element bookkeeping needed to
/// compare the two models: `lift` sends each original element to its
/// canonical copy, `fibers` lists all copies.
#[derive(Debug, Clone)]
pub struct Injectivization {
    pub model: KripkeModel,
    pub lift: BTreeMap<Element, Element>,
    pub fibers: BTreeMap<Element, Vec<Element>>,
}

impl KripkeModel {
    /// All preimages of `a` under `H_{vw}`.
    fn preimages(&self, v: usize, w: usize, a: u32) -> Vec<u32> {
        self.homs[&(v, w)]
            .iter()
            .enumerate()
            .filter_map(|(b, &img)| (img == a).then_some(b as u32))
            .collect()
    }

    /// Worlds below `w` holding a preimage of `a`, ascending.
    fn down_set(&self, w: usize, a: u32) -> Vec<usize> {
        (0..self.n_worlds())
            .filter(|&v| self.le(v, w) && !self.preimages(v, w, a).is_empty())
            .collect()
    }

    /// The choice function tracing `c`'s denotations below `w`.
    fn constant_chain(&self, w: usize, c: &str) -> Choice {
        (0..self.n_worlds())
            .filter(|&v| self.le(v, w))
            .map(|v| (v, self.consts[v][c]))
            .collect()
    }

    pub fn injectivize(&self) -> Result<Injectivization, ModelError> {
        if self.sig.equality {
            return Err(ModelError::EqualityUnsupported);
        }
        self.require_valid()?;
        let n = self.n_worlds();

        // Carrier: for each world, every choice function over every
        // element's down-set, keyed by a printable name.  Raw element
        // names are unrestricted, so serialized names that happen to
        // collide get a deterministic disambiguating suffix.
        let mut fibers_by_idx: Vec<Vec<Vec<Choice>>> = Vec::with_capacity(n);
        let mut carrier: Vec<BTreeMap<Choice, String>> = vec![BTreeMap::new(); n];
        for w in 0..n {
            let mut per_elem = Vec::with_capacity(self.domains[w].len());
            for a in 0..self.domains[w].len() as u32 {
                let down = self.down_set(w, a);
                let pools: Vec<Vec<u32>> =
                    down.iter().map(|&v| self.preimages(v, w, a)).collect();
                let mut fiber = vec![Choice::new()];
                for (&v, pool) in down.iter().zip(&pools) {
                    fiber = fiber
                        .into_iter()
                        .flat_map(|f| {
                            pool.iter().map(move |&b| {
                                let mut g = f.clone();
                                g.insert(v, b);
                                g
                            })
                        })
                        .collect();
                }
                for f in &fiber {
                    carrier[w].insert(f.clone(), String::new());
                }
                per_elem.push(fiber);
            }
            let mut taken = BTreeSet::new();
            let choices: Vec<Choice> = carrier[w].keys().cloned().collect();
            for f in choices {
                let mut name = self.choice_name(&f);
                let mut bump = 1;
                while !taken.insert(name.clone()) {
                    bump += 1;
                    name = format!("{}#{bump}", self.choice_name(&f));
                }
                carrier[w].insert(f, name);
            }
            fibers_by_idx.push(per_elem);
        }

        let domains: Vec<Vec<String>> = carrier
            .iter()
            .map(|fns| fns.values().cloned().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        let index_of = |w: usize, f: &Choice| -> u32 {
            domains[w]
                .binary_search(&carrier[w][f])
                .expect("choice function is in the carrier") as u32
        };

        let mut preds: Vec<BTreeMap<String, BTreeSet<Vec<u32>>>> = vec![BTreeMap::new(); n];
        for w in 0..n {
            for (p, rows) in &self.preds[w] {
                let mut lifted = BTreeSet::new();
                for row in rows {
                    let mut combos: Vec<Vec<u32>> = vec![Vec::new()];
                    for &a in row {
                        combos = combos
                            .into_iter()
                            .flat_map(|pre| {
                                fibers_by_idx[w][a as usize].iter().map(move |f| {
                                    let mut row = pre.clone();
                                    row.push(index_of(w, f));
                                    row
                                })
                            })
                            .collect();
                    }
                    lifted.extend(combos);
                }
                preds[w].insert(p.clone(), lifted);
            }
        }

        let mut consts: Vec<BTreeMap<String, u32>> = vec![BTreeMap::new(); n];
        for w in 0..n {
            for c in &self.sig.consts {
                consts[w].insert(c.clone(), index_of(w, &self.constant_chain(w, c)));
            }
        }

        let mut homs: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        for v in 0..n {
            for &w in &self.leq[v] {
                if w == v {
                    homs.insert((v, v), (0..domains[v].len() as u32).collect());
                    continue;
                }
                let mut table = vec![0u32; domains[v].len()];
                for f in carrier[v].keys() {
                    let g = self.extend_choice(v, w, f);
                    table[index_of(v, f) as usize] = index_of(w, &g);
                }
                homs.insert((v, w), table);
            }
        }

        let mut model = KripkeModel {
            sig: self.sig.clone(),
            worlds: self.worlds.clone(),
            leq: self.leq.clone(),
            domains,
            preds,
            consts,
            homs,
        };
        model.prune_empty_preds();
        let mut lift = BTreeMap::new();
        let mut fibers = BTreeMap::new();
        for w in 0..n {
            for a in 0..self.domains[w].len() {
                let elem = self.element(w, a as u32);
                let mut names: Vec<String> = fibers_by_idx[w][a]
                    .iter()
                    .map(|f| carrier[w][f].clone())
                    .collect();
                names.sort();
                lift.insert(
                    elem.clone(),
                    Element::new(self.worlds[w].clone(), names[0].clone()),
                );
                fibers.insert(
                    elem,
                    names
                        .into_iter()
                        .map(|l| Element::new(self.worlds[w].clone(), l))
                        .collect(),
                );
            }
        }
        Ok(Injectivization {
            model,
            lift,
            fibers,
        })
    }

    fn choice_name(&self, f: &Choice) -> String {
        let parts: Vec<String> = f
            .iter()
            .map(|(&v, &b)| format!("{}:{}", self.worlds[v], self.domains[v][b as usize]))
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Extends `f` (a choice over some element of `A_v`) to the choice
    /// over its image in `A_w` demanded by the new hom.
    fn extend_choice(&self, v: usize, w: usize, f: &Choice) -> Choice {
        let target = self.push(v, w, f[&v]);
        for c in &self.sig.consts {
            if *f == self.constant_chain(v, c) {
                return self.constant_chain(w, c);
            }
        }
        let mut g = f.clone();
        g.insert(w, target);
        for u in self.down_set(w, target) {
            if g.contains_key(&u) {
                continue;
            }
            let below: Vec<usize> = f
                .keys()
                .copied()
                .filter(|&t| self.le(t, u))
                .collect();
            let deepest = below
                .iter()
                .copied()
                .filter(|&t| !below.iter().any(|&s| s != t && self.le(t, s)))
                .next_back();
            let value = match deepest {
                Some(t) => self.push(t, u, f[&t]),
                None => self.preimages(u, w, target)[0],
            };
            g.insert(u, value);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::fix_eq;

    #[test]
    fn merge_hom_gains_injectivity_and_keeps_surjectivity() {
        let m = fix_eq().with_equality(false);
        let out = m.injectivize().unwrap();
        assert!(out.model.validate().is_empty());
        let flags = out.model.classify().unwrap();
        assert!(flags.in_class);
        assert!(flags.su_class);
        let w = out.model.world_index("w").unwrap();
        let v = out.model.world_index("v").unwrap();
        assert_eq!(out.model.domain(w).len(), 2);
        // Two ways to choose a preimage of b: through a1 or through a2.
        assert_eq!(out.model.domain(v).len(), 2);
    }

    #[test]
    fn equality_signature_is_rejected() {
        assert!(matches!(
            fix_eq().injectivize(),
            Err(ModelError::EqualityUnsupported)
        ));
    }

    /// Surjectivity is not preserved once two branches with fibers of
    /// different sizes merge into one top world: the single choice
    /// function over the one-element branch cannot reach both lifted
    /// copies of the top element.
    #[test]
    fn surjectivity_lost_on_a_merging_fork() {
        let m = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {}, "consts": [], "equality": false},
                "worlds": ["v1", "v2", "w"],
                "order": [["v1", "w"], ["v2", "w"]],
                "domains": {"v1": ["x1", "x2"], "v2": ["y"], "w": ["z"]},
                "homs": {"v1>w": {"x1": "z", "x2": "z"}, "v2>w": {"y": "z"}}
            }"#,
        )
        .unwrap();
        assert!(m.classify().unwrap().su_class);
        let out = m.injectivize().unwrap();
        assert!(out.model.validate().is_empty());
        let flags = out.model.classify().unwrap();
        assert!(flags.in_class);
        assert!(!flags.su_class);
    }

    #[test]
    fn lift_and_fibers_cover_the_new_domains() {
        let m = fix_eq().with_equality(false);
        let out = m.injectivize().unwrap();
        for (base, copies) in &out.fibers {
            assert!(copies.contains(&out.lift[base]));
            for copy in copies {
                assert_eq!(copy.world, base.world);
                let w = out.model.world_index(&copy.world).unwrap();
                assert!(out.model.elem_index(w, &copy.local).is_some());
            }
        }
        let total: usize = out.fibers.values().map(Vec::len).sum();
        let domain_total: usize = (0..out.model.n_worlds())
            .map(|w| out.model.domain(w).len())
            .sum();
        assert_eq!(total, domain_total);
    }
}
