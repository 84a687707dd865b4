//! Interchange form of a model.  [`ModelData`] mirrors the on-disk JSON;
//! [`ModelData::resolve`] turns names into indices, closes the order
//! reflexively and transitively, and completes derivable composite
//! homomorphisms, leaving the structural laws to `validate`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{KripkeModel, ModelError};
use crate::syntax::Signature;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelData {
    pub signature: Signature,
    pub worlds: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
    #[serde(default)]
    pub domains: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub interp: BTreeMap<String, BTreeMap<String, serde_json::Value>>,
    #[serde(default)]
    pub homs: BTreeMap<String, BTreeMap<String, String>>,
}

impl ModelData {
    pub fn resolve(&self) -> Result<KripkeModel, ModelError> {
        self.signature.check_names()?;

        let mut worlds = self.worlds.clone();
        worlds.sort();
        for pair in worlds.windows(2) {
            if pair[0] == pair[1] {
                return Err(ModelError::DuplicateWorld(pair[0].clone()));
            }
        }
        if worlds.iter().any(|w| w.is_empty()) {
            return Err(ModelError::EmptyName);
        }
        let n = worlds.len();
        let widx = |name: &str| -> Result<usize, ModelError> {
            worlds
                .binary_search_by(|w| w.as_str().cmp(name))
                .map_err(|_| ModelError::UnknownWorld(name.to_string()))
        };

        let mut domains = vec![Vec::new(); n];
        for (world, locals) in &self.domains {
            let w = widx(world)?;
            let mut locals = locals.clone();
            locals.sort();
            for pair in locals.windows(2) {
                if pair[0] == pair[1] {
                    return Err(ModelError::DuplicateElement {
                        world: world.clone(),
                        local: pair[0].clone(),
                    });
                }
            }
            if locals.iter().any(|e| e.is_empty()) {
                return Err(ModelError::EmptyName);
            }
            domains[w] = locals;
        }
        let eidx = |w: usize, local: &str| -> Result<u32, ModelError> {
            domains[w]
                .binary_search_by(|e| e.as_str().cmp(local))
                .map(|i| i as u32)
                .map_err(|_| ModelError::UnknownElement {
                    world: worlds[w].clone(),
                    local: local.to_string(),
                })
        };

        // Reflexive-transitive closure of the listed edges.
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for (from, to) in &self.order {
            le[widx(from)?][widx(to)?] = true;
        }
        for t in 0..n {
            for w in 0..n {
                if le[w][t] {
                    for v in 0..n {
                        if le[t][v] {
                            le[w][v] = true;
                        }
                    }
                }
            }
        }

        let mut preds: Vec<BTreeMap<String, std::collections::BTreeSet<Vec<u32>>>> =
            vec![BTreeMap::new(); n];
        let mut consts: Vec<BTreeMap<String, u32>> = vec![BTreeMap::new(); n];
        for (world, table) in &self.interp {
            let w = widx(world)?;
            for (name, value) in table {
                if let Some(&arity) = self.signature.preds.get(name) {
                    let rows = as_rows(world, name, value)?;
                    let mut resolved = std::collections::BTreeSet::new();
                    for row in rows {
                        if row.len() != arity {
                            return Err(ModelError::BadRow {
                                world: world.clone(),
                                pred: name.clone(),
                                expected: arity,
                                got: row.len(),
                            });
                        }
                        resolved.insert(
                            row.iter()
                                .map(|local| eidx(w, local))
                                .collect::<Result<Vec<u32>, _>>()?,
                        );
                    }
                    preds[w].insert(name.clone(), resolved);
                } else if self.signature.consts.contains(name) {
                    let local = value.as_str().ok_or_else(|| ModelError::UnknownElement {
                        world: world.clone(),
                        local: value.to_string(),
                    })?;
                    consts[w].insert(name.clone(), eidx(w, local)?);
                } else {
                    return Err(ModelError::UnknownSymbol {
                        world: world.clone(),
                        name: name.clone(),
                    });
                }
            }
        }
        for (w, world) in worlds.iter().enumerate() {
            for c in &self.signature.consts {
                if !consts[w].contains_key(c) {
                    return Err(ModelError::MissingConst {
                        world: world.clone(),
                        konst: c.clone(),
                    });
                }
            }
        }

        let mut homs: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        for (key, table) in &self.homs {
            let (w, v) = split_hom_key(key, &worlds)?;
            if !le[w][v] {
                return Err(ModelError::NotAnEdge {
                    from: worlds[w].clone(),
                    to: worlds[v].clone(),
                });
            }
            for local in table.keys() {
                eidx(w, local)?;
            }
            let mut h = Vec::with_capacity(domains[w].len());
            for local in &domains[w] {
                let target = table.get(local).ok_or_else(|| ModelError::PartialHom {
                    from: worlds[w].clone(),
                    to: worlds[v].clone(),
                    local: local.clone(),
                })?;
                h.push(eidx(v, target)?);
            }
            homs.insert((w, v), h);
        }
        for w in 0..n {
            homs.entry((w, w))
                .or_insert_with(|| (0..domains[w].len() as u32).collect());
        }
        // Fill missing related pairs with composites of given homs, first
        // intermediate world wins, repeating until nothing new appears.
        loop {
            let mut added = false;
            for w in 0..n {
                for v in 0..n {
                    if !le[w][v] || homs.contains_key(&(w, v)) {
                        continue;
                    }
                    let found = (0..n).find(|&t| {
                        t != w
                            && t != v
                            && le[w][t]
                            && le[t][v]
                            && homs.contains_key(&(w, t))
                            && homs.contains_key(&(t, v))
                    });
                    if let Some(t) = found {
                        let wt = homs[&(w, t)].clone();
                        let tv = &homs[&(t, v)];
                        homs.insert((w, v), wt.iter().map(|&e| tv[e as usize]).collect());
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        for w in 0..n {
            for v in 0..n {
                if le[w][v] && !homs.contains_key(&(w, v)) {
                    return Err(ModelError::MissingHom {
                        from: worlds[w].clone(),
                        to: worlds[v].clone(),
                    });
                }
            }
        }

        let leq = le
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter_map(|(v, &r)| r.then_some(v))
                    .collect()
            })
            .collect();
        let mut model = KripkeModel {
            sig: self.signature.clone(),
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
}

fn as_rows(world: &str, pred: &str, value: &serde_json::Value) -> Result<Vec<Vec<String>>, ModelError> {
    let bad = || ModelError::BadRow {
        world: world.to_string(),
        pred: pred.to_string(),
        expected: 0,
        got: 0,
    };
    let rows = value.as_array().ok_or_else(bad)?;
    rows.iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|cell| cell.as_str().map(str::to_string).ok_or_else(bad))
                .collect()
        })
        .collect()
}

/// Hom keys are `from>to`.  World names may themselves contain `>`, so a
/// key is accepted exactly when one split point yields two known worlds.
fn split_hom_key(key: &str, worlds: &[String]) -> Result<(usize, usize), ModelError> {
    let mut found = None;
    for (i, _) in key.match_indices('>') {
        let (left, right) = (&key[..i], &key[i + 1..]);
        let (Ok(w), Ok(v)) = (
            worlds.binary_search_by(|x| x.as_str().cmp(left)),
            worlds.binary_search_by(|x| x.as_str().cmp(right)),
        ) else {
            continue;
        };
        if found.replace((w, v)).is_some() {
            return Err(ModelError::BadHomKey(key.to_string()));
        }
    }
    found.ok_or_else(|| ModelError::BadHomKey(key.to_string()))
}

impl KripkeModel {
    pub fn from_data(data: &ModelData) -> Result<KripkeModel, ModelError> {
        data.resolve()
    }

    pub fn from_json(text: &str) -> Result<KripkeModel, ModelError> {
        let data: ModelData =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        data.resolve()
    }

    /// Interchange form with the order reduced to its covering edges and
    /// only their homomorphisms listed (composites are re-derived on
    /// load).  If antisymmetry fails the full order is emitted instead.
    pub fn to_data(&self) -> ModelData {
        let n = self.worlds.len();
        let antisym = (0..n)
            .all(|w| self.leq[w].iter().all(|&v| v == w || !self.leq[v].contains(&w)));
        let mut edges = Vec::new();
        for w in 0..n {
            for &v in &self.leq[w] {
                if v == w {
                    continue;
                }
                let covering = !antisym
                    || !(0..n).any(|t| {
                        t != w && t != v && self.leq[w].contains(&t) && self.leq[t].contains(&v)
                    });
                if covering {
                    edges.push((w, v));
                }
            }
        }

        let mut domains = BTreeMap::new();
        for (w, dom) in self.domains.iter().enumerate() {
            domains.insert(self.worlds[w].clone(), dom.clone());
        }
        let mut interp: BTreeMap<String, BTreeMap<String, serde_json::Value>> = BTreeMap::new();
        for w in 0..n {
            let mut table = BTreeMap::new();
            for (p, rows) in &self.preds[w] {
                if rows.is_empty() {
                    continue;
                }
                let rows: Vec<Vec<String>> = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|&e| self.domains[w][e as usize].clone())
                            .collect()
                    })
                    .collect();
                table.insert(p.clone(), serde_json::json!(rows));
            }
            for (c, &e) in &self.consts[w] {
                table.insert(c.clone(), serde_json::json!(self.domains[w][e as usize]));
            }
            if !table.is_empty() {
                interp.insert(self.worlds[w].clone(), table);
            }
        }
        let mut homs = BTreeMap::new();
        for &(w, v) in &edges {
            let table: BTreeMap<String, String> = self.domains[w]
                .iter()
                .enumerate()
                .map(|(e, local)| {
                    (
                        local.clone(),
                        self.domains[v][self.homs[&(w, v)][e] as usize].clone(),
                    )
                })
                .collect();
            homs.insert(format!("{}>{}", self.worlds[w], self.worlds[v]), table);
        }

        ModelData {
            signature: self.sig.clone(),
            worlds: self.worlds.clone(),
            order: edges
                .into_iter()
                .map(|(w, v)| (self.worlds[w].clone(), self.worlds[v].clone()))
                .collect(),
            domains,
            interp,
            homs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("model serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};
    use crate::kripke::generate_random_model;
    use crate::kripke::RandomModelParams;

    #[test]
    fn fixtures_roundtrip_through_json() {
        for m in [fix_chain(), fix_cd(), fix_eq()] {
            assert_eq!(KripkeModel::from_json(&m.to_json()).unwrap(), m);
        }
    }

    #[test]
    fn random_models_roundtrip_through_json() {
        let params = RandomModelParams::new(fix_cd().sig().clone());
        for seed in 0..50 {
            let m = generate_random_model(seed, &params).unwrap();
            assert_eq!(KripkeModel::from_json(&m.to_json()).unwrap(), m, "seed {seed}");
        }
    }

    #[test]
    fn order_is_closed_and_composites_are_derived() {
        // Only cover edges and cover homs given; the w>u hom appears by
        // composition and the order is closed transitively.
        let m = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {}, "consts": [], "equality": false},
                "worlds": ["u", "v", "w"],
                "order": [["w", "v"], ["v", "u"]],
                "domains": {"w": ["a"], "v": ["b"], "u": ["c"]},
                "homs": {"w>v": {"a": "b"}, "v>u": {"b": "c"}}
            }"#,
        )
        .unwrap();
        assert_eq!(m.le_named("w", "u"), Some(true));
        let w = m.world_index("w").unwrap();
        let u = m.world_index("u").unwrap();
        assert_eq!(m.push(w, u, 0), 0);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn load_errors_are_specific() {
        let base = r#"{
            "signature": {"preds": {"P": 1}, "consts": ["c"], "equality": false},
            "worlds": ["w"],
            "domains": {"w": ["a"]},
            "interp": {"w": {"P": [["a"]], "c": "a"}}
        }"#;
        assert!(KripkeModel::from_json(base).is_ok());

        let cases: Vec<(&str, fn(&ModelError) -> bool)> = vec![
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w", "w"], "domains": {"w": ["a"]}}"#,
                |e| matches!(e, ModelError::DuplicateWorld(w) if w == "w"),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w"], "domains": {"v": ["a"]}}"#,
                |e| matches!(e, ModelError::UnknownWorld(v) if v == "v"),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w"], "domains": {"w": ["a", "a"]}}"#,
                |e| matches!(e, ModelError::DuplicateElement { local, .. } if local == "a"),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w"], "domains": {"w": ["a"]},
                    "interp": {"w": {"R": [["a"]]}}}"#,
                |e| matches!(e, ModelError::UnknownSymbol { name, .. } if name == "R"),
            ),
            (
                r#"{"signature": {"preds": {"P": 2}, "consts": [], "equality": false},
                    "worlds": ["w"], "domains": {"w": ["a"]},
                    "interp": {"w": {"P": [["a"]]}}}"#,
                |e| matches!(e, ModelError::BadRow { expected: 2, got: 1, .. }),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": ["c"], "equality": false},
                    "worlds": ["w"], "domains": {"w": ["a"]}}"#,
                |e| matches!(e, ModelError::MissingConst { konst, .. } if konst == "c"),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w", "v"], "order": [["w", "v"]],
                    "domains": {"w": ["a"], "v": ["b"]},
                    "homs": {"w>z": {"a": "b"}}}"#,
                |e| matches!(e, ModelError::BadHomKey(_)),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w", "v"],
                    "domains": {"w": ["a"], "v": ["b"]},
                    "homs": {"v>w": {"b": "a"}}}"#,
                |e| matches!(e, ModelError::NotAnEdge { from, to } if from == "v" && to == "w"),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w", "v"], "order": [["w", "v"]],
                    "domains": {"w": ["a", "a2"], "v": ["b"]},
                    "homs": {"w>v": {"a": "b"}}}"#,
                |e| matches!(e, ModelError::PartialHom { local, .. } if local == "a2"),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w", "v"], "order": [["w", "v"]],
                    "domains": {"w": ["a"], "v": ["b"]}}"#,
                |e| matches!(e, ModelError::MissingHom { .. }),
            ),
            (
                r#"{"signature": {"preds": {}, "consts": [], "equality": false},
                    "worlds": ["w", "v"], "order": [["w", "v"]],
                    "domains": {"w": ["a"], "v": ["b"]},
                    "homs": {"w>v": {"a": "zz"}}}"#,
                |e| matches!(e, ModelError::UnknownElement { local, .. } if local == "zz"),
            ),
        ];
        for (i, (text, check)) in cases.iter().enumerate() {
            let err = KripkeModel::from_json(text).unwrap_err();
            assert!(check(&err), "case {i} gave {err:?}");
        }
    }

    #[test]
    fn hom_keys_with_odd_world_names_resolve_when_unambiguous() {
        let m = KripkeModel::from_json(
            r#"{
                "signature": {"preds": {}, "consts": [], "equality": false},
                "worlds": ["p>q", "r"],
                "order": [["p>q", "r"]],
                "domains": {"p>q": ["a"], "r": ["b"]},
                "homs": {"p>q>r": {"a": "b"}}
            }"#,
        )
        .unwrap();
        assert_eq!(m.le_named("p>q", "r"), Some(true));
    }
}
