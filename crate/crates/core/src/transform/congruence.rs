//! Congruences on a model and the quotient they induce.
//!
//! A candidate congruence assigns every world a partition of its domain.
//! It counts as a congruence for a logic when adjoining it as a fresh
//! binary predicate yields a valid expansion in which the benchmark
//! equality axioms — reflexivity, symmetry, transitivity, and one
//! congruence axiom per predicate — hold at every world.  For the
//! logics whose language contains `=` only the diagonal qualifies.

use std::collections::{BTreeMap, BTreeSet};

use crate::asim::{index_tuples, Dir, RawAsimulation, TuplePair};
use crate::kripke::KripkeModel;
use crate::semantics::{check_admissible, eval, Logic};
use crate::syntax::parse_formula;

use super::TransformError;

/// A world-indexed partition of the domains of one particular model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    // Per world: disjoint nonempty classes covering the domain, kept
    // sorted by their smallest member.
    classes: BTreeMap<String, Vec<BTreeSet<String>>>,
}

impl Congruence {
    /// The identity relation: every element in its own class.
    pub fn diagonal(m: &KripkeModel) -> Congruence {
        let classes = (0..m.n_worlds())
            .map(|w| {
                let singles = m
                    .domain(w)
                    .iter()
                    .map(|a| BTreeSet::from([a.clone()]))
                    .collect();
                (m.world_name(w).to_string(), singles)
            })
            .collect();
        Congruence { classes }
    }

    /// The finest partition that puts both members of every listed pair
    /// into the same class.  Unlisted worlds stay diagonal.
    pub fn from_pairs(
        m: &KripkeModel,
        gens: &BTreeMap<String, Vec<(String, String)>>,
    ) -> Result<Congruence, TransformError> {
        let mut cong = Congruence::diagonal(m);
        for (world, list) in gens {
            let w = m.world_index(world).ok_or_else(|| {
                TransformError::ShapeMismatch(format!("unknown world `{world}`"))
            })?;
            let dom = m.domain(w);
            let mut parent: Vec<usize> = (0..dom.len()).collect();
            fn find(parent: &mut [usize], mut i: usize) -> usize {
                while parent[i] != i {
                    parent[i] = parent[parent[i]];
                    i = parent[i];
                }
                i
            }
            for (a, b) in list {
                let ai = m.elem_index(w, a).ok_or_else(|| {
                    TransformError::ShapeMismatch(format!("`{a}` is not in the domain of `{world}`"))
                })? as usize;
                let bi = m.elem_index(w, b).ok_or_else(|| {
                    TransformError::ShapeMismatch(format!("`{b}` is not in the domain of `{world}`"))
                })? as usize;
                let (ra, rb) = (find(&mut parent, ai), find(&mut parent, bi));
                parent[ra] = rb;
            }
            let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
            for (i, a) in dom.iter().enumerate() {
                groups
                    .entry(find(&mut parent, i))
                    .or_default()
                    .insert(a.clone());
            }
            let mut parts: Vec<BTreeSet<String>> = groups.into_values().collect();
            parts.sort();
            cong.classes.insert(world.clone(), parts);
        }
        Ok(cong)
    }

    /// Parse the JSON shape `{"w": [["a","b"], …]}`: per world, a list of
    /// groups whose members get identified.
    pub fn from_json(m: &KripkeModel, text: &str) -> Result<Congruence, TransformError> {
        let raw: BTreeMap<String, Vec<Vec<String>>> = serde_json::from_str(text)
            .map_err(|e| TransformError::ShapeMismatch(format!("bad congruence JSON: {e}")))?;
        let mut gens: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        for (world, groups) in raw {
            let pairs = gens.entry(world).or_default();
            for group in groups {
                for pair in group.windows(2) {
                    pairs.push((pair[0].clone(), pair[1].clone()));
                }
            }
        }
        Congruence::from_pairs(m, &gens)
    }

    /// The generator shape accepted by [`Congruence::from_json`], listing
    /// only the classes with more than one member.
    pub fn to_json(&self) -> String {
        let out: BTreeMap<&String, Vec<Vec<&String>>> = self
            .classes
            .iter()
            .map(|(w, parts)| {
                let groups = parts
                    .iter()
                    .filter(|c| c.len() > 1)
                    .map(|c| c.iter().collect())
                    .collect();
                (w, groups)
            })
            .collect();
        serde_json::to_string_pretty(&out).expect("name maps serialize")
    }

    pub fn related(&self, world: &str, a: &str, b: &str) -> bool {
        self.classes
            .get(world)
            .is_some_and(|parts| parts.iter().any(|c| c.contains(a) && c.contains(b)))
    }

    pub fn class_of(&self, world: &str, a: &str) -> Option<&BTreeSet<String>> {
        self.classes.get(world)?.iter().find(|c| c.contains(a))
    }

    /// The display name of an element's class: its members joined with `|`.
    /// Singleton classes keep the element's own name.
    pub fn class_name(&self, world: &str, a: &str) -> Option<String> {
        self.class_of(world, a)
            .map(|c| c.iter().cloned().collect::<Vec<_>>().join("|"))
    }

    pub fn classes(&self, world: &str) -> Option<&[BTreeSet<String>]> {
        self.classes.get(world).map(|v| v.as_slice())
    }

    pub fn is_diagonal(&self) -> bool {
        self.classes
            .values()
            .all(|parts| parts.iter().all(|c| c.len() == 1))
    }

    // The partition must mention exactly this model's worlds and cover
    // exactly its domains.
    fn fits(&self, m: &KripkeModel) -> Result<(), TransformError> {
        if self.classes.len() != m.n_worlds() {
            return Err(TransformError::ShapeMismatch(
                "the partition lists a different set of worlds".into(),
            ));
        }
        for (world, parts) in &self.classes {
            let w = m.world_index(world).ok_or_else(|| {
                TransformError::ShapeMismatch(format!("unknown world `{world}`"))
            })?;
            let covered: usize = parts.iter().map(|c| c.len()).sum();
            if covered != m.domain(w).len()
                || !parts
                    .iter()
                    .flatten()
                    .all(|a| m.elem_index(w, a).is_some())
            {
                return Err(TransformError::ShapeMismatch(format!(
                    "the partition at `{world}` does not cover the domain"
                )));
            }
        }
        Ok(())
    }
}

/// The verdict of [`check_congruence`], with one line per broken law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceReport {
    pub ok: bool,
    pub failures: Vec<String>,
}

fn fresh_pred_name(m: &KripkeModel) -> String {
    let taken: BTreeSet<&String> = m
        .sig()
        .preds
        .keys()
        .chain(m.sig().consts.iter())
        .collect();
    let mut i = 0usize;
    loop {
        let cand = if i == 0 { "E".to_string() } else { format!("E{i}") };
        if !taken.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

// Adjoin the partition as a fresh binary predicate.
fn expand(m: &KripkeModel, cong: &Congruence, e: &str) -> KripkeModel {
    let mut exp = m.clone();
    exp.sig.preds.insert(e.to_string(), 2);
    for w in 0..m.n_worlds() {
        let world = m.world_name(w);
        let mut rows = BTreeSet::new();
        for class in cong.classes(world).expect("fit was checked") {
            for a in class {
                for b in class {
                    let ai = m.elem_index(w, a).expect("fit was checked");
                    let bi = m.elem_index(w, b).expect("fit was checked");
                    rows.insert(vec![ai, bi]);
                }
            }
        }
        exp.preds[w].insert(e.to_string(), rows);
    }
    exp
}

fn benchmark_axioms(e: &str, preds: &BTreeMap<String, usize>) -> Vec<(String, String)> {
    let mut axioms = vec![
        ("reflexivity".to_string(), format!("forall x1. {e}(x1, x1)")),
        (
            "symmetry".to_string(),
            format!("forall x1. forall x2. ({e}(x1, x2) -> {e}(x2, x1))"),
        ),
        (
            "transitivity".to_string(),
            format!(
                "forall x1. forall x2. forall x3. \
                 (({e}(x1, x2) & {e}(x2, x3)) -> {e}(x1, x3))"
            ),
        ),
    ];
    for (p, &arity) in preds {
        if p == e {
            continue;
        }
        let left: Vec<String> = (1..=arity).map(|i| format!("x{i}")).collect();
        let right: Vec<String> = (1..=arity).map(|i| format!("x{}", arity + i)).collect();
        let mut premise = format!("{e}({}, {})", left[0], right[0]);
        for i in 1..arity {
            premise = format!("({premise} & {e}({}, {}))", left[i], right[i]);
        }
        let mut body = format!(
            "({premise} -> ({p}({}) <-> {p}({})))",
            left.join(", "),
            right.join(", ")
        );
        for i in (1..=2 * arity).rev() {
            body = format!("forall x{i}. {body}");
        }
        axioms.push((format!("congruence for {p}"), body));
    }
    axioms
}

/// Decide whether the partition is a congruence of `m` for `logic`.
///
/// A passing report means the expansion by a fresh binary predicate is a
/// valid model and makes every benchmark axiom true at every world; when
/// the language contains `=` the partition must additionally be diagonal.
pub fn check_congruence(
    logic: Logic,
    m: &KripkeModel,
    cong: &Congruence,
) -> Result<CongruenceReport, TransformError> {
    m.require_valid()?;
    check_admissible(logic, m)?;
    cong.fits(m)?;

    let mut failures = Vec::new();
    if logic.has_equality() && m.sig().equality && !cong.is_diagonal() {
        for (world, parts) in &cong.classes {
            for class in parts.iter().filter(|c| c.len() > 1) {
                let members: Vec<&String> = class.iter().collect();
                failures.push(format!(
                    "with `=` in the language only the diagonal is a congruence, \
                     but {{{}}} are identified at `{world}`",
                    members
                        .iter()
                        .map(|s| s.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
        }
    }

    let e = fresh_pred_name(m);
    let exp = expand(m, cong, &e);
    let structural = exp.validate();
    if !structural.is_empty() {
        for d in structural {
            failures.push(format!("the expanded model breaks {}: {}", d.law, d.detail));
        }
        return Ok(CongruenceReport {
            ok: false,
            failures,
        });
    }

    for (label, text) in benchmark_axioms(&e, &exp.sig().preds) {
        let ax = parse_formula(&text, exp.sig()).expect("benchmark axioms parse");
        for w in 0..exp.n_worlds() {
            let world = exp.world_name(w);
            if !eval(Logic::Il, &exp, world, &ax, &[])? {
                failures.push(format!("`{label}` fails at `{world}`"));
                break;
            }
        }
    }

    Ok(CongruenceReport {
        ok: failures.is_empty(),
        failures,
    })
}

/// The quotient model: same worlds and order, one element per class, with
/// the interpretations, constants, and homomorphisms pushed down.
pub fn quotient(
    logic: Logic,
    m: &KripkeModel,
    cong: &Congruence,
) -> Result<KripkeModel, TransformError> {
    let report = check_congruence(logic, m, cong)?;
    if !report.ok {
        return Err(TransformError::NotACongruence(
            report.failures.first().cloned().unwrap_or_default(),
        ));
    }

    let n = m.n_worlds();
    let mut domains = Vec::with_capacity(n);
    let mut maps: Vec<Vec<u32>> = Vec::with_capacity(n);
    let mut reps: Vec<Vec<u32>> = Vec::with_capacity(n);
    for w in 0..n {
        let world = m.world_name(w);
        let mut named: Vec<(String, &BTreeSet<String>)> = cong
            .classes(world)
            .expect("the check verified the fit")
            .iter()
            .map(|c| (c.iter().cloned().collect::<Vec<_>>().join("|"), c))
            .collect();
        named.sort();
        let mut map = vec![0u32; m.domain(w).len()];
        let mut rep = Vec::with_capacity(named.len());
        for (ci, (_, members)) in named.iter().enumerate() {
            let first = members.iter().next().expect("classes are nonempty");
            rep.push(m.elem_index(w, first).expect("members are in the domain"));
            for a in members.iter() {
                let e = m.elem_index(w, a).expect("members are in the domain");
                map[e as usize] = ci as u32;
            }
        }
        domains.push(named.into_iter().map(|(name, _)| name).collect::<Vec<_>>());
        maps.push(map);
        reps.push(rep);
    }

    let preds = (0..n)
        .map(|w| {
            m.sig()
                .preds
                .keys()
                .filter_map(|p| {
                    m.pred_rows(w, p).map(|rows| {
                        let moved = rows
                            .iter()
                            .map(|row| row.iter().map(|&e| maps[w][e as usize]).collect())
                            .collect::<BTreeSet<Vec<u32>>>();
                        (p.clone(), moved)
                    })
                })
                .collect::<BTreeMap<_, _>>()
        })
        .collect();
    let consts = (0..n)
        .map(|w| {
            m.sig()
                .consts
                .iter()
                .map(|c| {
                    let e = m.const_at(w, c).expect("valid models interpret constants");
                    (c.clone(), maps[w][e as usize])
                })
                .collect::<BTreeMap<_, _>>()
        })
        .collect();

    let mut homs = BTreeMap::new();
    for w in 0..n {
        for v in 0..n {
            if !m.le(w, v) {
                continue;
            }
            let table: Vec<u32> = reps[w]
                .iter()
                .map(|&e| maps[v][m.push(w, v, e) as usize])
                .collect();
            homs.insert((w, v), table);
        }
    }

    let mut q = KripkeModel {
        sig: m.sig().clone(),
        worlds: m.worlds().to_vec(),
        leq: (0..n).map(|w| (0..n).filter(|&v| m.le(w, v)).collect()).collect(),
        domains,
        preds,
        consts,
        homs,
    };
    q.prune_empty_preds();
    q.require_valid()?;
    Ok(q)
}

/// The canonical relation between a model and its quotient: every tuple is
/// paired with its classwise image at the same world, both directions, for
/// lengths up to `max_len`.
pub fn quotient_relation(
    m: &KripkeModel,
    cong: &Congruence,
    max_len: usize,
) -> Result<RawAsimulation, TransformError> {
    cong.fits(m)?;
    let mut pairs = Vec::new();
    for w in 0..m.n_worlds() {
        let world = m.world_name(w);
        let dom = m.domain(w);
        for len in 0..=max_len {
            for t in index_tuples(dom.len(), len) {
                let plain: Vec<String> = t.iter().map(|&e| dom[e].clone()).collect();
                let classed: Vec<String> = plain
                    .iter()
                    .map(|a| cong.class_name(world, a).expect("fit was checked"))
                    .collect();
                pairs.push(TuplePair {
                    dir: Dir::OneTwo,
                    from_world: world.to_string(),
                    from_tuple: plain.clone(),
                    to_world: world.to_string(),
                    to_tuple: classed.clone(),
                });
                pairs.push(TuplePair {
                    dir: Dir::TwoOne,
                    from_world: world.to_string(),
                    from_tuple: classed,
                    to_world: world.to_string(),
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
    use crate::kripke::ModelData;
    use crate::semantics::type_slice;
    use crate::syntax::Signature;

    fn merge(m: &KripkeModel, world: &str, a: &str, b: &str) -> Congruence {
        let gens = BTreeMap::from([(world.to_string(), vec![(a.to_string(), b.to_string())])]);
        Congruence::from_pairs(m, &gens).unwrap()
    }

    #[test]
    fn the_diagonal_is_always_a_congruence() {
        for (logic, m) in [
            (Logic::Il, fix_chain()),
            (Logic::Il, fix_cd()),
            (Logic::IlEq, fix_eq()),
        ] {
            let report = check_congruence(logic, &m, &Congruence::diagonal(&m)).unwrap();
            assert!(report.ok, "{logic}: {:?}", report.failures);
        }
    }

    #[test]
    fn merging_the_bottom_of_the_equality_chain_works_without_equality() {
        let m = fix_eq();
        let cong = merge(&m, "w", "a1", "a2");
        let report = check_congruence(Logic::Il, &m, &cong).unwrap();
        assert!(report.ok, "{:?}", report.failures);

        let with_eq = check_congruence(Logic::IlEq, &m, &cong).unwrap();
        assert!(!with_eq.ok);
        assert!(with_eq.failures[0].contains("diagonal"), "{:?}", with_eq.failures);
    }

    #[test]
    fn a_predicate_split_is_not_a_congruence() {
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

        let report = check_congruence(Logic::Il, &m, &merge(&m, "w", "a", "b")).unwrap();
        assert!(!report.ok);
        assert!(
            report.failures[0].contains("congruence for P") && report.failures[0].contains("`w`"),
            "{:?}",
            report.failures
        );
    }

    #[test]
    fn identifying_elements_with_different_futures_is_reported() {
        // Two bottom elements with distinct hom images: identifying them
        // breaks predicate monotonicity of the adjoined relation.
        let sig = Signature::new(vec![("P".into(), 1)], vec![], false).unwrap();
        let mut d = ModelData {
            signature: sig,
            worlds: vec!["v".into(), "w".into()],
            ..ModelData::default()
        };
        d.order.push(("w".into(), "v".into()));
        d.domains.insert("w".into(), vec!["a1".into(), "a2".into()]);
        d.domains.insert("v".into(), vec!["b1".into(), "b2".into()]);
        d.interp
            .entry("v".into())
            .or_default()
            .insert("P".into(), serde_json::json!([["b1"]]));
        d.homs.insert(
            "w>v".into(),
            BTreeMap::from([("a1".into(), "b1".into()), ("a2".into(), "b2".into())]),
        );
        let m = KripkeModel::from_data(&d).unwrap();

        let report = check_congruence(Logic::Il, &m, &merge(&m, "w", "a1", "a2")).unwrap();
        assert!(!report.ok);
        assert!(
            report.failures[0].contains("monotonicity"),
            "{:?}",
            report.failures
        );
    }

    #[test]
    fn the_quotient_merges_the_named_classes() {
        let m = fix_eq();
        let q = quotient(Logic::Il, &m, &merge(&m, "w", "a1", "a2")).unwrap();
        assert_eq!(q.worlds(), m.worlds());
        assert_eq!(q.domain(q.world_index("w").unwrap()), &["a1|a2".to_string()]);
        assert_eq!(q.domain(q.world_index("v").unwrap()), &["b".to_string()]);
        let (w, v) = (q.world_index("w").unwrap(), q.world_index("v").unwrap());
        assert_eq!(q.hom(w, v), Some(&vec![0u32]));
    }

    #[test]
    fn the_diagonal_quotient_is_the_model_itself() {
        for m in [fix_chain(), fix_cd(), fix_eq()] {
            let q = quotient(Logic::Il, &m, &Congruence::diagonal(&m)).unwrap();
            assert_eq!(q, m);
        }
    }

    #[test]
    fn the_class_relation_is_an_asimulation_both_ways() {
        let m = fix_eq();
        let cong = merge(&m, "w", "a1", "a2");
        let q = quotient(Logic::Il, &m, &cong).unwrap();
        let rel = quotient_relation(&m, &cong, 2).unwrap();
        for world in ["w", "v"] {
            assert_eq!(
                check_asimulation_raw(Logic::Il, &m, &q, &rel, world, &[], world, &[]).unwrap(),
                None
            );
            assert_eq!(
                check_asimulation_raw(Logic::Il, &q, &m, &rel.flip(), world, &[], world, &[])
                    .unwrap(),
                None
            );
        }
    }

    #[test]
    fn quotienting_preserves_type_slices() {
        // A chain whose bottom carries two P-elements that merge into the
        // single element upstairs.
        let sig = Signature::new(vec![("P".into(), 1)], vec![], false).unwrap();
        let mut d = ModelData {
            signature: sig,
            worlds: vec!["v".into(), "w".into()],
            ..ModelData::default()
        };
        d.order.push(("w".into(), "v".into()));
        d.domains.insert("w".into(), vec!["a1".into(), "a2".into()]);
        d.domains.insert("v".into(), vec!["b".into()]);
        d.interp
            .entry("w".into())
            .or_default()
            .insert("P".into(), serde_json::json!([["a1"], ["a2"]]));
        d.interp
            .entry("v".into())
            .or_default()
            .insert("P".into(), serde_json::json!([["b"]]));
        d.homs.insert(
            "w>v".into(),
            BTreeMap::from([("a1".into(), "b".into()), ("a2".into(), "b".into())]),
        );
        let m = KripkeModel::from_data(&d).unwrap();

        let cong = merge(&m, "w", "a1", "a2");
        let q = quotient(Logic::Il, &m, &cong).unwrap();
        let names = vec!["c1".to_string()];
        let before = type_slice(Logic::Il, &m, "w", &names, &["a1".to_string()], 2, 200).unwrap();
        let after =
            type_slice(Logic::Il, &q, "w", &names, &["a1|a2".to_string()], 2, 200).unwrap();
        assert!(before
            .slice
            .positive
            .iter()
            .any(|f| f.to_string().contains("P(")));
        assert_eq!(before.slice.positive, after.slice.positive);
        assert_eq!(before.slice.negative, after.slice.negative);
    }

    #[test]
    fn quotienting_preserves_surjectivity() {
        let m = fix_eq();
        assert!(m.classify().unwrap().su_class);
        let q = quotient(Logic::Il, &m, &merge(&m, "w", "a1", "a2")).unwrap();
        assert!(q.classify().unwrap().su_class);
    }

    #[test]
    fn generators_roundtrip_through_json() {
        let m = fix_eq();
        let cong = merge(&m, "w", "a1", "a2");
        let again = Congruence::from_json(&m, &cong.to_json()).unwrap();
        assert_eq!(cong, again);
        assert!(again.related("w", "a1", "a2"));
        assert!(!again.related("v", "b", "b2"));
        assert_eq!(again.class_name("w", "a2").as_deref(), Some("a1|a2"));
    }

    #[test]
    fn a_partition_for_one_model_does_not_fit_another() {
        let cong = Congruence::diagonal(&fix_eq());
        assert!(matches!(
            check_congruence(Logic::Il, &fix_chain(), &cong),
            Err(TransformError::ShapeMismatch(_))
        ));
        assert!(matches!(
            quotient_relation(&fix_chain(), &cong, 1),
            Err(TransformError::ShapeMismatch(_))
        ));
    }
}
