//! A literal transcription of the satisfaction definition, quantifying
//! over ⊕-sets of constant extensions instead of using the simplified
//! clauses.  Exponentially slower than [`super::eval`] and meant for tiny
//! models only: its role is to witness, on the fixtures, that the
//! simplified quantifier clauses compute the same relation.

use crate::kripke::{KripkeModel, ModelError};
use crate::syntax::{fresh_consts, Formula, Term};

use super::EvalError;

/// All members of `(M, w) ⊕ (c̄/ā)`: models over `Σ ∪ {c̄}` whose Σ-part
/// lies between the generated submodel `[M, w]` and `M`, and which pin
/// `c̄` to `ā` at `w`.  Enumeration order is deterministic.
pub fn oplus_members(
    m: &KripkeModel,
    w: &str,
    names: &[String],
    values: &[String],
) -> Result<Vec<KripkeModel>, EvalError> {
    m.require_valid()?;
    let wi = m
        .world_index(w)
        .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
    for a in values {
        if m.elem_index(wi, a).is_none() {
            return Err(EvalError::Model(ModelError::UnknownElement {
                world: w.to_string(),
                local: a.clone(),
            }));
        }
    }
    if names.len() != values.len() {
        return Err(EvalError::Model(ModelError::LengthMismatch {
            names: names.len(),
            values: values.len(),
        }));
    }
    let core = m.successors(wi);
    let free: Vec<usize> = (0..m.n_worlds()).filter(|v| !core.contains(v)).collect();
    let mut out = Vec::new();
    for pick in 0u32..(1 << free.len()) {
        let worlds: Vec<usize> = (0..m.n_worlds())
            .filter(|v| {
                core.contains(v)
                    || free
                        .iter()
                        .position(|f| f == v)
                        .is_some_and(|i| pick & (1 << i) != 0)
            })
            .collect();
        for sub in element_selections(m, &worlds, core) {
            let world_names: Vec<String> =
                worlds.iter().map(|&v| m.worlds()[v].clone()).collect();
            let Ok(s) = m.induced_submodel(&world_names, &sub) else {
                continue;
            };
            for section in constant_sections(&s, w, values) {
                let mut n = s.clone();
                n.sig = n.sig.with_consts(names.iter().cloned())?;
                for (i, name) in names.iter().enumerate() {
                    for v in 0..n.n_worlds() {
                        n.consts[v].insert(name.clone(), section[i][v]);
                    }
                }
                debug_assert!(n.validate().is_empty());
                out.push(n);
            }
        }
    }
    Ok(out)
}

/// Every choice of element subsets: full domains on the generated part,
/// arbitrary nonempty-or-rejected subsets elsewhere.
fn element_selections(
    m: &KripkeModel,
    worlds: &[usize],
    core: &std::collections::BTreeSet<usize>,
) -> Vec<Vec<crate::kripke::Element>> {
    let mut picks: Vec<Vec<crate::kripke::Element>> = vec![Vec::new()];
    for &v in worlds {
        let dom = m.domain(v);
        if core.contains(&v) {
            for p in &mut picks {
                p.extend(dom.iter().map(|a| m_elem(m, v, a)));
            }
        } else {
            picks = picks
                .iter()
                .flat_map(|p| {
                    (0u32..(1 << dom.len())).map(move |mask| {
                        let mut p = p.clone();
                        p.extend(
                            dom.iter()
                                .enumerate()
                                .filter(|(i, _)| mask & (1 << i) != 0)
                                .map(|(_, a)| m_elem(m, v, a)),
                        );
                        p
                    })
                })
                .collect();
        }
    }
    picks
}

fn m_elem(m: &KripkeModel, v: usize, a: &str) -> crate::kripke::Element {
    crate::kripke::Element::new(m.worlds()[v].clone(), a.to_string())
}

/// Hom-coherent denotations for each fresh constant across all worlds of
/// `s`, pinned at `w`.  Returns one `[constant][world] -> element` table
/// per coherent combination; constants are independent, so the result is
/// a product of per-constant sections.
fn constant_sections(s: &KripkeModel, w: &str, values: &[String]) -> Vec<Vec<Vec<u32>>> {
    let Some(wi) = s.world_index(w) else {
        return Vec::new();
    };
    let mut per_const: Vec<Vec<Vec<u32>>> = Vec::new();
    for value in values {
        let pin = s.elem_index(wi, value).expect("anchor in core");
        let mut sections: Vec<Vec<u32>> = vec![Vec::new()];
        for v in 0..s.n_worlds() {
            sections = sections
                .iter()
                .flat_map(|sec| {
                    let choices: Vec<u32> = if v == wi {
                        vec![pin]
                    } else {
                        (0..s.domain(v).len() as u32).collect()
                    };
                    choices.into_iter().filter_map(move |e| {
                        // Coherence with every earlier world, both ways.
                        let ok = (0..v).all(|u| {
                            (!s.le(u, v) || s.push(u, v, sec[u]) == e)
                                && (!s.le(v, u) || s.push(v, u, e) == sec[u])
                        });
                        ok.then(|| {
                            let mut sec = sec.clone();
                            sec.push(e);
                            sec
                        })
                    })
                })
                .collect();
        }
        per_const.push(sections);
    }
    // With no constants this stays a single empty table: the bare
    // submodel is a member.
    let mut combos: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for sections in &per_const {
        combos = combos
            .iter()
            .flat_map(|c| {
                sections.iter().map(move |sec| {
                    let mut c = c.clone();
                    c.push(sec.clone());
                    c
                })
            })
            .collect();
    }
    combos
}

/// Truth at `(m, w, ā)` by the unsimplified induction.  Open atoms and
/// both quantifiers range over ⊕-sets; implication pushes the tuple to
/// every later world.  Equality atoms are available whenever the
/// signature carries equality.
pub fn eval_raw(
    m: &KripkeModel,
    w: &str,
    f: &Formula,
    tuple: &[String],
) -> Result<bool, EvalError> {
    f.check(m.sig())?;
    m.require_valid()?;
    let wi = m
        .world_index(w)
        .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
    let mut env = Vec::with_capacity(tuple.len());
    for (i, local) in tuple.iter().enumerate() {
        if m.elem_index(wi, local).is_none() {
            return Err(EvalError::Model(ModelError::UnknownElement {
                world: w.to_string(),
                local: local.clone(),
            }));
        }
        env.push((format!("x{}", i + 1), local.clone()));
    }
    let stray: Vec<String> = f
        .free_vars()
        .into_iter()
        .filter(|v| !env.iter().any(|(x, _)| x == v))
        .collect();
    if !stray.is_empty() {
        return Err(EvalError::UncoveredVars(stray, tuple.len()));
    }
    go(m, wi, f, &env)
}

fn fresh_for(m: &KripkeModel, f: &Formula, extra: usize) -> Vec<String> {
    let mut avoid = f.all_idents();
    avoid.extend(m.sig().consts.iter().cloned());
    avoid.extend(m.sig().preds.keys().cloned());
    fresh_consts(extra, &avoid)
}

fn go(m: &KripkeModel, w: usize, f: &Formula, env: &[(String, String)]) -> Result<bool, EvalError> {
    match f {
        Formula::Atom(..) | Formula::Eq(..) => {
            let open = match f {
                Formula::Atom(_, ts) => ts.iter().any(|t| matches!(t, Term::Var(_))),
                Formula::Eq(l, r) => {
                    matches!(l, Term::Var(_)) || matches!(r, Term::Var(_))
                }
                _ => unreachable!(),
            };
            if open {
                // Name the whole tuple and ask for one suitable ⊕-member.
                let names = fresh_for(m, f, env.len());
                let binding: Vec<(String, String)> = env
                    .iter()
                    .zip(&names)
                    .map(|((x, _), c)| (x.clone(), c.clone()))
                    .collect();
                let closed = f.substitute_constants(&binding)?;
                let values: Vec<String> = env.iter().map(|(_, a)| a.clone()).collect();
                for n in oplus_members(m, &m.worlds()[w], &names, &values)? {
                    if go(&n, n.world_index(&m.worlds()[w]).expect("core world"), &closed, &[])? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
            let resolve = |t: &Term| match t {
                Term::Const(c) => m.const_at(w, c).expect("validated constant"),
                Term::Var(_) => unreachable!("closed atom"),
            };
            match f {
                Formula::Atom(p, ts) => {
                    let row: Vec<u32> = ts.iter().map(resolve).collect();
                    Ok(m.holds(w, p, &row))
                }
                Formula::Eq(l, r) => Ok(resolve(l) == resolve(r)),
                _ => unreachable!(),
            }
        }
        Formula::Bottom => Ok(false),
        Formula::And(l, r) => Ok(go(m, w, l, env)? && go(m, w, r, env)?),
        Formula::Or(l, r) => Ok(go(m, w, l, env)? || go(m, w, r, env)?),
        Formula::Implies(l, r) => {
            for &v in m.successors(w) {
                let env_v = pushed(m, w, v, env);
                if go(m, v, l, &env_v)? && !go(m, v, r, &env_v)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(x, b) => {
            for a in m.domain(w) {
                let name = fresh_for(m, f, 1).pop().expect("fresh name");
                let closed = b.substitute_constants(&[(x.clone(), name.clone())])?;
                for n in oplus_members(m, &m.worlds()[w], &[name.clone()], &[a.clone()])? {
                    let nw = n.world_index(&m.worlds()[w]).expect("core world");
                    if go(&n, nw, &closed, env)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        Formula::Forall(x, b) => {
            for &v in m.successors(w) {
                let env_v = pushed(m, w, v, env);
                for a in m.domain(v) {
                    let name = fresh_for(m, f, 1).pop().expect("fresh name");
                    let closed = b.substitute_constants(&[(x.clone(), name.clone())])?;
                    let mut any = false;
                    for n in
                        oplus_members(m, &m.worlds()[v], &[name.clone()], &[a.clone()])?
                    {
                        let nv = n.world_index(&m.worlds()[v]).expect("core world");
                        if go(&n, nv, &closed, &env_v)? {
                            any = true;
                            break;
                        }
                    }
                    if !any {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

fn pushed(m: &KripkeModel, w: usize, v: usize, env: &[(String, String)]) -> Vec<(String, String)> {
    env.iter()
        .map(|(x, a)| {
            let e = m.elem_index(w, a).expect("tuple element");
            (x.clone(), m.elem_name(v, m.push(w, v, e)).to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};
    use crate::semantics::{eval, sentence_family, Logic};
    use crate::syntax::parse_formula;

    #[test]
    fn oplus_member_counts_on_the_fixtures() {
        let cd = fix_cd();
        let none: [String; 0] = [];
        assert_eq!(oplus_members(&cd, "w", &none, &none).unwrap().len(), 1);
        assert_eq!(oplus_members(&cd, "v", &none, &none).unwrap().len(), 2);
        let c1 = ["c1".to_string()];
        assert_eq!(
            oplus_members(&cd, "v", &c1, &["b".to_string()]).unwrap().len(),
            2
        );
        // b2 has no preimage, so no member may keep the lower world.
        assert_eq!(
            oplus_members(&cd, "v", &c1, &["b2".to_string()]).unwrap().len(),
            1
        );
        assert_eq!(
            oplus_members(&cd, "w", &c1, &["a".to_string()]).unwrap().len(),
            1
        );
        assert_eq!(oplus_members(&fix_chain(), "v", &none, &none).unwrap().len(), 2);
    }

    #[test]
    fn members_extend_the_generated_submodel_within_the_model() {
        let cd = fix_cd();
        let c1 = ["c1".to_string()];
        for n in oplus_members(&cd, "v", &c1, &["b".to_string()]).unwrap() {
            assert!(n.validate().is_empty());
            assert_eq!(n.const_at(n.world_index("v").unwrap(), "c1"), Some(0));
            let sigma_part = n.reduct(cd.sig()).unwrap();
            assert!(cd.generated_submodel("v").unwrap().is_submodel_of(&sigma_part));
            assert!(sigma_part.is_submodel_of(&cd));
        }
    }

    #[test]
    fn simplified_quantifier_clauses_agree_with_the_raw_definition() {
        let picked = [
            "forall x. P(x)",
            "exists x. P(x)",
            "exists x. (P(x) -> _|_)",
            "forall x. (P(x) | (P(x) -> _|_))",
            "forall x. exists y. (P(x) -> P(y))",
            "exists x. forall y. (P(y) -> P(x))",
        ];
        for m in [fix_chain(), fix_cd(), fix_eq().with_equality(false)] {
            let family = sentence_family(m.sig(), 2, 25);
            for w in m.worlds() {
                for f in picked
                    .iter()
                    .filter_map(|t| parse_formula(t, m.sig()).ok())
                    .chain(family.iter().cloned())
                {
                    assert_eq!(
                        eval(Logic::Il, &m, w, &f, &[]).unwrap(),
                        eval_raw(&m, w, &f, &[]).unwrap(),
                        "split verdict on `{f}` at {w}"
                    );
                }
            }
        }
    }

    #[test]
    fn equality_clause_agrees_with_the_raw_definition() {
        let m = fix_eq();
        let dec = parse_formula("forall x. forall y. (x = y | ~(x = y))", m.sig()).unwrap();
        for w in m.worlds() {
            assert_eq!(
                eval(Logic::IlEq, &m, w, &dec, &[]).unwrap(),
                eval_raw(&m, w, &dec, &[]).unwrap()
            );
        }
        assert!(!eval_raw(&m, "w", &dec, &[]).unwrap());
    }

    #[test]
    fn open_formulas_agree_and_respect_substitution() {
        let m = fix_cd();
        let cases = [("P(x1)", "a"), ("P(x1) -> Q(x1)", "a")];
        for (text, a) in cases {
            let f = parse_formula(text, m.sig()).unwrap();
            let tuple = [a.to_string()];
            let direct = eval(Logic::Il, &m, "w", &f, &tuple).unwrap();
            assert_eq!(direct, eval_raw(&m, "w", &f, &tuple).unwrap(), "`{text}`");
            // The substitution route: name the tuple and evaluate closed.
            let ext = m
                .constant_extension("w", &["d9".to_string()], &tuple)
                .unwrap();
            let closed = f
                .substitute_constants(&[("x1".to_string(), "d9".to_string())])
                .unwrap();
            assert_eq!(direct, eval(Logic::Il, &ext, "w", &closed, &[]).unwrap(), "`{text}`");
        }
    }
}
