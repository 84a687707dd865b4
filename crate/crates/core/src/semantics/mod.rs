//! Satisfaction for the eight standard-logic presentations, rank-bounded
//! theories and types, pair satisfaction, elementary-submodel and
//! embedding checks, and the three classes of finite types with their
//! realization search.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::kripke::{ClassReq, KripkeModel, ModelError};
use crate::syntax::{Formula, SyntaxError, Term};

pub mod family;
pub mod raw;
mod theory;
mod types;

pub use family::{sentence_family, DEFAULT_MAX_SENTENCES, MAX_QUANT_VARS};
pub use theory::{
    check_elementary_embedding_upto, is_elementary_submodel_upto, satisfies_pair, theory_slice,
    type_slice, FormulaPair, TheorySlice, TypeSlice, TUPLE_CAP,
};
pub use types::{classify_finite_type, is_type_realized, TypeKind};

/// The eight presentations.  `…Eq` adds the `=` atom family; `In`/`CD`/
/// `Bi` restrict admissible models to the injective, surjective and
/// bijective homomorphism classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Logic {
    Il,
    IlEq,
    In,
    InEq,
    Cd,
    CdEq,
    Bi,
    BiEq,
}

impl Logic {
    pub const ALL: [Logic; 8] = [
        Logic::Il,
        Logic::IlEq,
        Logic::In,
        Logic::InEq,
        Logic::Cd,
        Logic::CdEq,
        Logic::Bi,
        Logic::BiEq,
    ];

    /// `true` for the presentations whose language has the `=` atoms.
    pub fn has_equality(self) -> bool {
        matches!(self, Logic::IlEq | Logic::InEq | Logic::CdEq | Logic::BiEq)
    }

    /// The model class the presentation quantifies over.
    pub fn model_class(self) -> ClassReq {
        match self {
            Logic::Il | Logic::IlEq => ClassReq::Any,
            Logic::In | Logic::InEq => ClassReq::In,
            Logic::Cd | Logic::CdEq => ClassReq::Su,
            Logic::Bi | Logic::BiEq => ClassReq::Bi,
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::Il => "IL",
            Logic::IlEq => "ILeq",
            Logic::In => "In",
            Logic::InEq => "Ineq",
            Logic::Cd => "CD",
            Logic::CdEq => "CDeq",
            Logic::Bi => "Bi",
            Logic::BiEq => "Bieq",
        })
    }
}

impl FromStr for Logic {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Logic, EvalError> {
        match s {
            "IL" => Ok(Logic::Il),
            "ILeq" | "IL=" => Ok(Logic::IlEq),
            "In" => Ok(Logic::In),
            "Ineq" | "In=" => Ok(Logic::InEq),
            "CD" => Ok(Logic::Cd),
            "CDeq" | "CD=" => Ok(Logic::CdEq),
            "Bi" => Ok(Logic::Bi),
            "Bieq" | "Bi=" => Ok(Logic::BiEq),
            _ => Err(EvalError::UnknownLogic(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown logic `{0}`; expected IL, ILeq, In, Ineq, CD, CDeq, Bi or Bieq")]
    UnknownLogic(String),
    #[error("{logic} requires a model with {need} homomorphisms")]
    NotAdmissible { logic: Logic, need: &'static str },
    #[error("`=` atoms are not in the {0} language")]
    EqualityOutsideLogic(Logic),
    #[error("free variables {0:?} are not covered by x1..x{1}")]
    UncoveredVars(Vec<String>, usize),
    #[error("{kind:?} candidates take {want} constant name(s), got {got}")]
    ConstantCount {
        kind: TypeKind,
        want: usize,
        got: usize,
    },
    #[error("not a submodel: {0}")]
    NotASubmodel(String),
    #[error("the candidate is not a {0:?} type at the given point")]
    NotAType(TypeKind),
}

/// Requires the model to be valid and inside the logic's class.
pub fn check_admissible(logic: Logic, m: &KripkeModel) -> Result<(), EvalError> {
    let flags = m.classify()?;
    let (ok, need) = match logic.model_class() {
        ClassReq::Any => (true, ""),
        ClassReq::In => (flags.in_class, "injective"),
        ClassReq::Su => (flags.su_class, "surjective"),
        ClassReq::Bi => (flags.bi_class, "bijective"),
    };
    if ok {
        Ok(())
    } else {
        Err(EvalError::NotAdmissible { logic, need })
    }
}

/// Resolves the evaluation world and the tuple, and checks that the free
/// variables follow the `x1..xn` convention for a length-`n` tuple.
fn resolve_point(
    m: &KripkeModel,
    w: &str,
    f: &Formula,
    tuple: &[String],
) -> Result<(usize, Vec<(String, u32)>), EvalError> {
    let wi = m
        .world_index(w)
        .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
    let mut env = Vec::with_capacity(tuple.len());
    for (i, local) in tuple.iter().enumerate() {
        let e = m
            .elem_index(wi, local)
            .ok_or_else(|| ModelError::UnknownElement {
                world: w.to_string(),
                local: local.clone(),
            })?;
        env.push((format!("x{}", i + 1), e));
    }
    let stray: Vec<String> = f
        .free_vars()
        .into_iter()
        .filter(|v| !env.iter().any(|(x, _)| x == v))
        .collect();
    if !stray.is_empty() {
        return Err(EvalError::UncoveredVars(stray, tuple.len()));
    }
    Ok((wi, env))
}

/// Truth at `(m, w)` under the tuple `ā` (locals of `A_w`, assigned to
/// `x1..xn`).  Implication walks every `v ⪰ w` pushing the tuple through
/// `H_wv`; `∃` picks a witness in `A_w`; `∀` walks every `v ⪰ w` and every
/// element of `A_v`.  The CD/Bi presentations reuse these clauses — only
/// the admissibility check differs.
pub fn eval(
    logic: Logic,
    m: &KripkeModel,
    w: &str,
    f: &Formula,
    tuple: &[String],
) -> Result<bool, EvalError> {
    f.check(m.sig())?;
    if !logic.has_equality() {
        let mut has_eq = false;
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            match g {
                Formula::Eq(..) => has_eq = true,
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
                Formula::Forall(_, b) | Formula::Exists(_, b) => stack.push(b),
                _ => {}
            }
        }
        if has_eq {
            return Err(EvalError::EqualityOutsideLogic(logic));
        }
    }
    check_admissible(logic, m)?;
    let (wi, env) = resolve_point(m, w, f, tuple)?;
    let mut ev = Evaluator::new(m, f);
    Ok(ev.run(ev.root, wi, &env))
}

/// One compiled formula node; children are arena indices.
enum Node {
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Bottom,
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Forall(String, usize),
    Exists(String, usize),
}

/// Arena evaluator with a per-call memo keyed by node, world and the
/// environment projected onto the node's free variables.
struct Evaluator<'a> {
    m: &'a KripkeModel,
    nodes: Vec<Node>,
    fv: Vec<Vec<String>>,
    root: usize,
    memo: HashMap<(usize, usize, Vec<u32>), bool>,
}

impl<'a> Evaluator<'a> {
    fn new(m: &'a KripkeModel, f: &Formula) -> Evaluator<'a> {
        let mut ev = Evaluator {
            m,
            nodes: Vec::new(),
            fv: Vec::new(),
            root: 0,
            memo: HashMap::new(),
        };
        ev.root = ev.compile(f);
        ev
    }

    fn compile(&mut self, f: &Formula) -> usize {
        let (node, fv) = match f {
            Formula::Atom(p, ts) => {
                let fv = ts
                    .iter()
                    .filter_map(|t| match t {
                        Term::Var(v) => Some(v.clone()),
                        Term::Const(_) => None,
                    })
                    .collect();
                (Node::Atom(p.clone(), ts.clone()), fv)
            }
            Formula::Eq(l, r) => {
                let fv = [l, r]
                    .into_iter()
                    .filter_map(|t| match t {
                        Term::Var(v) => Some(v.clone()),
                        Term::Const(_) => None,
                    })
                    .collect();
                (Node::Eq(l.clone(), r.clone()), fv)
            }
            Formula::Bottom => (Node::Bottom, Vec::new()),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                let li = self.compile(l);
                let ri = self.compile(r);
                let mut fv = self.fv[li].clone();
                fv.extend(self.fv[ri].iter().cloned());
                let node = match f {
                    Formula::And(..) => Node::And(li, ri),
                    Formula::Or(..) => Node::Or(li, ri),
                    _ => Node::Implies(li, ri),
                };
                (node, fv)
            }
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                let bi = self.compile(b);
                let fv = self.fv[bi].iter().filter(|v| *v != x).cloned().collect();
                let node = match f {
                    Formula::Forall(..) => Node::Forall(x.clone(), bi),
                    _ => Node::Exists(x.clone(), bi),
                };
                (node, fv)
            }
        };
        let mut fv: Vec<String> = fv;
        fv.sort_unstable();
        fv.dedup();
        self.nodes.push(node);
        self.fv.push(fv);
        self.nodes.len() - 1
    }

    /// Innermost binding wins, giving shadowing for free.
    fn lookup(env: &[(String, u32)], x: &str) -> u32 {
        env.iter()
            .rev()
            .find(|(v, _)| v == x)
            .map(|(_, e)| *e)
            .expect("bound or tuple variable")
    }

    fn project(&self, id: usize, env: &[(String, u32)]) -> Vec<u32> {
        self.fv[id].iter().map(|x| Self::lookup(env, x)).collect()
    }

    fn term(&self, w: usize, t: &Term, env: &[(String, u32)]) -> u32 {
        match t {
            Term::Var(x) => Self::lookup(env, x),
            Term::Const(c) => self.m.const_at(w, c).expect("validated constant"),
        }
    }

    fn pushed(&self, w: usize, v: usize, env: &[(String, u32)]) -> Vec<(String, u32)> {
        env.iter()
            .map(|(x, e)| (x.clone(), self.m.push(w, v, *e)))
            .collect()
    }

    fn run(&mut self, id: usize, w: usize, env: &[(String, u32)]) -> bool {
        let key = (id, w, self.project(id, env));
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let out = match &self.nodes[id] {
            Node::Atom(p, ts) => {
                let row: Vec<u32> = ts.iter().map(|t| self.term(w, t, env)).collect();
                let p = p.clone();
                self.m.holds(w, &p, &row)
            }
            Node::Eq(l, r) => self.term(w, l, env) == self.term(w, r, env),
            Node::Bottom => false,
            &Node::And(l, r) => self.run(l, w, env) && self.run(r, w, env),
            &Node::Or(l, r) => self.run(l, w, env) || self.run(r, w, env),
            &Node::Implies(l, r) => self.m.successors(w).iter().all(|&v| {
                let env_v = self.pushed(w, v, env);
                !self.run(l, v, &env_v) || self.run(r, v, &env_v)
            }),
            Node::Forall(x, b) => {
                let (x, b) = (x.clone(), *b);
                self.m.successors(w).iter().all(|&v| {
                    let mut env_v = self.pushed(w, v, env);
                    env_v.push((x.clone(), 0));
                    (0..self.m.domain(v).len() as u32).all(|a| {
                        env_v.last_mut().expect("binder slot").1 = a;
                        self.run(b, v, &env_v)
                    })
                })
            }
            Node::Exists(x, b) => {
                let (x, b) = (x.clone(), *b);
                let mut env_a = env.to_vec();
                env_a.push((x, 0));
                (0..self.m.domain(w).len() as u32).any(|a| {
                    env_a.last_mut().expect("binder slot").1 = a;
                    self.run(b, w, &env_a)
                })
            }
        };
        self.memo.insert(key, out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::{fix_cd, fix_chain, fix_eq};
    use crate::kripke::{generate_random_model, RandomModelParams};
    use crate::syntax::{parse_formula, Signature};

    fn ev(logic: Logic, m: &KripkeModel, w: &str, text: &str) -> bool {
        let f = parse_formula(text, m.sig()).unwrap();
        eval(logic, m, w, &f, &[]).unwrap()
    }

    #[test]
    fn logic_names_round_trip() {
        for logic in Logic::ALL {
            assert_eq!(logic.to_string().parse::<Logic>().unwrap(), logic);
        }
        assert_eq!("CD=".parse::<Logic>().unwrap(), Logic::CdEq);
        assert!(matches!(
            "classical".parse::<Logic>(),
            Err(EvalError::UnknownLogic(_))
        ));
    }

    #[test]
    fn constant_domain_axiom_fails_on_the_fork_fixture() {
        let m = fix_cd();
        // As written, with the quantifier scoped maximally.
        assert!(!ev(
            Logic::Il,
            &m,
            "w",
            "forall x. (P(x) | Q(c)) -> (Q(c) | forall x. P(x))"
        ));
        // With the antecedent quantifier closed off explicitly.
        assert!(!ev(
            Logic::Il,
            &m,
            "w",
            "(forall x. (P(x) | Q(c))) -> (Q(c) | forall x. P(x))"
        ));
        assert!(ev(Logic::Il, &m, "v", "Q(c)"));
    }

    #[test]
    fn vacuous_implication_holds_everywhere() {
        let m = fix_cd();
        for w in ["w", "v"] {
            assert!(ev(Logic::Il, &m, w, "_|_ -> P(c)"));
        }
    }

    #[test]
    fn decidable_equality_separates_the_hom_classes() {
        let chain = fix_chain().with_equality(true);
        let dec = "forall x. forall y. (x = y | ~(x = y))";
        assert!(ev(Logic::InEq, &chain, "w", dec));
        // The merge hom makes a1, a2 indistinguishable but unequal.
        assert!(!ev(Logic::IlEq, &fix_eq(), "w", dec));
    }

    #[test]
    fn open_formulas_take_positional_tuples() {
        let m = fix_cd();
        let f = parse_formula("P(x1)", m.sig()).unwrap();
        assert!(eval(Logic::Il, &m, "w", &f, &["a".to_string()]).unwrap());
        assert!(!eval(Logic::Il, &m, "v", &f, &["b2".to_string()]).unwrap());
        assert!(matches!(
            eval(Logic::Il, &m, "w", &f, &[]),
            Err(EvalError::UncoveredVars(..))
        ));
        assert!(matches!(
            eval(Logic::Il, &m, "w", &f, &["zz".to_string()]),
            Err(EvalError::Model(ModelError::UnknownElement { .. }))
        ));
    }

    #[test]
    fn admissibility_is_enforced() {
        // fix_eq has a merging hom: outside In; fix_cd misses b2: outside Su.
        let f = parse_formula("_|_", fix_eq().sig()).unwrap();
        assert!(matches!(
            eval(Logic::In, &fix_eq(), "w", &f, &[]),
            Err(EvalError::NotAdmissible { .. })
        ));
        let g = parse_formula("P(c)", fix_cd().sig()).unwrap();
        assert!(matches!(
            eval(Logic::Cd, &fix_cd(), "w", &g, &[]),
            Err(EvalError::NotAdmissible { .. })
        ));
        assert!(eval(Logic::Cd, &fix_eq().with_equality(false), "w", &f, &[]).is_ok());
    }

    #[test]
    fn equality_needs_an_equality_logic() {
        let m = fix_eq();
        let f = parse_formula("forall x. x = x", m.sig()).unwrap();
        assert!(matches!(
            eval(Logic::Il, &m, "w", &f, &[]),
            Err(EvalError::EqualityOutsideLogic(Logic::Il))
        ));
        assert!(eval(Logic::IlEq, &m, "w", &f, &[]).unwrap());
    }

    #[test]
    fn truth_is_monotone_along_the_order() {
        let sig = Signature::new(
            [("P".to_string(), 1), ("R".to_string(), 2)],
            ["c".to_string()],
            false,
        )
        .unwrap();
        let params = RandomModelParams::new(sig.clone());
        for seed in 0..10 {
            let m = generate_random_model(seed, &params).unwrap();
            let sentences = sentence_family(&sig, 2, 40);
            for f in sentences.iter() {
                for w in 0..m.n_worlds() {
                    let holds_w = eval(Logic::Il, &m, &m.worlds()[w], f, &[]).unwrap();
                    if !holds_w {
                        continue;
                    }
                    for &v in m.successors(w) {
                        assert!(
                            eval(Logic::Il, &m, &m.worlds()[v], f, &[]).unwrap(),
                            "seed {seed}: `{f}` true at {} but not at {}",
                            m.worlds()[w],
                            m.worlds()[v]
                        );
                    }
                }
            }
        }
    }
}
