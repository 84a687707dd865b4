//! The three classes of finite types — successor, existential and
//! universal — and their realization in an elementary extension.  For a
//! finite candidate the every-finite-subset quantifier of the definitions
//! collapses to a single witness search, so both checks are exact: no
//! rank bound or sentence cap is involved.

use crate::kripke::{KripkeModel, ModelError};

use super::{satisfies_pair, EvalError, FormulaPair, Logic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    /// A pair `(Γ, Δ)` over `Σ ∪ {c̄_n}` jointly decided at some `v ⪰ w`
    /// under the pushed tuple.
    Successor,
    /// A set `Ξ` over `Σ ∪ {c̄_{n+1}}` satisfied at `w` itself once the
    /// last constant picks a witness in `A_w`.
    Existential,
    /// A set `Ξ` over `Σ ∪ {c̄_{n+1}}` falsified at some `v ⪰ w` once the
    /// last constant picks a witness in `A_v`.
    Universal,
}

impl TypeKind {
    /// Successor candidates name exactly the tuple's constants; the other
    /// two kinds name one more.
    fn wanted_names(self, values: usize) -> usize {
        match self {
            TypeKind::Successor => values,
            TypeKind::Existential | TypeKind::Universal => values + 1,
        }
    }
}

/// The collapsed witness search shared by classification (search in the
/// model itself) and realization (search in an extension).
fn witness_search(
    logic: Logic,
    m: &KripkeModel,
    w: &str,
    names: &[String],
    values: &[String],
    candidate: &FormulaPair,
    kind: TypeKind,
) -> Result<bool, EvalError> {
    if names.len() != kind.wanted_names(values.len()) {
        return Err(EvalError::ConstantCount {
            kind,
            want: kind.wanted_names(values.len()),
            got: names.len(),
        });
    }
    let wi = m
        .world_index(w)
        .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))?;
    let base: Vec<u32> = values
        .iter()
        .map(|a| {
            m.elem_index(wi, a).ok_or_else(|| ModelError::UnknownElement {
                world: w.to_string(),
                local: a.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    let pushed = |v: usize| -> Vec<String> {
        base.iter()
            .map(|&e| m.elem_name(v, m.push(wi, v, e)).to_string())
            .collect()
    };
    match kind {
        TypeKind::Successor => {
            for &v in m.successors(wi) {
                let ext = m.constant_extension(m.world_name(v), names, &pushed(v))?;
                if satisfies_pair(logic, &ext, m.world_name(v), candidate, &[])? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        TypeKind::Existential => {
            for b in m.domain(wi) {
                let mut vals = values.to_vec();
                vals.push(b.clone());
                let ext = m.constant_extension(w, names, &vals)?;
                if satisfies_pair(logic, &ext, w, candidate, &[])? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        TypeKind::Universal => {
            for &v in m.successors(wi) {
                for b in m.domain(v) {
                    let mut vals = pushed(v);
                    vals.push(b.clone());
                    let ext = m.constant_extension(m.world_name(v), names, &vals)?;
                    if satisfies_pair(logic, &ext, m.world_name(v), candidate, &[])? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }
}

/// Is the finite candidate a type of the given kind at `(m, w, c̄/ā)`?
/// The paper's shapes are `(Γ, Δ)` for successor candidates, `(Ξ, ∅)`
/// for existential ones and `(∅, Ξ)` for universal ones; the search
/// itself accepts any pair.
pub fn classify_finite_type(
    logic: Logic,
    m: &KripkeModel,
    w: &str,
    names: &[String],
    values: &[String],
    candidate: &FormulaPair,
    kind: TypeKind,
) -> Result<bool, EvalError> {
    witness_search(logic, m, w, names, values, candidate, kind)
}

/// Is the type realized in the extension `n ⪰ m`?  The witness pool
/// widens to `n`'s worlds above `w` and `n`'s domains; the submodel
/// relation and the type property itself are checked as preconditions.
/// Elementarity of the extension is the caller's contract.
pub fn is_type_realized(
    logic: Logic,
    m: &KripkeModel,
    n: &KripkeModel,
    w: &str,
    names: &[String],
    values: &[String],
    candidate: &FormulaPair,
    kind: TypeKind,
) -> Result<bool, EvalError> {
    if let Some(defect) = m.submodel_defect(n) {
        return Err(EvalError::NotASubmodel(defect));
    }
    if !classify_finite_type(logic, m, w, names, values, candidate, kind)? {
        return Err(EvalError::NotAType(kind));
    }
    witness_search(logic, n, w, names, values, candidate, kind)
}
