//! Finite Kripke models over a poset of worlds: per-world classical
//! structures with pairwise-disjoint domains linked by a coherent system
//! of homomorphisms, plus the model algebra built on top of them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{Signature, SyntaxError};

mod inject;
mod json;
mod ops;
mod random;

pub mod fixtures;

pub use inject::Injectivization;
pub use json::ModelData;
pub use ops::{check_isomorphism, identity_maps, union_chain};
pub use random::{generate_random_model, ClassReq, RandomModelParams};

/// A world-qualified element.  Qualification makes the global
/// disjointness of domains a construction invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub world: String,
    pub local: String,
}

impl Element {
    pub fn new(world: impl Into<String>, local: impl Into<String>) -> Element {
        Element {
            world: world.into(),
            local: local.into(),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.local, self.world)
    }
}

/// Structural laws a model can violate; reported by [`KripkeModel::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    NonEmptyWorlds,
    Antisymmetry,
    NonEmptyDomain,
    PredMonotone,
    ConstCoherent,
    HomIdentity,
    HomComposition,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Law::NonEmptyWorlds => "non-empty set of worlds",
            Law::Antisymmetry => "antisymmetry of the order",
            Law::NonEmptyDomain => "non-empty domain",
            Law::PredMonotone => "predicate monotonicity along homomorphisms",
            Law::ConstCoherent => "constant coherence along homomorphisms",
            Law::HomIdentity => "identity homomorphism at each world",
            Law::HomComposition => "homomorphism composition",
        };
        f.write_str(s)
    }
}

/// A violated law together with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub law: Law,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.law, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("duplicate element `{local}` at world `{world}`")]
    DuplicateElement { world: String, local: String },
    #[error("unknown element `{local}` at world `{world}`")]
    UnknownElement { world: String, local: String },
    #[error("`{name}` at world `{world}` is not a symbol of the signature")]
    UnknownSymbol { world: String, name: String },
    #[error("row for `{pred}` at world `{world}` has {got} entries, expected {expected}")]
    BadRow {
        world: String,
        pred: String,
        expected: usize,
        got: usize,
    },
    #[error("constant `{konst}` has no denotation at world `{world}`")]
    MissingConst { world: String, konst: String },
    #[error("hom key `{0}` does not name a unique pair of worlds")]
    BadHomKey(String),
    #[error("hom given for `{from}` -> `{to}`, which are not related by the order")]
    NotAnEdge { from: String, to: String },
    #[error("hom `{from}` -> `{to}` misses element `{local}`")]
    PartialHom {
        from: String,
        to: String,
        local: String,
    },
    #[error("no homomorphism derivable for the related pair `{from}` -> `{to}`")]
    MissingHom { from: String, to: String },
    #[error("empty name for a world or element")]
    EmptyName,
    #[error("invalid model JSON: {0}")]
    Json(String),
    #[error("model violates its structural laws: {0}")]
    Invalid(Diagnostic),
    #[error("element set is not closed: {0} escapes via a homomorphism")]
    NotClosed(Element),
    #[error("element {0} lies outside the selected worlds")]
    OutsideSelection(Element),
    #[error("constant `{konst}` denotes {elem}, which is outside the element set")]
    ConstantOutside { konst: String, elem: Element },
    #[error("world `{0}` would have an empty domain")]
    WouldBeEmpty(String),
    #[error("not a subsignature of the model's signature")]
    NotSubsignature,
    #[error("{names} names given for {values} values")]
    LengthMismatch { names: usize, values: usize },
    #[error("chain condition fails between members {index} and {next}: {detail}")]
    NotAChain {
        index: usize,
        next: usize,
        detail: String,
    },
    #[error("empty chain")]
    EmptyChain,
    #[error("the construction does not support signatures with equality")]
    EqualityUnsupported,
    #[error("could not generate a model satisfying the constraints after {0} attempts")]
    GenerationFailed(usize),
}

/// In/Su/Bi membership flags, computed by exhaustive inspection of every
/// homomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassFlags {
    pub in_class: bool,
    pub su_class: bool,
    pub bi_class: bool,
}

/// A model with a distinguished world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedModel {
    pub model: KripkeModel,
    pub point: String,
}

impl PointedModel {
    pub fn new(model: KripkeModel, point: impl Into<String>) -> Result<Self, ModelError> {
        let point = point.into();
        if model.world_index(&point).is_none() {
            return Err(ModelError::UnknownWorld(point));
        }
        Ok(PointedModel { model, point })
    }

    /// The point sees every world.
    pub fn is_rooted(&self) -> bool {
        let w = self.model.world_index(&self.point).expect("point exists");
        self.model.leq[w].len() == self.model.worlds.len()
    }
}

/// A finite Kripke model.  The order is kept as reflexive-transitive
/// successor sets; homomorphisms are total tables for every related pair
/// (including the diagonal).  Construction goes through [`ModelData`],
/// which resolves names and completes missing composite homomorphisms;
/// the structural laws themselves are checked by [`KripkeModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub(crate) sig: Signature,
    pub(crate) worlds: Vec<String>,
    pub(crate) leq: Vec<BTreeSet<usize>>,
    pub(crate) domains: Vec<Vec<String>>,
    pub(crate) preds: Vec<BTreeMap<String, BTreeSet<Vec<u32>>>>,
    pub(crate) consts: Vec<BTreeMap<String, u32>>,
    pub(crate) homs: BTreeMap<(usize, usize), Vec<u32>>,
}

impl KripkeModel {
    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.binary_search_by(|w| w.as_str().cmp(name)).ok()
    }

    pub fn world_name(&self, w: usize) -> &str {
        &self.worlds[w]
    }

    /// Successor set of `w` under the reflexive-transitive order.
    pub fn successors(&self, w: usize) -> &BTreeSet<usize> {
        &self.leq[w]
    }

    /// `w ≺ v` in the reflexive-transitive order.
    pub fn le(&self, w: usize, v: usize) -> bool {
        self.leq[w].contains(&v)
    }

    pub fn le_named(&self, w: &str, v: &str) -> Option<bool> {
        Some(self.le(self.world_index(w)?, self.world_index(v)?))
    }

    pub fn domain(&self, w: usize) -> &[String] {
        &self.domains[w]
    }

    pub fn elem_index(&self, w: usize, local: &str) -> Option<u32> {
        self.domains[w]
            .binary_search_by(|e| e.as_str().cmp(local))
            .ok()
            .map(|i| i as u32)
    }

    pub fn elem_name(&self, w: usize, e: u32) -> &str {
        &self.domains[w][e as usize]
    }

    pub fn element(&self, w: usize, e: u32) -> Element {
        Element::new(self.worlds[w].clone(), self.domains[w][e as usize].clone())
    }

    /// Extension of `p` at `w`; empty if the predicate has no rows there.
    pub fn pred_rows(&self, w: usize, p: &str) -> Option<&BTreeSet<Vec<u32>>> {
        self.preds[w].get(p)
    }

    pub fn holds(&self, w: usize, p: &str, row: &[u32]) -> bool {
        self.preds[w]
            .get(p)
            .map(|rows| rows.contains(row))
            .unwrap_or(false)
    }

    pub fn const_at(&self, w: usize, c: &str) -> Option<u32> {
        self.consts[w].get(c).copied()
    }

    pub fn hom(&self, w: usize, v: usize) -> Option<&Vec<u32>> {
        self.homs.get(&(w, v))
    }

    /// Pushes an element through `H_{wv}`.  Panics when the worlds are
    /// unrelated; use on validated models.
    pub fn push(&self, w: usize, v: usize, e: u32) -> u32 {
        self.homs[&(w, v)][e as usize]
    }

    pub fn push_tuple(&self, w: usize, v: usize, tuple: &[u32]) -> Vec<u32> {
        let h = &self.homs[&(w, v)];
        tuple.iter().map(|&e| h[e as usize]).collect()
    }

    /// Checks every structural law and reports all violations.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.worlds.len();
        if n == 0 {
            out.push(Diagnostic {
                law: Law::NonEmptyWorlds,
                detail: "the model has no worlds".to_string(),
            });
        }
        for w in 0..n {
            for &v in &self.leq[w] {
                if v != w && self.leq[v].contains(&w) {
                    out.push(Diagnostic {
                        law: Law::Antisymmetry,
                        detail: format!(
                            "`{}` and `{}` are related in both directions",
                            self.worlds[w], self.worlds[v]
                        ),
                    });
                }
            }
        }
        for w in 0..n {
            if self.domains[w].is_empty() {
                out.push(Diagnostic {
                    law: Law::NonEmptyDomain,
                    detail: format!("world `{}` has an empty domain", self.worlds[w]),
                });
            }
        }
        for w in 0..n {
            let id = &self.homs[&(w, w)];
            if id.iter().enumerate().any(|(i, &j)| i as u32 != j) {
                out.push(Diagnostic {
                    law: Law::HomIdentity,
                    detail: format!("H at `{}` is not the identity", self.worlds[w]),
                });
            }
        }
        for w in 0..n {
            for &v in &self.leq[w] {
                for &u in &self.leq[v] {
                    // w ≺ v ≺ u: H_{wu} must equal the composite.
                    let wu = &self.homs[&(w, u)];
                    let wv = &self.homs[&(w, v)];
                    let vu = &self.homs[&(v, u)];
                    for e in 0..self.domains[w].len() {
                        if wu[e] != vu[wv[e] as usize] {
                            out.push(Diagnostic {
                                law: Law::HomComposition,
                                detail: format!(
                                    "element `{}` of `{}`: via `{}` gives `{}`, directly `{}`",
                                    self.domains[w][e],
                                    self.worlds[w],
                                    self.worlds[v],
                                    self.domains[u][vu[wv[e] as usize] as usize],
                                    self.domains[u][wu[e] as usize],
                                ),
                            });
                            break;
                        }
                    }
                }
            }
        }
        for w in 0..n {
            for &v in &self.leq[w] {
                if v == w {
                    continue;
                }
                for (p, rows) in &self.preds[w] {
                    for row in rows {
                        let pushed = self.push_tuple(w, v, row);
                        if !self.holds(v, p, &pushed) {
                            out.push(Diagnostic {
                                law: Law::PredMonotone,
                                detail: format!(
                                    "`{}` holds of ({}) at `{}` but not of the image at `{}`",
                                    p,
                                    row.iter()
                                        .map(|&e| self.domains[w][e as usize].clone())
                                        .collect::<Vec<_>>()
                                        .join(","),
                                    self.worlds[w],
                                    self.worlds[v],
                                ),
                            });
                        }
                    }
                }
                for c in &self.sig.consts {
                    let (Some(cw), Some(cv)) = (self.const_at(w, c), self.const_at(v, c)) else {
                        continue;
                    };
                    if self.push(w, v, cw) != cv {
                        out.push(Diagnostic {
                            law: Law::ConstCoherent,
                            detail: format!(
                                "`{}` denotes `{}` at `{}`, but its image at `{}` is `{}`, not `{}`",
                                c,
                                self.domains[w][cw as usize],
                                self.worlds[w],
                                self.worlds[v],
                                self.domains[v][self.push(w, v, cw) as usize],
                                self.domains[v][cv as usize],
                            ),
                        });
                    }
                }
            }
        }
        out
    }

    /// Errors unless [`KripkeModel::validate`] is clean.
    pub fn require_valid(&self) -> Result<(), ModelError> {
        match self.validate().into_iter().next() {
            None => Ok(()),
            Some(d) => Err(ModelError::Invalid(d)),
        }
    }

    /// In/Su/Bi flags; requires a valid model.
    pub fn classify(&self) -> Result<ClassFlags, ModelError> {
        self.require_valid()?;
        let mut in_class = true;
        let mut su_class = true;
        for ((w, v), h) in &self.homs {
            if w == v {
                continue;
            }
            let mut seen = BTreeSet::new();
            for &t in h {
                if !seen.insert(t) {
                    in_class = false;
                }
            }
            if seen.len() != self.domains[*v].len() {
                su_class = false;
            }
        }
        Ok(ClassFlags {
            in_class,
            su_class,
            bi_class: in_class && su_class,
        })
    }

    /// All elements of the model in canonical (world, local) order.
    pub fn all_elements(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for w in 0..self.worlds.len() {
            for e in &self.domains[w] {
                out.push(Element::new(self.worlds[w].clone(), e.clone()));
            }
        }
        out
    }

    /// Same model with the signature's equality flag replaced; useful for
    /// switching between the plain and equality-enriched languages.
    pub fn with_equality(&self, equality: bool) -> KripkeModel {
        let mut m = self.clone();
        m.sig = m.sig.with_equality(equality);
        m
    }

    /// Empty extensions and absent extensions are the same model;
    /// constructors call this so structural equality sees one form.
    pub(crate) fn prune_empty_preds(&mut self) {
        for table in &mut self.preds {
            table.retain(|_, rows| !rows.is_empty());
        }
    }
}
