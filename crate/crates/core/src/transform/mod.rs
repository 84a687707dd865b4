//! Model transformations: unravelling around a point, congruences and
//! their quotient models, the star expansion with its Q-contexts and
//! derived congruence, and isomorphic correction.

use thiserror::Error;

use crate::kripke::ModelError;
use crate::semantics::EvalError;

mod congruence;
mod correct;
mod star;
mod unravel;

pub use congruence::{
    check_congruence, quotient, quotient_relation, Congruence, CongruenceReport,
};
pub use correct::isomorphic_correction;
pub use star::{derive_star_congruence, q_formulas, star_expand, StarModel};
pub use unravel::{unravel, unravel_relation, UnravelMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unravelling depth must be at least 1")]
    BoundTooSmall,
    #[error("world name `{0}` contains `>`, which path serialization reserves")]
    BadWorldName(String),
    #[error("does not fit the model: {0}")]
    ShapeMismatch(String),
    #[error("not a congruence: {0}")]
    NotACongruence(String),
    #[error("the signature declares no star predicates (unary `Pp_*`)")]
    NoStarPredicates,
    #[error("world `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("(g, h) is not an elementary embedding at rank {0}")]
    NotAnEmbedding(u32),
}
