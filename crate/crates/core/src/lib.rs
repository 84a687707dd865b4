//! Workbench for finite first-order intuitionistic Kripke models.
//!
//! The crate provides:
//! - formula ASTs with a plain-text grammar ([`syntax`]),
//! - finite Kripke models over a poset of worlds with coherent
//!   homomorphisms, plus the model algebra ([`kripke`]),
//! - the satisfaction relation for the six standard intuitionistic
//!   logics in their eight presentations, rank-bounded theories and
//!   types ([`semantics`]),
//! - asimulation checking and search ([`asim`]),
//! - model transformations: unravelling, quotients, star expansion,
//!   isomorphic correction ([`transform`]),
//! - the command-line front end and property suites ([`cli`]).

pub mod asim;
pub mod cli;
pub mod kripke;
pub mod semantics;
pub mod syntax;
pub mod transform;
