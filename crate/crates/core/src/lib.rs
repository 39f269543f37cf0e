//! Categorical abstract interpretation for a small while language and the
//! simply typed lambda calculus.
//!
//! The pipeline mirrors the usual abstract-interpretation stack:
//!
//! * [`lang`]: syntax of the while language and its scoped variant;
//! * [`monads`] and [`densem`]: monadic denotational semantics (maybe,
//!   powerset, finite subdistributions);
//! * [`logic`]: truth-value lattices, Eilenberg–Moore algebras and the
//!   wp/sp predicate transformers;
//! * [`collecting`]: the collecting semantics, both as `sp` of the
//!   denotation and by structural induction;
//! * [`domains`] and [`analyzer`]: Galois connections, non-relational
//!   domains, best abstract transformers and the inductive analyzer;
//! * [`lambda`]: the same construction for the simply typed lambda calculus;
//! * [`laws`]: checkers for oplax functoriality, lax naturality and the
//!   interpretation order, plus a program corpus to sweep them over.
//!
//! Everything that claims a theorem is checked by exhaustive enumeration on
//! finite `Ring(n)` value universes.

pub mod analyzer;
pub mod collecting;
pub mod densem;
pub mod domains;
mod error;
pub mod lambda;
pub mod lang;
pub mod laws;
pub mod logic;
pub mod monads;
pub mod par;

pub use error::{Error, Result};
