//! The simply typed lambda calculus over a finite higher-order signature.
//!
//! Terms live in a single-variable context `x : τ`. The set semantics
//! tabulates functions over enumerated finite sets. Per-base Galois
//! connections are lifted along products and function spaces to a family
//! `A(τ) ⇄ Q(⟦τ⟧)`; [`LambdaSem::csem_g`] is the induced best abstraction
//! and [`LambdaSem::psem`] the compositional one, which uses the best
//! abstraction only for constants.

mod abs;
mod sem;
mod set;
mod syntax;

pub use abs::{AbsFun, AbsVal, BaseKind, FinPoset, Lifted, ABS_CAP, PROBES};
pub use sem::{corpus_types, lambda_corpus, LambdaSem};
pub use set::{SetVal, Signature, DEFAULT_BASE_CAP, SPACE_CAP};
pub use syntax::{LTerm, LType};
