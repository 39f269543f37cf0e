//! Truth values, predicates and predicate transformers.
//!
//! A predicate on a finite carrier is a vector of truth values. Given an
//! Eilenberg–Moore algebra `o : TΩ → Ω`, a Kleisli arrow `f : X → TY`
//! induces `wp(f)(ψ) = o ∘ Tψ ∘ f` and its left adjoint `sp(f)`.
//! All shipped algebras compute `o` as the meet of the support, which
//! makes both transformers closed-form.

mod algebra;
mod predicate;
mod table;
mod truth;

pub use algebra::{guard_predicate, sp, wp, EMAlgebra};
pub use predicate::Predicate;
pub use table::KleisliTable;
pub use truth::{ExtNonNeg, Truth, TruthLattice};
