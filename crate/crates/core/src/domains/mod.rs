//! Abstract domains and Galois connections.
//!
//! A [`ValueDomain`] abstracts sets of integers; [`NonRelational`] lifts it
//! to memories by keeping one abstract value per variable. Domains that
//! work on whole memories implement [`AbstractDomain`], which also carries
//! the transfer functions used by the inductive analyzer. [`Product`] is
//! the plain Cartesian product, concretized by intersection.

mod constants;
mod galois;
mod interval;
mod nonrel;
mod product;
mod sign;
mod trivial;

use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use serde_json::Value;

use crate::lang::{AExpr, ArithOp, BExpr};
use crate::logic::Predicate;
use crate::monads::{Carrier, Memory, Universe};
use crate::Result;

pub use constants::{ConstVal, Constants};
pub use galois::{product_concretization, GaloisConn};
pub use interval::{Interval, Itv};
pub use nonrel::{AbsMem, NonRelational};
pub use product::Product;
pub use sign::{Sign, SignVal};
pub use trivial::Trivial;

/// A lattice of abstract integer values with a Galois connection to sets
/// of values of a [`Universe`].
pub trait ValueDomain: Clone + Debug + Send + Sync + 'static {
    type Val: Clone + Eq + Hash + Debug + Send + Sync;

    fn name(&self) -> &'static str;
    fn universe(&self) -> Universe;

    fn bottom(&self) -> Self::Val;
    fn top(&self) -> Self::Val;
    fn is_bottom(&self, v: &Self::Val) -> bool {
        *v == self.bottom()
    }
    fn leq(&self, a: &Self::Val, b: &Self::Val) -> bool;
    fn join(&self, a: &Self::Val, b: &Self::Val) -> Self::Val;
    fn meet(&self, a: &Self::Val, b: &Self::Val) -> Self::Val;
    /// Defaults to the join, which is a widening on finite-height lattices.
    fn widen(&self, a: &Self::Val, b: &Self::Val) -> Self::Val {
        self.join(a, b)
    }
    fn finite_height(&self) -> bool;

    /// `α({v})`.
    fn abstract_value(&self, v: i64) -> Self::Val;
    /// `v ∈ γ(a)`.
    fn contains(&self, a: &Self::Val, v: i64) -> bool;
    /// `γ(a)` when it is finite and at most `cap` large.
    fn concretize(&self, a: &Self::Val, cap: usize) -> Option<Vec<i64>>;
    /// Every abstract value, when there are finitely many.
    fn elements(&self) -> Option<Vec<Self::Val>>;

    /// Abstraction of the integers `lo..=hi` (already inside the universe).
    fn range(&self, lo: i64, hi: i64) -> Self::Val;
    /// Sound abstract counterpart of the universe's arithmetic.
    fn binop(&self, op: ArithOp, a: &Self::Val, b: &Self::Val) -> Self::Val;

    fn literal(&self, k: i64) -> Self::Val {
        self.abstract_value(self.universe().embed(k))
    }

    fn alpha_values(&self, vs: &[i64]) -> Self::Val {
        vs.iter().fold(self.bottom(), |acc, v| {
            self.join(&acc, &self.abstract_value(*v))
        })
    }

    fn to_json(&self, v: &Self::Val) -> Value;
    fn from_json(&self, v: &Value) -> Result<Self::Val>;
}

/// An abstract domain over memories of a fixed variable set, with the
/// transfer functions of the inductive analyzer.
pub trait AbstractDomain: Send + Sync {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn name(&self) -> String;
    fn vars(&self) -> &Arc<[String]>;
    fn universe(&self) -> Universe;

    fn bottom(&self) -> Self::Elem;
    fn top(&self) -> Self::Elem;
    fn is_bottom(&self, a: &Self::Elem) -> bool {
        *a == self.bottom()
    }
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn widen(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn finite_height(&self) -> bool;
    /// Every element, when the lattice is finite and small enough.
    fn elements(&self) -> Option<Vec<Self::Elem>>;

    /// `α({m})`.
    fn abstract_memory(&self, m: &Memory) -> Self::Elem;
    /// `m ∈ γ(a)`.
    fn contains(&self, a: &Self::Elem, m: &Memory) -> bool;
    /// `γ(a)` as a list of memories, when finite and at most `cap` large.
    fn concretize(&self, a: &Self::Elem, cap: usize) -> Option<Vec<Memory>>;

    /// Abstract `x := e`.
    fn assign(&self, x: &str, e: &AExpr, a: &Self::Elem) -> Result<Self::Elem>;
    /// Abstract `x := havoc(lo, hi)`.
    fn havoc(&self, x: &str, lo: i64, hi: i64, a: &Self::Elem) -> Result<Self::Elem>;
    /// Abstraction of the guard predicate `grd b v`.
    fn guard(&self, b: &BExpr, v: bool) -> Result<Self::Elem>;

    fn to_json(&self, a: &Self::Elem) -> Value;
    fn from_json(&self, v: &Value) -> Result<Self::Elem>;

    /// `α` of a two-valued predicate.
    fn alpha(&self, p: &Predicate) -> Self::Elem {
        alpha_by_memories(self, p)
    }

    /// Carrier indices of `γ(a)`.
    fn gamma_indices(&self, a: &Self::Elem, c: &Carrier) -> Vec<usize> {
        gamma_by_memories(self, a, c)
    }
}

/// `α(p)` as the join of `α({m})` over the support of `p`.
pub fn alpha_by_memories<D: AbstractDomain + ?Sized>(d: &D, p: &Predicate) -> D::Elem {
    p.support().into_iter().fold(d.bottom(), |acc, i| {
        d.join(&acc, &d.abstract_memory(&p.carrier.memory(i)))
    })
}

/// `γ(a)` by testing every memory of `c`.
pub fn gamma_by_memories<D: AbstractDomain + ?Sized>(
    d: &D,
    a: &D::Elem,
    c: &Carrier,
) -> Vec<usize> {
    if d.is_bottom(a) {
        return Vec::new();
    }
    (0..c.len())
        .filter(|i| d.contains(a, &c.memory(*i)))
        .collect()
}
