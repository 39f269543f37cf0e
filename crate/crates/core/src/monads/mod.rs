//! While-monads over memories.
//!
//! Three effects are supported: partiality ([`MonadKind::Maybe`], flat
//! order), nondeterminism ([`MonadKind::PowerSet`], inclusion order) and
//! probabilistic choice ([`MonadKind::SubDist`], pointwise order on finite
//! subdistributions with exact rational weights).
//!
//! [`MonadValue`] is generic in its carrier even though the semantics only
//! ever instantiates it with [`Memory`] or carrier indices.

mod memory;
mod universe;
mod value;

pub use memory::{Carrier, Memory};
pub use universe::Universe;
pub use value::{ChainLub, MonadKind, MonadValue, Weight, LUB_CAP, LUB_EPS};
