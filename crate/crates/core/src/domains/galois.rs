use super::{AbstractDomain, Product};
use crate::logic::{Predicate, TruthLattice};
use crate::monads::Carrier;
use crate::{Error, Result};

/// A Galois connection between two-valued predicates on a finite carrier
/// and an abstract domain over the same memories.
#[derive(Debug, Clone)]
pub struct GaloisConn<D> {
    pub domain: D,
    pub carrier: Carrier,
}

impl<D: AbstractDomain> GaloisConn<D> {
    pub fn new(domain: D, carrier: Carrier) -> Result<Self> {
        if domain.vars().as_ref() != carrier.names().as_ref()
            || domain.universe() != carrier.universe()
        {
            return Err(Error::CarrierMismatch(format!(
                "{} domain does not abstract this carrier",
                domain.name()
            )));
        }
        Ok(GaloisConn { domain, carrier })
    }

    pub fn alpha(&self, c: &Predicate) -> D::Elem {
        self.domain.alpha(c)
    }

    pub fn gamma(&self, a: &D::Elem) -> Predicate {
        Predicate::from_indices(
            TruthLattice::Bool2,
            &self.carrier,
            &self.domain.gamma_indices(a, &self.carrier),
        )
    }

    /// First `(c, a)` with `α(c) ≤ a` not equivalent to `c ≤ γ(a)`.
    pub fn adjunction_violation<'a>(
        &self,
        preds: impl IntoIterator<Item = &'a Predicate>,
        elems: &[D::Elem],
    ) -> Option<(Predicate, D::Elem)> {
        let gammas: Vec<Predicate> = elems.iter().map(|a| self.gamma(a)).collect();
        for c in preds {
            let ac = self.alpha(c);
            for (a, ga) in elems.iter().zip(&gammas) {
                let left = self.domain.leq(&ac, a);
                let right = c.leq(ga).unwrap_or(false);
                if left != right {
                    return Some((c.clone(), a.clone()));
                }
            }
        }
        None
    }

    /// First element with `α(γ(a)) ≠ a`, if any.
    pub fn insertion_violation(&self, elems: &[D::Elem]) -> Option<D::Elem> {
        elems
            .iter()
            .find(|a| self.alpha(&self.gamma(a)) != **a)
            .cloned()
    }
}

/// The product connection `α(c) = (α₁(c), α₂(c))`, `γ(u, v) = γ₁(u) ∧ γ₂(v)`.
pub fn product_concretization<A, B>(
    g1: GaloisConn<A>,
    g2: GaloisConn<B>,
) -> Result<GaloisConn<Product<A, B>>>
where
    A: AbstractDomain,
    B: AbstractDomain,
{
    if !g1.carrier.same_as(&g2.carrier) {
        return Err(Error::CarrierMismatch(
            "product of connections over different carriers".into(),
        ));
    }
    GaloisConn::new(Product::new(g1.domain, g2.domain)?, g1.carrier)
}
