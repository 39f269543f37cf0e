use super::predicate::Predicate;
use super::table::KleisliTable;
use super::truth::{Truth, TruthLattice};
use crate::densem::eval_bexpr;
use crate::lang::BExpr;
use crate::monads::{Carrier, MonadKind, MonadValue};
use crate::{Error, Result};

/// A meet-preserving Eilenberg–Moore algebra `o : TΩ → Ω`.
///
/// Only the pairs with a known algebra can be built: powerset and maybe
/// over the booleans, and powerset over `[0, ∞]` in either order. In each
/// case `o` is the meet of the support (so `o(∅) = ⊤`), which is what
/// makes `sp` strict and ω-continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EMAlgebra {
    monad: MonadKind,
    lattice: TruthLattice,
}

impl EMAlgebra {
    pub fn new(monad: MonadKind, lattice: TruthLattice) -> Result<Self> {
        let ok = matches!(
            (monad, lattice),
            (MonadKind::PowerSet, _) | (MonadKind::Maybe, TruthLattice::Bool2)
        );
        if !ok {
            return Err(Error::NoAlgebra {
                monad: monad.to_string(),
                lattice: lattice.to_string(),
            });
        }
        let alg = EMAlgebra { monad, lattice };
        alg.validate()?;
        Ok(alg)
    }

    pub fn monad(&self) -> MonadKind {
        self.monad
    }

    pub fn lattice(&self) -> TruthLattice {
        self.lattice
    }

    /// The hypotheses under which the inductive collecting semantics is
    /// exact. Every constructible algebra satisfies them.
    pub fn sp_continuous_and_strict(&self) -> bool {
        true
    }

    pub fn apply(&self, v: &MonadValue<Truth>) -> Truth {
        self.lattice.meet_all(v.support().into_iter().copied())
    }

    /// `o ∘ Tφ` evaluated on an index-valued monad element.
    pub fn apply_pred(&self, phi: &Predicate, v: &MonadValue<usize>) -> Truth {
        self.lattice
            .meet_all(v.support().into_iter().map(|i| phi.values[*i]))
    }

    /// Checks `o ∘ η = id`, preservation of top and of binary meets by
    /// `φ ↦ o ∘ Tφ` on every element of `T{0,1,2}` of support size ≤ 2.
    fn validate(&self) -> Result<()> {
        let l = self.lattice;
        let sample = l.sample();
        let mut elems: Vec<Vec<usize>> = vec![vec![]];
        for i in 0..3 {
            elems.push(vec![i]);
            for j in i + 1..3 {
                elems.push(vec![i, j]);
            }
        }
        let lift = |idx: &[usize]| -> Option<MonadValue<usize>> {
            match self.monad {
                MonadKind::Maybe if idx.len() > 1 => None,
                MonadKind::Maybe => Some(MonadValue::Maybe(idx.first().copied())),
                _ => Some(MonadValue::PowSet(idx.iter().copied().collect())),
            }
        };
        let fail = |what: &str| {
            Err(Error::NoAlgebra {
                monad: self.monad.to_string(),
                lattice: format!("{} ({what} fails)", l),
            })
        };
        for &t in &sample {
            if self.apply(&self.monad.unit(t)) != t {
                return fail("unit law");
            }
        }
        let mut preds: Vec<[Truth; 3]> = Vec::new();
        for &a in &sample {
            for &b in &sample {
                for &c in &sample {
                    preds.push([a, b, c]);
                }
            }
        }
        for idx in &elems {
            let Some(v) = lift(idx) else { continue };
            let at = |phi: &[Truth; 3]| l.meet_all(v.support().into_iter().map(|i| phi[*i]));
            if at(&[l.top(); 3]) != l.top() {
                return fail("top preservation");
            }
            for p in &preds {
                for q in &preds {
                    let m = [l.meet(p[0], q[0]), l.meet(p[1], q[1]), l.meet(p[2], q[2])];
                    if at(&m) != l.meet(at(p), at(q)) {
                        return fail("meet preservation");
                    }
                }
            }
        }
        Ok(())
    }

    fn check(&self, f: &KleisliTable) -> Result<()> {
        if f.kind != self.monad {
            return Err(Error::MonadMismatch {
                expected: self.monad.to_string(),
                found: f.kind.to_string(),
            });
        }
        Ok(())
    }
}

fn check_pred(p: &Predicate, c: &Carrier, lattice: TruthLattice, role: &str) -> Result<()> {
    if !p.carrier.same_as(c) || p.lattice != lattice {
        return Err(Error::CarrierMismatch(format!(
            "{role} predicate does not live on the arrow's {role} carrier"
        )));
    }
    Ok(())
}

/// Weakest precondition `wp(f)(ψ) = o ∘ Tψ ∘ f`.
pub fn wp(o: &EMAlgebra, f: &KleisliTable, post: &Predicate) -> Result<Predicate> {
    o.check(f)?;
    check_pred(post, &f.cod, o.lattice, "codomain")?;
    let values = f.rows.iter().map(|r| o.apply_pred(post, r)).collect();
    Predicate::new(o.lattice, f.dom.clone(), values)
}

/// Strongest postcondition, the left adjoint of [`wp`]:
/// `sp(f)(φ)(y) = ⋁ { φ(x) | y ∈ supp f(x) }`.
pub fn sp(o: &EMAlgebra, f: &KleisliTable, pre: &Predicate) -> Result<Predicate> {
    o.check(f)?;
    check_pred(pre, &f.dom, o.lattice, "domain")?;
    let l = o.lattice;
    let bot = l.bottom();
    let mut values = vec![bot; f.cod.len()];
    for (x, row) in f.rows.iter().enumerate() {
        let phi = pre.values[x];
        if phi == bot {
            continue;
        }
        for y in row.support() {
            values[*y] = l.join(values[*y], phi);
        }
    }
    Predicate::new(l, f.cod.clone(), values)
}

/// `grd b v`: `⊤` where `b` evaluates to `v`, `⊥` elsewhere.
pub fn guard_predicate(
    b: &BExpr,
    carrier: &Carrier,
    lattice: TruthLattice,
    v: bool,
) -> Result<Predicate> {
    let u = carrier.universe();
    let values = carrier
        .memories()
        .map(|m| Ok(lattice.from_bool(eval_bexpr(u, b, &m)? == v)))
        .collect::<Result<Vec<_>>>()?;
    Predicate::new(lattice, carrier.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_bexpr;
    use crate::logic::ExtNonNeg;
    use crate::monads::Universe;
    use std::collections::BTreeSet;

    fn carrier(n: u32) -> Carrier {
        Carrier::of(&["x"], Universe::Ring(n)).unwrap()
    }

    fn pow_table(c: &Carrier, rows: &[&[usize]]) -> KleisliTable {
        KleisliTable::new(
            MonadKind::PowerSet,
            c.clone(),
            c.clone(),
            rows.iter()
                .map(|r| MonadValue::PowSet(r.iter().copied().collect::<BTreeSet<_>>()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn shipped_algebras_only() {
        assert!(EMAlgebra::new(MonadKind::PowerSet, TruthLattice::Bool2).is_ok());
        assert!(EMAlgebra::new(MonadKind::Maybe, TruthLattice::Bool2).is_ok());
        assert!(EMAlgebra::new(MonadKind::PowerSet, TruthLattice::ExtNonNegDown).is_ok());
        assert!(EMAlgebra::new(MonadKind::PowerSet, TruthLattice::ExtNonNegUp).is_ok());
        assert!(EMAlgebra::new(MonadKind::SubDist, TruthLattice::Bool2).is_err());
        assert!(EMAlgebra::new(MonadKind::Maybe, TruthLattice::ExtNonNegDown).is_err());
    }

    #[test]
    fn powerset_bool_wp_is_universal() {
        let o = EMAlgebra::new(MonadKind::PowerSet, TruthLattice::Bool2).unwrap();
        let c = carrier(3);
        let f = pow_table(&c, &[&[0, 1], &[1], &[]]);
        let psi = Predicate::from_indices(TruthLattice::Bool2, &c, &[1]);
        let w = wp(&o, &f, &psi).unwrap();
        assert_eq!(w.support(), vec![1, 2]);
    }

    #[test]
    fn sp_direct_image() {
        // f(x1) = {y1, y2}, f(x2) = {y2}, φ = {x1}
        let o = EMAlgebra::new(MonadKind::PowerSet, TruthLattice::Bool2).unwrap();
        let c = carrier(2);
        let f = pow_table(&c, &[&[0, 1], &[1]]);
        let phi = Predicate::from_indices(TruthLattice::Bool2, &c, &[0]);
        assert_eq!(sp(&o, &f, &phi).unwrap().support(), vec![0, 1]);
    }

    #[test]
    fn quantitative_wp_is_inf() {
        let l = TruthLattice::ExtNonNegDown;
        let o = EMAlgebra::new(MonadKind::PowerSet, l).unwrap();
        let c = carrier(3);
        let f = pow_table(&c, &[&[0, 1, 2], &[2], &[]]);
        let psi = Predicate::new(
            l,
            c.clone(),
            vec![
                Truth::Ext(ExtNonNeg::fin(1, 2)),
                Truth::Ext(ExtNonNeg::Inf),
                Truth::Ext(ExtNonNeg::fin(1, 1)),
            ],
        )
        .unwrap();
        let w = wp(&o, &f, &psi).unwrap();
        assert_eq!(
            w.values,
            vec![
                Truth::Ext(ExtNonNeg::fin(1, 2)),
                Truth::Ext(ExtNonNeg::fin(1, 1)),
                Truth::Ext(ExtNonNeg::Inf)
            ]
        );
    }

    #[test]
    fn unit_arrow_is_identity_for_both() {
        let c = carrier(4);
        for (k, l) in [
            (MonadKind::PowerSet, TruthLattice::Bool2),
            (MonadKind::Maybe, TruthLattice::Bool2),
            (MonadKind::PowerSet, TruthLattice::ExtNonNegUp),
        ] {
            let o = EMAlgebra::new(k, l).unwrap();
            let id = KleisliTable::unit(k, &c);
            let phi = Predicate::new(l, c.clone(), vec![l.top(), l.bottom(), l.top(), l.bottom()])
                .unwrap();
            assert_eq!(wp(&o, &id, &phi).unwrap(), phi);
            assert_eq!(sp(&o, &id, &phi).unwrap(), phi);
        }
    }

    #[test]
    fn guards_partition_the_carrier() {
        let c = carrier(4);
        let b = parse_bexpr("x <= 0").unwrap();
        let tt = guard_predicate(&b, &c, TruthLattice::Bool2, true).unwrap();
        let ff = guard_predicate(&b, &c, TruthLattice::Bool2, false).unwrap();
        assert_eq!(tt.support(), vec![0]);
        assert_eq!(ff.support(), vec![1, 2, 3]);
        let all = guard_predicate(&BExpr::True, &c, TruthLattice::Bool2, true).unwrap();
        assert_eq!(all, Predicate::top(TruthLattice::Bool2, &c));
    }
}
