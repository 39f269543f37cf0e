//! Collecting semantics: programs acting on predicates over memories.
//!
//! [`CollectingSem::collect_direct`] takes the strongest postcondition of
//! the denotation; [`CollectingSem::collect_inductive`] computes the same
//! thing by structural recursion, with loops as least fixpoints over
//! predicates. The two agree whenever `sp` is strict and ω-continuous,
//! which holds for every shipped algebra.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use crate::densem::DenSem;
use crate::lang::{check_scoped, BExpr, Program};
use crate::logic::{guard_predicate, sp, EMAlgebra, KleisliTable, Predicate};
use crate::monads::{Carrier, Memory, MonadKind, MonadValue};
use crate::{Error, Result};

/// Iteration bound for loop fixpoints over predicates. Over a finite
/// carrier every ascending chain of predicates with values in a finite
/// set is short; the bound only guards against bugs.
const PSI_CAP: usize = 100_000;

/// Values memoized per carrier variable list and key.
#[derive(Debug)]
struct Memo<K, V>(Mutex<HashMap<Arc<[String]>, PerCarrier<K, V>>>);

type PerCarrier<K, V> = HashMap<K, V>;

impl<K, V> Default for Memo<K, V> {
    fn default() -> Self {
        Memo(Mutex::default())
    }
}

impl<K: Hash + Eq + Clone, V: Clone> Memo<K, V> {
    fn get_or_try(&self, names: &Arc<[String]>, k: &K, f: impl FnOnce() -> Result<V>) -> Result<V> {
        if let Some(v) = self
            .0
            .lock()
            .expect("memo")
            .get(names)
            .and_then(|m| m.get(k))
        {
            return Ok(v.clone());
        }
        let v = f()?;
        self.0
            .lock()
            .expect("memo")
            .entry(names.clone())
            .or_default()
            .insert(k.clone(), v.clone());
        Ok(v)
    }

    fn clear(&self) {
        self.0.lock().expect("memo").clear();
    }
}

#[derive(Debug, Clone)]
pub struct CollectingSem {
    pub densem: DenSem,
    pub algebra: EMAlgebra,
    pub carrier: Carrier,
    /// Whole-program denotations, used by the direct route.
    tables: Arc<Memo<Program, Arc<KleisliTable>>>,
    /// One-step tables of atomic statements and guard predicates, used by
    /// the inductive route only.
    atoms: Arc<Memo<Program, Arc<KleisliTable>>>,
    guards: Arc<Memo<BExpr, [Predicate; 2]>>,
}

impl CollectingSem {
    pub fn new(densem: DenSem, algebra: EMAlgebra, carrier: Carrier) -> Result<Self> {
        if densem.monad != algebra.monad() {
            return Err(Error::MonadMismatch {
                expected: densem.monad.to_string(),
                found: algebra.monad().to_string(),
            });
        }
        if carrier.universe() != densem.universe {
            return Err(Error::CarrierMismatch(format!(
                "carrier over {} but semantics over {}",
                carrier.universe(),
                densem.universe
            )));
        }
        Ok(CollectingSem {
            densem,
            algebra,
            carrier,
            tables: Arc::default(),
            atoms: Arc::default(),
            guards: Arc::default(),
        })
    }

    fn carrier_for(&self, vars: &crate::lang::VarSet) -> Result<Carrier> {
        if *vars == self.carrier.var_set() {
            Ok(self.carrier.clone())
        } else {
            Carrier::new(vars, self.densem.universe)
        }
    }

    /// `sp(⟦p⟧)(φ)`.
    pub fn collect_direct(&self, p: &Program, phi: &Predicate) -> Result<Predicate> {
        let table = self.table(p, &phi.carrier)?;
        sp(&self.algebra, &table, phi)
    }

    /// The denotation of `p` on `dom`, as a table. Tables are memoized per
    /// program and carrier, so repeated sweeps over one program pay for
    /// the denotation once.
    pub fn table(&self, p: &Program, dom: &Carrier) -> Result<Arc<KleisliTable>> {
        self.tables.get_or_try(dom.names(), p, || {
            Ok(Arc::new(self.densem.table(p, dom)?.0))
        })
    }

    /// Drops memoized tables and guards.
    pub fn clear_cache(&self) {
        self.tables.clear();
        self.atoms.clear();
        self.guards.clear();
    }

    /// Structural characterization of [`Self::collect_direct`].
    pub fn collect_inductive(&self, p: &Program, phi: &Predicate) -> Result<Predicate> {
        check_scoped(p, &phi.carrier.var_set())?;
        self.densem.check_effects(p)?;
        self.inductive(p, phi)
    }

    /// `[grd b ff, grd b tt]`.
    fn guards(&self, b: &BExpr, c: &Carrier) -> Result<[Predicate; 2]> {
        let l = self.algebra.lattice();
        self.guards.get_or_try(c.names(), b, || {
            Ok([
                guard_predicate(b, c, l, false)?,
                guard_predicate(b, c, l, true)?,
            ])
        })
    }

    /// sp of an atomic statement, computed from its one-step table.
    fn atomic(&self, p: &Program, phi: &Predicate) -> Result<Predicate> {
        let c = &phi.carrier;
        let table = self
            .atoms
            .get_or_try(c.names(), p, || Ok(Arc::new(self.densem.table(p, c)?.0)))?;
        sp(&self.algebra, &table, phi)
    }

    fn inductive(&self, p: &Program, phi: &Predicate) -> Result<Predicate> {
        match p {
            Program::Skip => Ok(phi.clone()),
            Program::Seq(a, b) => {
                let mid = self.inductive(a, phi)?;
                self.inductive(b, &mid)
            }
            Program::Assign(..)
            | Program::AssignHavoc { .. }
            | Program::AssignFlip { .. }
            | Program::AddVar(_)
            | Program::DelVar(_) => self.atomic(p, phi),
            Program::Diverge => {
                let out = check_scoped(p, &phi.carrier.var_set())?;
                Ok(Predicate::bottom(
                    self.algebra.lattice(),
                    &self.carrier_for(&out)?,
                ))
            }
            Program::If(b, t, e) => {
                let [gff, gtt] = self.guards(b, &phi.carrier)?;
                let then_in = phi.meet(&gtt)?;
                let else_in = phi.meet(&gff)?;
                self.inductive(t, &then_in)?
                    .join(&self.inductive(e, &else_in)?)
            }
            Program::While(b, body) => {
                // Least fixpoint of Ψ applied to φ: the loop-head invariant
                // W = φ ∨ ⦃body⦄(W ∧ grd b tt), exited through grd b ff.
                let [gff, gtt] = self.guards(b, &phi.carrier)?;
                let mut w = phi.clone();
                for _ in 0..PSI_CAP {
                    let step = self.inductive(body, &w.meet(&gtt)?)?;
                    let next = phi.join(&step)?.join(&w)?;
                    if next == w {
                        return w.meet(&gff);
                    }
                    w = next;
                }
                Err(Error::NoConvergence("collecting loop invariant".into()))
            }
        }
    }

    /// Image of a set of powerset values under the Kleisli lifting of `p`.
    pub fn hyper_direct_image(
        &self,
        p: &Program,
        u: &BTreeSet<MonadValue<Memory>>,
    ) -> Result<BTreeSet<MonadValue<Memory>>> {
        hyper_direct_image(&self.densem, p, u)
    }
}

/// `{ ⟦p⟧#(c) | c ∈ U }` for the powerset monad.
pub fn hyper_direct_image(
    densem: &DenSem,
    p: &Program,
    u: &BTreeSet<MonadValue<Memory>>,
) -> Result<BTreeSet<MonadValue<Memory>>> {
    if densem.monad != MonadKind::PowerSet {
        return Err(Error::MonadMismatch {
            expected: "powerset".into(),
            found: densem.monad.to_string(),
        });
    }
    let k = densem.monad;
    u.iter()
        .map(|c| k.ext(|m| densem.denote(p, m), c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use crate::logic::TruthLattice;
    use crate::monads::Universe;

    fn setup(monad: MonadKind, n: u32) -> CollectingSem {
        let u = Universe::Ring(n);
        CollectingSem::new(
            DenSem::new(monad, u),
            EMAlgebra::new(monad, TruthLattice::Bool2).unwrap(),
            Carrier::of(&["x"], u).unwrap(),
        )
        .unwrap()
    }

    fn pred(cs: &CollectingSem, xs: &[usize]) -> Predicate {
        Predicate::from_indices(TruthLattice::Bool2, &cs.carrier, xs)
    }

    #[test]
    fn skip_is_identity() {
        let cs = setup(MonadKind::PowerSet, 4);
        let phi = pred(&cs, &[1, 3]);
        assert_eq!(cs.collect_direct(&Program::Skip, &phi).unwrap(), phi);
        assert_eq!(cs.collect_inductive(&Program::Skip, &phi).unwrap(), phi);
    }

    #[test]
    fn affine_assignment_wraps() {
        let cs = setup(MonadKind::PowerSet, 8);
        let p = parse("x := 4*x - 2").unwrap();
        let out = cs.collect_direct(&p, &pred(&cs, &[0, 1])).unwrap();
        assert_eq!(out.support(), vec![2, 6]);
    }

    #[test]
    fn divergence_collects_nothing() {
        let cs = setup(MonadKind::Maybe, 4);
        let p = parse("while true { skip }").unwrap();
        let phi = pred(&cs, &[0, 1, 2]);
        assert!(cs.collect_direct(&p, &phi).unwrap().support().is_empty());
        assert!(cs.collect_inductive(&p, &phi).unwrap().support().is_empty());
    }

    #[test]
    fn counting_loop_both_ways() {
        let cs = setup(MonadKind::PowerSet, 4);
        let p = parse("while x <= 1 { x := x + 1 }").unwrap();
        let phi = pred(&cs, &[0]);
        assert_eq!(cs.collect_direct(&p, &phi).unwrap().support(), vec![2]);
        assert_eq!(cs.collect_inductive(&p, &phi).unwrap().support(), vec![2]);
    }

    #[test]
    fn hyper_image() {
        let u = Universe::Ring(8);
        let sem = DenSem::new(MonadKind::PowerSet, u);
        let p = parse("x := havoc(0, 1)").unwrap();
        let c = MonadValue::PowSet([Memory::from_pairs([("x", 5)])].into());
        let out = hyper_direct_image(&sem, &p, &[c.clone()].into()).unwrap();
        let expected = MonadValue::PowSet(
            [
                Memory::from_pairs([("x", 0)]),
                Memory::from_pairs([("x", 1)]),
            ]
            .into(),
        );
        assert_eq!(out, [expected].into());
        assert!(hyper_direct_image(&sem, &p, &BTreeSet::new())
            .unwrap()
            .is_empty());
        assert_eq!(
            hyper_direct_image(&sem, &Program::Skip, &[c.clone()].into()).unwrap(),
            [c].into()
        );
    }

    #[test]
    fn scoped_programs() {
        let cs = setup(MonadKind::PowerSet, 4);
        let p = parse("addvar y; y := x + 1; delvar x").unwrap();
        let phi = pred(&cs, &[2]);
        let direct = cs.collect_direct(&p, &phi).unwrap();
        let ind = cs.collect_inductive(&p, &phi).unwrap();
        assert_eq!(direct, ind);
        assert_eq!(direct.holds_on(), [Memory::from_pairs([("y", 3)])].into());
    }
}
