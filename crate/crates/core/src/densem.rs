//! Monadic denotational semantics of the while language.
//!
//! Loops are least fixpoints of `Φ(f)(m) = if ⟦b⟧m then f#(⟦P⟧m) else η(m)`.
//! On ring universes the fixpoint is computed exactly: the maybe monad by
//! running the loop with cycle detection, the powerset monad by Kleene
//! iteration of `Φ` restricted to the states reachable from the input.
//! Subdistribution loops iterate `Φ` until it is stationary (exact) or
//! moves by less than the tolerance (tagged inexact). Machine-integer
//! loops run under a fuel bound.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::lang::{check_scoped, AExpr, ArithOp, BExpr, Program, VarSet};
use crate::logic::KleisliTable;
use crate::monads::{Carrier, Memory, MonadKind, MonadValue, Universe, Weight, LUB_CAP};
use crate::{Error, Result};

/// Default bound on loop iterations (and explored loop states) for
/// machine-integer runs.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Largest havoc range materialized on machine integers.
pub const HAVOC_CAP: i64 = 1 << 16;

pub fn eval_aexpr(universe: Universe, e: &AExpr, m: &Memory) -> Result<i64> {
    Ok(match e {
        AExpr::Lit(k) => universe.embed(*k),
        AExpr::Var(x) => m.get(x)?,
        AExpr::BinOp(op, l, r) => {
            let a = eval_aexpr(universe, l, m)?;
            let b = eval_aexpr(universe, r, m)?;
            match op {
                ArithOp::Add => universe.add(a, b),
                ArithOp::Sub => universe.sub(a, b),
                ArithOp::Mul => universe.mul(a, b),
            }
        }
    })
}

/// Comparisons are taken on the universe's own values, so on `Ring(n)`
/// they compare representatives in `0..n`.
pub fn eval_bexpr(universe: Universe, b: &BExpr, m: &Memory) -> Result<bool> {
    Ok(match b {
        BExpr::True => true,
        BExpr::False => false,
        BExpr::Cmp(op, l, r) => op.holds(eval_aexpr(universe, l, m)?, eval_aexpr(universe, r, m)?),
        BExpr::Not(b) => !eval_bexpr(universe, b, m)?,
        BExpr::And(a, b) => eval_bexpr(universe, a, m)? && eval_bexpr(universe, b, m)?,
        BExpr::Or(a, b) => eval_bexpr(universe, a, m)? || eval_bexpr(universe, b, m)?,
    })
}

/// A denotation together with a flag saying whether every loop fixpoint on
/// the way was reached exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denotation {
    pub value: MonadValue<Memory>,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenSem {
    pub monad: MonadKind,
    pub universe: Universe,
    pub fuel: u64,
    pub cap: usize,
}

impl DenSem {
    pub fn new(monad: MonadKind, universe: Universe) -> Self {
        DenSem {
            monad,
            universe,
            fuel: DEFAULT_FUEL,
            cap: LUB_CAP,
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn eval_aexpr(&self, e: &AExpr, m: &Memory) -> Result<i64> {
        eval_aexpr(self.universe, e, m)
    }

    pub fn eval_bexpr(&self, b: &BExpr, m: &Memory) -> Result<bool> {
        eval_bexpr(self.universe, b, m)
    }

    /// Rejects effects the monad cannot express.
    pub fn check_effects(&self, p: &Program) -> Result<()> {
        let illegal = |construct: &str| {
            Err(Error::IllegalEffect {
                construct: construct.to_string(),
                monad: self.monad.to_string(),
            })
        };
        if p.uses_havoc() && self.monad != MonadKind::PowerSet {
            return illegal("havoc");
        }
        if p.uses_flip() && self.monad != MonadKind::SubDist {
            return illegal("flip");
        }
        Ok(())
    }

    fn check_values(&self, m: &Memory) -> Result<()> {
        match m.values().iter().find(|v| !self.universe.contains(**v)) {
            Some(v) => Err(Error::Invalid(format!(
                "value {v} in {m} lies outside {}",
                self.universe
            ))),
            None => Ok(()),
        }
    }

    pub fn denote(&self, p: &Program, m: &Memory) -> Result<MonadValue<Memory>> {
        Ok(self.denote_traced(p, m)?.value)
    }

    pub fn denote_traced(&self, p: &Program, m: &Memory) -> Result<Denotation> {
        check_scoped(p, &m.var_set())?;
        self.check_effects(p)?;
        self.check_values(m)?;
        self.denote_unchecked(p, m)
    }

    /// Denotation of a scoped program together with its output scope.
    pub fn denote_scoped(&self, p: &Program, m: &Memory) -> Result<(MonadValue<Memory>, VarSet)> {
        let out = check_scoped(p, &m.var_set())?;
        self.check_effects(p)?;
        self.check_values(m)?;
        Ok((self.denote_unchecked(p, m)?.value, out))
    }

    /// Skips scope and effect checks; callers must have run them.
    pub(crate) fn denote_unchecked(&self, p: &Program, m: &Memory) -> Result<Denotation> {
        let run = Run {
            sem: self,
            exact: Cell::new(true),
            fuel: Cell::new(self.fuel),
        };
        let value = run.exec(p, m)?;
        Ok(Denotation {
            value,
            exact: run.exact.get(),
        })
    }

    /// The denotation as a table over `dom`, with codomain carrier derived
    /// from the program's output scope.
    pub fn table(&self, p: &Program, dom: &Carrier) -> Result<(KleisliTable, bool)> {
        if dom.universe() != self.universe {
            return Err(Error::CarrierMismatch(format!(
                "carrier over {} used with {}",
                dom.universe(),
                self.universe
            )));
        }
        let out = check_scoped(p, &dom.var_set())?;
        self.check_effects(p)?;
        let cod = if out == dom.var_set() {
            dom.clone()
        } else {
            Carrier::new(&out, self.universe)?
        };
        let mut exact = true;
        let mut rows = Vec::with_capacity(dom.len());
        for m in dom.memories() {
            let d = self.denote_unchecked(p, &m)?;
            exact &= d.exact;
            rows.push(index_value(&cod, &d.value)?);
        }
        Ok((
            KleisliTable::new(self.monad, dom.clone(), cod, rows)?,
            exact,
        ))
    }
}

/// Re-expresses a value over memories as a value over carrier indices.
pub fn index_value(c: &Carrier, v: &MonadValue<Memory>) -> Result<MonadValue<usize>> {
    Ok(match v {
        MonadValue::Maybe(o) => MonadValue::Maybe(o.as_ref().map(|m| c.index_of(m)).transpose()?),
        MonadValue::PowSet(s) => {
            MonadValue::PowSet(s.iter().map(|m| c.index_of(m)).collect::<Result<_>>()?)
        }
        MonadValue::SubDist(d) => MonadValue::SubDist(
            d.iter()
                .map(|(m, w)| Ok((c.index_of(m)?, w.clone())))
                .collect::<Result<_>>()?,
        ),
    })
}

struct Run<'a> {
    sem: &'a DenSem,
    exact: Cell<bool>,
    fuel: Cell<u64>,
}

impl Run<'_> {
    fn kind(&self) -> MonadKind {
        self.sem.monad
    }

    fn burn(&self) -> Result<()> {
        if self.sem.universe.is_finite() {
            return Ok(());
        }
        let left = self.fuel.get();
        if left == 0 {
            return Err(Error::FuelExhausted(self.sem.fuel));
        }
        self.fuel.set(left - 1);
        Ok(())
    }

    fn exec(&self, p: &Program, m: &Memory) -> Result<MonadValue<Memory>> {
        let u = self.sem.universe;
        let k = self.kind();
        match p {
            Program::Skip => Ok(k.unit(m.clone())),
            Program::Seq(a, b) => {
                let mid = self.exec(a, m)?;
                k.ext(|m2| self.exec(b, m2), &mid)
            }
            Program::Assign(x, e) => Ok(k.unit(m.set(x, eval_aexpr(u, e, m)?)?)),
            Program::AssignHavoc { var, lo, hi } => {
                let mut out = BTreeSet::new();
                match u {
                    Universe::Ring(n) => {
                        let span = hi - lo + 1;
                        if span >= n as i64 {
                            for v in 0..n as i64 {
                                out.insert(m.set(var, v)?);
                            }
                        } else {
                            for v in *lo..=*hi {
                                out.insert(m.set(var, u.embed(v))?);
                            }
                        }
                    }
                    Universe::Machine => {
                        if hi - lo >= HAVOC_CAP {
                            return Err(Error::CarrierTooLarge(format!(
                                "havoc({lo}, {hi}) has more than {HAVOC_CAP} outcomes"
                            )));
                        }
                        for v in *lo..=*hi {
                            out.insert(m.set(var, v)?);
                        }
                    }
                }
                Ok(MonadValue::PowSet(out))
            }
            Program::AssignFlip { var, p, lhs, rhs } => {
                let p = Weight::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
                let q = Weight::one() - &p;
                let mut out: BTreeMap<Memory, Weight> = BTreeMap::new();
                for (e, w) in [(lhs, p), (rhs, q)] {
                    if !w.is_zero() {
                        let m2 = m.set(var, eval_aexpr(u, e, m)?)?;
                        *out.entry(m2).or_insert_with(Weight::zero) += w;
                    }
                }
                Ok(MonadValue::SubDist(out))
            }
            Program::Diverge => Ok(k.bottom()),
            Program::If(b, t, e) => {
                if eval_bexpr(u, b, m)? {
                    self.exec(t, m)
                } else {
                    self.exec(e, m)
                }
            }
            Program::While(b, body) => match k {
                MonadKind::Maybe => self.loop_maybe(b, body, m),
                MonadKind::PowerSet | MonadKind::SubDist => self.loop_kleene(b, body, m),
            },
            Program::AddVar(x) => Ok(k.unit(m.with_var(x, 0)?)),
            Program::DelVar(x) => Ok(k.unit(m.without_var(x)?)),
        }
    }

    fn loop_maybe(&self, b: &BExpr, body: &Program, m: &Memory) -> Result<MonadValue<Memory>> {
        let u = self.sem.universe;
        let mut seen: HashSet<Memory> = HashSet::new();
        let mut cur = m.clone();
        loop {
            if !eval_bexpr(u, b, &cur)? {
                return Ok(MonadValue::Maybe(Some(cur)));
            }
            self.burn()?;
            if u.is_finite() && !seen.insert(cur.clone()) {
                return Ok(MonadValue::Maybe(None));
            }
            match self.exec(body, &cur)? {
                MonadValue::Maybe(Some(next)) => cur = next,
                MonadValue::Maybe(None) => return Ok(MonadValue::Maybe(None)),
                other => {
                    return Err(Error::MonadMismatch {
                        expected: "maybe".into(),
                        found: other.kind().to_string(),
                    })
                }
            }
        }
    }

    /// Kleene iteration of `Φ` on the finite set of states reachable from
    /// `m` through guarded body executions.
    fn loop_kleene(&self, b: &BExpr, body: &Program, m: &Memory) -> Result<MonadValue<Memory>> {
        let u = self.sem.universe;
        let k = self.kind();

        // reachable loop-head states and their one-step successors
        let mut index: HashMap<Memory, usize> = HashMap::new();
        let mut states: Vec<Memory> = Vec::new();
        let mut guard: Vec<bool> = Vec::new();
        let mut step: Vec<MonadValue<usize>> = Vec::new();
        index.insert(m.clone(), 0);
        states.push(m.clone());
        let mut next = 0;
        while next < states.len() {
            let s = states[next].clone();
            next += 1;
            let g = eval_bexpr(u, b, &s)?;
            guard.push(g);
            if !g {
                step.push(k.bottom());
                continue;
            }
            self.burn()?;
            let out = self.exec(body, &s)?;
            let mut intern = |t: &Memory| -> usize {
                if let Some(i) = index.get(t) {
                    return *i;
                }
                let i = states.len();
                index.insert(t.clone(), i);
                states.push(t.clone());
                i
            };
            step.push(match out {
                MonadValue::PowSet(set) => {
                    MonadValue::PowSet(set.iter().map(&mut intern).collect())
                }
                MonadValue::SubDist(d) => {
                    MonadValue::SubDist(d.iter().map(|(t, w)| (intern(t), w.clone())).collect())
                }
                MonadValue::Maybe(o) => MonadValue::Maybe(o.as_ref().map(&mut intern)),
            });
        }

        let n = states.len();
        let mut f: Vec<MonadValue<usize>> = vec![k.bottom(); n];
        let mut iterations = 0usize;
        loop {
            let mut g = Vec::with_capacity(n);
            for s in 0..n {
                g.push(if guard[s] {
                    k.ext(|t| Ok(f[*t].clone()), &step[s])?
                } else {
                    k.unit(s)
                });
            }
            iterations += 1;
            if g == f {
                break;
            }
            if k == MonadKind::SubDist {
                let eps = Weight::new(BigInt::one(), BigInt::from(1_000_000_000u64));
                let close = f.iter().zip(&g).all(|(a, b)| k.distance(a, b) < eps);
                if close || iterations >= self.sem.cap {
                    self.exact.set(false);
                    f = g;
                    break;
                }
            } else if iterations > n + 1 && !u.is_finite() {
                // the powerset chain has length at most n + 1
                return Err(Error::NoConvergence("powerset loop".into()));
            }
            f = g;
        }
        k.map(|i| states[*i].clone(), &f[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn ring(n: u32) -> Universe {
        Universe::Ring(n)
    }

    fn mem(pairs: &[(&str, i64)]) -> Memory {
        Memory::from_pairs(pairs.iter().copied())
    }

    fn pow(ms: &[Memory]) -> MonadValue<Memory> {
        MonadValue::PowSet(ms.iter().cloned().collect())
    }

    #[test]
    fn expressions() {
        let e = parse_a("4*x - 2");
        assert_eq!(
            eval_aexpr(Universe::Machine, &e, &mem(&[("x", 1)])).unwrap(),
            2
        );
        assert_eq!(eval_aexpr(ring(4), &parse_a("3+2"), &mem(&[])).unwrap(), 1);
        assert_eq!(
            eval_aexpr(ring(4), &parse_a("x"), &mem(&[("x", 3)])).unwrap(),
            3
        );
        assert!(eval_aexpr(ring(4), &parse_a("y"), &mem(&[("x", 3)])).is_err());
    }

    fn parse_a(s: &str) -> AExpr {
        crate::lang::parse_aexpr(s).unwrap()
    }

    fn parse_b(s: &str) -> BExpr {
        crate::lang::parse_bexpr(s).unwrap()
    }

    #[test]
    fn guards() {
        let u = ring(4);
        assert!(eval_bexpr(u, &parse_b("x <= 0"), &mem(&[("x", 0)])).unwrap());
        assert!(!eval_bexpr(u, &parse_b("x <= 0"), &mem(&[("x", 1)])).unwrap());
        assert!(!eval_bexpr(u, &parse_b("not (x = 2) and true"), &mem(&[("x", 2)])).unwrap());
    }

    #[test]
    fn skip_is_unit() {
        for k in MonadKind::ALL {
            let sem = DenSem::new(k, ring(4));
            let m = mem(&[("x", 1)]);
            assert_eq!(sem.denote(&Program::Skip, &m).unwrap(), k.unit(m));
        }
    }

    #[test]
    fn nonterminating_loop_is_bottom() {
        let p = parse("while true { skip }").unwrap();
        for k in MonadKind::ALL {
            let sem = DenSem::new(k, ring(2));
            assert!(sem.denote(&p, &mem(&[("x", 0)])).unwrap().is_bottom());
        }
    }

    #[test]
    fn havoc_then_branch() {
        let p = parse("x := havoc(0, 1); if x <= 0 { x := 0 } else { x := 1 }").unwrap();
        let sem = DenSem::new(MonadKind::PowerSet, ring(4));
        assert_eq!(
            sem.denote(&p, &mem(&[("x", 3)])).unwrap(),
            pow(&[mem(&[("x", 0)]), mem(&[("x", 1)])])
        );
    }

    #[test]
    fn effect_legality() {
        let havoc = parse("x := havoc(0, 1)").unwrap();
        let flip = parse("x := flip(1/2, 0, 1)").unwrap();
        let m = mem(&[("x", 0)]);
        assert!(DenSem::new(MonadKind::Maybe, ring(4))
            .denote(&havoc, &m)
            .is_err());
        assert!(DenSem::new(MonadKind::SubDist, ring(4))
            .denote(&havoc, &m)
            .is_err());
        assert!(DenSem::new(MonadKind::PowerSet, ring(4))
            .denote(&flip, &m)
            .is_err());
        assert!(DenSem::new(MonadKind::SubDist, ring(4))
            .denote(&flip, &m)
            .is_ok());
        let div = Program::Diverge;
        for k in MonadKind::ALL {
            assert!(DenSem::new(k, ring(4))
                .denote(&div, &m)
                .unwrap()
                .is_bottom());
        }
    }

    #[test]
    fn scoped_denotations() {
        let sem = DenSem::new(MonadKind::Maybe, ring(8));
        let m = mem(&[("x", 2)]);
        let (v, out) = sem.denote_scoped(&parse("addvar y").unwrap(), &m).unwrap();
        assert_eq!(v, MonadValue::Maybe(Some(mem(&[("x", 2), ("y", 0)]))));
        assert_eq!(out.len(), 2);
        let v = sem
            .denote(&parse("delvar y").unwrap(), &mem(&[("x", 2), ("y", 5)]))
            .unwrap();
        assert_eq!(v, MonadValue::Maybe(Some(m.clone())));
        let v = sem
            .denote(&parse("addvar y; delvar y").unwrap(), &m)
            .unwrap();
        assert_eq!(v, MonadValue::Maybe(Some(m)));
    }

    #[test]
    fn counting_loop() {
        let p = parse("while x <= 1 { x := x + 1 }").unwrap();
        let sem = DenSem::new(MonadKind::PowerSet, ring(4));
        assert_eq!(
            sem.denote(&p, &mem(&[("x", 0)])).unwrap(),
            pow(&[mem(&[("x", 2)])])
        );
    }

    #[test]
    fn nondeterministic_loop_collects_all_exits() {
        // x may stop at any value reached before the guard fails
        let p = parse("while x < 3 { x := havoc(0, 3) }").unwrap();
        let sem = DenSem::new(MonadKind::PowerSet, ring(4));
        assert_eq!(
            sem.denote(&p, &mem(&[("x", 0)])).unwrap(),
            pow(&[mem(&[("x", 3)])])
        );
        let p = parse("while x = 0 { y := havoc(0, 1); x := y }").unwrap();
        assert_eq!(
            sem.denote(&p, &mem(&[("x", 0), ("y", 0)])).unwrap(),
            pow(&[mem(&[("x", 1), ("y", 1)])])
        );
    }

    #[test]
    fn geometric_loop_is_approximate() {
        // terminates with probability 1; the fixpoint is a genuine limit
        let p = parse("while x = 0 { x := flip(1/2, 0, 1) }").unwrap();
        let sem = DenSem::new(MonadKind::SubDist, ring(2));
        let d = sem.denote_traced(&p, &mem(&[("x", 0)])).unwrap();
        assert!(!d.exact);
        let gap = Weight::one() - d.value.weight_of(&mem(&[("x", 1)]));
        assert!(gap < Weight::new(BigInt::one(), BigInt::from(1_000_000_000u64)));
    }

    #[test]
    fn loop_free_subdist_is_exact() {
        let p = parse("x := flip(1/3, 1, 2); if x = 1 { diverge } else { skip }").unwrap();
        let sem = DenSem::new(MonadKind::SubDist, ring(4));
        let d = sem.denote_traced(&p, &mem(&[("x", 0)])).unwrap();
        assert!(d.exact);
        assert_eq!(
            d.value.mass(),
            Weight::new(BigInt::from(2), BigInt::from(3))
        );
    }

    #[test]
    fn machine_fuel() {
        let p = parse("while 0 <= x { x := x + 1 }").unwrap();
        let sem = DenSem::new(MonadKind::Maybe, Universe::Machine).with_fuel(1000);
        assert!(matches!(
            sem.denote(&p, &mem(&[("x", 0)])),
            Err(Error::FuelExhausted(1000))
        ));
        let p = parse("x := 0; while x < 100 { x := x + 1 }").unwrap();
        assert_eq!(
            sem.denote(&p, &mem(&[("x", 7)])).unwrap(),
            MonadValue::Maybe(Some(mem(&[("x", 100)])))
        );
    }
}
