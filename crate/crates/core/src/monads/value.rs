use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Weight = BigRational;

/// Total-variation tolerance used when a subdistribution chain is cut off.
pub const LUB_EPS: f64 = 1e-9;
/// Default iteration cap for chain lubs.
pub const LUB_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MonadKind {
    Maybe,
    PowerSet,
    SubDist,
}

impl MonadKind {
    pub const ALL: [MonadKind; 3] = [MonadKind::Maybe, MonadKind::PowerSet, MonadKind::SubDist];

    pub fn name(self) -> &'static str {
        match self {
            MonadKind::Maybe => "maybe",
            MonadKind::PowerSet => "powerset",
            MonadKind::SubDist => "subdist",
        }
    }
}

impl fmt::Display for MonadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MonadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maybe" => Ok(MonadKind::Maybe),
            "powerset" => Ok(MonadKind::PowerSet),
            "subdist" => Ok(MonadKind::SubDist),
            _ => Err(Error::Invalid(format!("unknown monad `{s}`"))),
        }
    }
}

/// An element of `T X` for one of the three shipped monads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MonadValue<T: Ord> {
    Maybe(Option<T>),
    PowSet(BTreeSet<T>),
    /// Weights are strictly positive and sum to at most one.
    SubDist(BTreeMap<T, Weight>),
}

impl<T: Ord + Clone> MonadValue<T> {
    pub fn kind(&self) -> MonadKind {
        match self {
            MonadValue::Maybe(_) => MonadKind::Maybe,
            MonadValue::PowSet(_) => MonadKind::PowerSet,
            MonadValue::SubDist(_) => MonadKind::SubDist,
        }
    }

    /// Elements with nonzero mass.
    pub fn support(&self) -> Vec<&T> {
        match self {
            MonadValue::Maybe(o) => o.iter().collect(),
            MonadValue::PowSet(s) => s.iter().collect(),
            MonadValue::SubDist(d) => d.keys().collect(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        match self {
            MonadValue::Maybe(o) => o.is_none(),
            MonadValue::PowSet(s) => s.is_empty(),
            MonadValue::SubDist(d) => d.is_empty(),
        }
    }

    pub fn mass(&self) -> Weight {
        match self {
            MonadValue::Maybe(o) => {
                if o.is_some() {
                    Weight::one()
                } else {
                    Weight::zero()
                }
            }
            MonadValue::PowSet(s) => {
                if s.is_empty() {
                    Weight::zero()
                } else {
                    Weight::one()
                }
            }
            MonadValue::SubDist(d) => d.values().fold(Weight::zero(), |a, w| a + w),
        }
    }

    pub fn weight_of(&self, t: &T) -> Weight {
        match self {
            MonadValue::SubDist(d) => d.get(t).cloned().unwrap_or_else(Weight::zero),
            other => {
                if other.support().contains(&t) {
                    Weight::one()
                } else {
                    Weight::zero()
                }
            }
        }
    }

    /// Checks the representation invariants.
    pub fn is_well_formed(&self) -> bool {
        match self {
            MonadValue::SubDist(d) => {
                d.values().all(|w| w.is_positive()) && self.mass() <= Weight::one()
            }
            _ => true,
        }
    }
}

impl<T: Ord + Clone + fmt::Display> fmt::Display for MonadValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonadValue::Maybe(None) => write!(f, "⊥"),
            MonadValue::Maybe(Some(t)) => write!(f, "just {t}"),
            MonadValue::PowSet(s) => {
                write!(f, "{{")?;
                for (i, t) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "}}")
            }
            MonadValue::SubDist(d) => {
                write!(f, "[")?;
                for (i, (t, w)) in d.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w}: {t}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Result of a chain lub: `exact` is false when the chain was cut off by
/// the tolerance or the iteration cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLub<T: Ord> {
    pub value: MonadValue<T>,
    pub exact: bool,
    pub steps: usize,
}

fn eps() -> Weight {
    Weight::new(BigInt::one(), BigInt::from(1_000_000_000u64))
}

impl MonadKind {
    pub fn unit<T: Ord + Clone>(self, t: T) -> MonadValue<T> {
        match self {
            MonadKind::Maybe => MonadValue::Maybe(Some(t)),
            MonadKind::PowerSet => MonadValue::PowSet(BTreeSet::from([t])),
            MonadKind::SubDist => MonadValue::SubDist(BTreeMap::from([(t, Weight::one())])),
        }
    }

    pub fn bottom<T: Ord + Clone>(self) -> MonadValue<T> {
        match self {
            MonadKind::Maybe => MonadValue::Maybe(None),
            MonadKind::PowerSet => MonadValue::PowSet(BTreeSet::new()),
            MonadKind::SubDist => MonadValue::SubDist(BTreeMap::new()),
        }
    }

    fn check<T: Ord + Clone>(self, v: &MonadValue<T>) -> Result<()> {
        if v.kind() == self {
            Ok(())
        } else {
            Err(Error::MonadMismatch {
                expected: self.to_string(),
                found: v.kind().to_string(),
            })
        }
    }

    /// Kleisli extension `f#`.
    pub fn ext<T, U, F>(self, f: F, v: &MonadValue<T>) -> Result<MonadValue<U>>
    where
        T: Ord + Clone,
        U: Ord + Clone,
        F: Fn(&T) -> Result<MonadValue<U>>,
    {
        self.check(v)?;
        match v {
            MonadValue::Maybe(None) => Ok(MonadValue::Maybe(None)),
            MonadValue::Maybe(Some(t)) => {
                let r = f(t)?;
                self.check(&r)?;
                Ok(r)
            }
            MonadValue::PowSet(s) => {
                let mut out = BTreeSet::new();
                for t in s {
                    match f(t)? {
                        MonadValue::PowSet(r) => out.extend(r),
                        other => {
                            self.check(&other)?;
                        }
                    }
                }
                Ok(MonadValue::PowSet(out))
            }
            MonadValue::SubDist(d) => {
                let mut out: BTreeMap<U, Weight> = BTreeMap::new();
                for (t, w) in d {
                    match f(t)? {
                        MonadValue::SubDist(r) => {
                            for (u, w2) in r {
                                let add = w * &w2;
                                *out.entry(u).or_insert_with(Weight::zero) += add;
                            }
                        }
                        other => {
                            self.check(&other)?;
                        }
                    }
                }
                out.retain(|_, w| w.is_positive());
                Ok(MonadValue::SubDist(out))
            }
        }
    }

    /// `g • f = g# ∘ f`.
    pub fn kleisli_compose<'a, T, U, V, F, G>(
        self,
        g: G,
        f: F,
    ) -> impl Fn(&T) -> Result<MonadValue<V>> + 'a
    where
        T: Ord + Clone,
        U: Ord + Clone,
        V: Ord + Clone,
        F: Fn(&T) -> Result<MonadValue<U>> + 'a,
        G: Fn(&U) -> Result<MonadValue<V>> + 'a,
    {
        move |t| self.ext(&g, &f(t)?)
    }

    /// Functor action `T h`.
    pub fn map<T, U, F>(self, h: F, v: &MonadValue<T>) -> Result<MonadValue<U>>
    where
        T: Ord + Clone,
        U: Ord + Clone,
        F: Fn(&T) -> U,
    {
        self.ext(|t| Ok(self.unit(h(t))), v)
    }

    pub fn join<T: Ord + Clone>(self, vv: &MonadValue<MonadValue<T>>) -> Result<MonadValue<T>> {
        self.ext(|v| Ok(v.clone()), vv)
    }

    /// The ω-cpo order on `T X`.
    pub fn leq<T: Ord + Clone>(self, a: &MonadValue<T>, b: &MonadValue<T>) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (MonadValue::Maybe(None), _) => true,
            (MonadValue::Maybe(x), MonadValue::Maybe(y)) => x == y,
            (MonadValue::PowSet(x), MonadValue::PowSet(y)) => x.is_subset(y),
            (MonadValue::SubDist(x), MonadValue::SubDist(y)) => {
                x.iter().all(|(t, w)| y.get(t).is_some_and(|w2| w <= w2))
            }
            _ => unreachable!(),
        })
    }

    /// Binary join of two comparable-or-compatible values; `None` when the
    /// flat maybe order has no upper bound.
    pub fn join_values<T: Ord + Clone>(
        self,
        a: &MonadValue<T>,
        b: &MonadValue<T>,
    ) -> Result<Option<MonadValue<T>>> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (MonadValue::Maybe(None), x) | (x, MonadValue::Maybe(None)) => Some(x.clone()),
            (MonadValue::Maybe(x), MonadValue::Maybe(y)) => {
                (x == y).then(|| MonadValue::Maybe(x.clone()))
            }
            (MonadValue::PowSet(x), MonadValue::PowSet(y)) => {
                Some(MonadValue::PowSet(x.union(y).cloned().collect()))
            }
            (MonadValue::SubDist(x), MonadValue::SubDist(y)) => {
                let mut out = x.clone();
                for (t, w) in y {
                    let e = out.entry(t.clone()).or_insert_with(Weight::zero);
                    if *w > *e {
                        *e = w.clone();
                    }
                }
                let v = MonadValue::SubDist(out);
                v.is_well_formed().then_some(v)
            }
            _ => unreachable!(),
        })
    }

    /// Total-variation norm `Σ|a − b|` of the difference of two
    /// subdistributions (zero or one for the other monads).
    pub fn distance<T: Ord + Clone>(self, a: &MonadValue<T>, b: &MonadValue<T>) -> Weight {
        match (a, b) {
            (MonadValue::SubDist(x), MonadValue::SubDist(y)) => {
                let keys: BTreeSet<&T> = x.keys().chain(y.keys()).collect();
                let mut total = Weight::zero();
                for k in keys {
                    let wx = x.get(k).cloned().unwrap_or_else(Weight::zero);
                    let wy = y.get(k).cloned().unwrap_or_else(Weight::zero);
                    total += (wx - wy).abs();
                }
                total
            }
            _ => {
                if a == b {
                    Weight::zero()
                } else {
                    Weight::one()
                }
            }
        }
    }

    /// Supremum of an ascending chain.
    ///
    /// Finite chains are consumed completely and give an exact answer.
    /// For subdistributions the iteration stops early once two successive
    /// elements are within [`LUB_EPS`] in total variation; the result is
    /// then tagged inexact unless the two elements coincide. At most `cap`
    /// elements are read.
    pub fn chain_lub<T, I>(self, chain: I, cap: usize) -> Result<ChainLub<T>>
    where
        T: Ord + Clone,
        I: IntoIterator<Item = MonadValue<T>>,
    {
        let mut acc = self.bottom::<T>();
        let mut prev: Option<MonadValue<T>> = None;
        let mut steps = 0;
        let eps = eps();
        for v in chain.into_iter() {
            if steps == cap {
                return Ok(ChainLub {
                    value: acc,
                    exact: false,
                    steps,
                });
            }
            self.check(&v)?;
            if let Some(p) = &prev {
                if !self.leq(p, &v)? {
                    return Err(Error::NotAscending(steps));
                }
            }
            steps += 1;
            match self {
                MonadKind::Maybe => {
                    if !v.is_bottom() {
                        return Ok(ChainLub {
                            value: v,
                            exact: true,
                            steps,
                        });
                    }
                }
                MonadKind::PowerSet => {
                    acc = self.join_values(&acc, &v)?.expect("powerset joins exist");
                }
                MonadKind::SubDist => {
                    if let Some(p) = &prev {
                        let d = self.distance(p, &v);
                        if d < eps && !d.is_zero() {
                            return Ok(ChainLub {
                                value: v,
                                exact: false,
                                steps,
                            });
                        }
                    }
                    acc = v.clone();
                }
            }
            prev = Some(v);
        }
        Ok(ChainLub {
            value: acc,
            exact: true,
            steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: i64, d: i64) -> Weight {
        Weight::new(BigInt::from(n), BigInt::from(d))
    }

    fn dist(pairs: &[(u8, Weight)]) -> MonadValue<u8> {
        MonadValue::SubDist(pairs.iter().cloned().collect())
    }

    #[test]
    fn unit_laws_on_all_monads() {
        for k in MonadKind::ALL {
            let f = |x: &u8| {
                Ok(match k {
                    MonadKind::Maybe => k.unit(x.wrapping_add(1)),
                    MonadKind::PowerSet => MonadValue::PowSet([*x, x + 1].into()),
                    MonadKind::SubDist => dist(&[(*x, w(1, 3)), (x + 1, w(1, 2))]),
                })
            };
            let v = f(&3).unwrap();
            assert_eq!(k.ext(|x| Ok(k.unit(*x)), &v).unwrap(), v);
            assert_eq!(k.ext(f, &k.unit(3u8)).unwrap(), f(&3).unwrap());
        }
    }

    #[test]
    fn ext_rejects_mixed_monads() {
        let v = MonadKind::PowerSet.unit(1u8);
        let r = MonadKind::PowerSet.ext(|x| Ok(MonadKind::Maybe.unit(*x)), &v);
        assert!(matches!(r, Err(Error::MonadMismatch { .. })));
    }

    #[test]
    fn strict_in_second_argument() {
        for k in MonadKind::ALL {
            let r = k.ext(|x: &u8| Ok(k.unit(*x)), &k.bottom()).unwrap();
            assert!(r.is_bottom());
        }
    }

    #[test]
    fn subdist_ext_multiplies_weights() {
        let k = MonadKind::SubDist;
        let v = dist(&[(0, w(1, 2)), (1, w(1, 4))]);
        let r = k
            .ext(|x| Ok(dist(&[(x + 10, w(1, 2)), (20, w(1, 2))])), &v)
            .unwrap();
        assert_eq!(r, dist(&[(10, w(1, 4)), (11, w(1, 8)), (20, w(3, 8))]));
        assert!(r.is_well_formed());
    }

    #[test]
    fn orders() {
        let m = MonadKind::Maybe;
        assert!(m.leq(&m.bottom(), &m.unit(1u8)).unwrap());
        assert!(!m.leq(&m.unit(2u8), &m.unit(1u8)).unwrap());
        let s = MonadKind::SubDist;
        assert!(s
            .leq(&dist(&[(1, w(1, 4))]), &dist(&[(1, w(1, 2)), (2, w(1, 2))]))
            .unwrap());
        assert!(!s
            .leq(&dist(&[(3, w(1, 4))]), &dist(&[(1, w(1, 2))]))
            .unwrap());
    }

    #[test]
    fn maybe_chain_lub() {
        let m = MonadKind::Maybe;
        let chain = vec![m.bottom(), m.bottom(), m.unit(7u8), m.unit(7u8)];
        let lub = m.chain_lub(chain, LUB_CAP).unwrap();
        assert_eq!(lub.value, m.unit(7));
        assert!(lub.exact);
    }

    #[test]
    fn powerset_chain_lub() {
        let p = MonadKind::PowerSet;
        let chain: Vec<MonadValue<u8>> = vec![
            MonadValue::PowSet([].into()),
            MonadValue::PowSet([1].into()),
            MonadValue::PowSet([1, 2].into()),
            MonadValue::PowSet([1, 2].into()),
        ];
        assert_eq!(
            p.chain_lub(chain, LUB_CAP).unwrap().value,
            MonadValue::PowSet([1, 2].into())
        );
    }

    #[test]
    fn geometric_subdist_chain() {
        // weights 1/2, 3/4, 7/8, ... converge to 1
        let s = MonadKind::SubDist;
        let chain = (1..).map(|k: u32| {
            let d = BigInt::from(2u8).pow(k);
            dist(&[(0, Weight::new(&d - BigInt::one(), d))])
        });
        let lub = s.chain_lub(chain, LUB_CAP).unwrap();
        assert!(!lub.exact);
        let gap = Weight::one() - lub.value.weight_of(&0);
        assert!(gap < eps());
    }

    #[test]
    fn descending_chain_rejected() {
        let p = MonadKind::PowerSet;
        let chain: Vec<MonadValue<u8>> = vec![
            MonadValue::PowSet([1, 2].into()),
            MonadValue::PowSet([1].into()),
        ];
        assert!(matches!(
            p.chain_lub(chain, LUB_CAP),
            Err(Error::NotAscending(1))
        ));
    }
}
