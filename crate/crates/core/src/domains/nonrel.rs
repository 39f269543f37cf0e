use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde_json::{Map, Value};
use smallvec::SmallVec;

use super::{alpha_by_memories, gamma_by_memories, AbstractDomain, ValueDomain};
use crate::densem::eval_bexpr;
use crate::lang::{AExpr, BExpr, CmpOp, VarSet};
use crate::logic::Predicate;
use crate::monads::{Carrier, Memory, Universe};
use crate::{Error, Result};

/// Largest finite lattice that [`NonRelational::elements`] will list.
pub const ELEMENTS_CAP: usize = 1 << 18;

/// An abstract memory. Any bottom component collapses the whole memory to
/// `Bot`, so `Env` never contains a bottom value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbsMem<T> {
    Bot,
    Env(SmallVec<[T; 4]>),
}

/// Pointwise lifting of a value domain to memories over a fixed, sorted
/// variable list.
#[derive(Debug, Clone)]
pub struct NonRelational<V: ValueDomain> {
    value: V,
    vars: Arc<[String]>,
    carrier: Option<Carrier>,
    guards: Arc<Mutex<HashMap<(BExpr, bool), AbsMem<V::Val>>>>,
}

impl<V: ValueDomain> NonRelational<V> {
    pub fn new(value: V, vars: &VarSet) -> Self {
        let universe = value.universe();
        NonRelational {
            carrier: Carrier::new(vars, universe).ok(),
            vars: vars.iter().cloned().collect(),
            value,
            guards: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn of(value: V, vars: &[&str]) -> Self {
        Self::new(value, &vars.iter().map(|s| s.to_string()).collect())
    }

    pub fn value_domain(&self) -> &V {
        &self.value
    }

    pub fn carrier(&self) -> Option<&Carrier> {
        self.carrier.as_ref()
    }

    /// `n` when `c` is the `Ring(n)` carrier over exactly these variables.
    fn ring_size(&self, c: &Carrier) -> Option<usize> {
        let u = self.value.universe();
        match u {
            Universe::Ring(n) if c.names() == &self.vars && c.universe() == u => Some(n as usize),
            _ => None,
        }
    }

    fn position(&self, x: &str) -> Result<usize> {
        self.vars
            .binary_search_by(|n| n.as_str().cmp(x))
            .map_err(|_| Error::Unbound(x.to_string()))
    }

    /// Builds an environment, canonicalizing bottoms.
    pub fn env(&self, vals: impl IntoIterator<Item = V::Val>) -> AbsMem<V::Val> {
        let vals: SmallVec<[V::Val; 4]> = vals.into_iter().collect();
        if vals.iter().any(|v| self.value.is_bottom(v)) {
            AbsMem::Bot
        } else {
            AbsMem::Env(vals)
        }
    }

    /// Environment from `(variable, value)` pairs; unnamed variables are top.
    pub fn env_of(&self, pairs: &[(&str, V::Val)]) -> Result<AbsMem<V::Val>> {
        let mut vals: Vec<V::Val> = vec![self.value.top(); self.vars.len()];
        for (x, v) in pairs {
            vals[self.position(x)?] = v.clone();
        }
        Ok(self.env(vals))
    }

    pub fn get(&self, a: &AbsMem<V::Val>, x: &str) -> Result<V::Val> {
        Ok(match a {
            AbsMem::Bot => self.value.bottom(),
            AbsMem::Env(vals) => vals[self.position(x)?].clone(),
        })
    }

    pub fn eval(&self, e: &AExpr, a: &AbsMem<V::Val>) -> Result<V::Val> {
        let AbsMem::Env(vals) = a else {
            return Ok(self.value.bottom());
        };
        self.eval_env(e, vals)
    }

    fn eval_env(&self, e: &AExpr, vals: &[V::Val]) -> Result<V::Val> {
        Ok(match e {
            AExpr::Lit(k) => self.value.literal(*k),
            AExpr::Var(x) => vals[self.position(x)?].clone(),
            AExpr::BinOp(op, l, r) => {
                let a = self.eval_env(l, vals)?;
                let b = self.eval_env(r, vals)?;
                self.value.binop(*op, &a, &b)
            }
        })
    }

    fn update(&self, x: &str, v: V::Val, a: &AbsMem<V::Val>) -> Result<AbsMem<V::Val>> {
        let i = self.position(x)?;
        match a {
            AbsMem::Bot => Ok(AbsMem::Bot),
            AbsMem::Env(vals) => {
                if self.value.is_bottom(&v) {
                    return Ok(AbsMem::Bot);
                }
                let mut vals = vals.clone();
                vals[i] = v;
                Ok(AbsMem::Env(vals))
            }
        }
    }

    fn zip(
        &self,
        a: &AbsMem<V::Val>,
        b: &AbsMem<V::Val>,
        f: impl Fn(&V::Val, &V::Val) -> V::Val,
    ) -> AbsMem<V::Val> {
        match (a, b) {
            (AbsMem::Env(x), AbsMem::Env(y)) => self.env(x.iter().zip(y).map(|(p, q)| f(p, q))),
            _ => unreachable!(),
        }
    }

    /// Exact `α(grd b v)` by enumerating the carrier.
    fn guard_exact(&self, c: &Carrier, b: &BExpr, v: bool) -> Result<AbsMem<V::Val>> {
        let u = c.universe();
        let mut acc = AbsMem::Bot;
        for m in c.memories() {
            if eval_bexpr(u, b, &m)? == v {
                acc = self.join(&acc, &self.abstract_memory(&m));
            }
        }
        Ok(acc)
    }

    /// Guard abstraction by syntax: exact for `x ⋈ k` and `k ⋈ x`, top for
    /// other atoms.
    fn guard_syntactic(&self, b: &BExpr, v: bool) -> Result<AbsMem<V::Val>> {
        Ok(match b {
            BExpr::True => {
                if v {
                    self.top()
                } else {
                    AbsMem::Bot
                }
            }
            BExpr::False => {
                if v {
                    AbsMem::Bot
                } else {
                    self.top()
                }
            }
            BExpr::Not(inner) => self.guard_syntactic(inner, !v)?,
            BExpr::And(l, r) | BExpr::Or(l, r) => {
                let a = self.guard_syntactic(l, v)?;
                let c = self.guard_syntactic(r, v)?;
                if matches!(b, BExpr::And(..)) == v {
                    self.meet(&a, &c)
                } else {
                    self.join(&a, &c)
                }
            }
            BExpr::Cmp(op, l, r) => {
                for x in b.vars() {
                    self.position(&x)?;
                }
                match atom_range(self.value.universe(), *op, l, r, v) {
                    Some((_, None)) => AbsMem::Bot,
                    Some((x, Some((lo, hi)))) => {
                        let val = self.value.range(lo, hi);
                        self.update(&x, val, &self.top())?
                    }
                    None => self.top(),
                }
            }
        })
    }
}

/// For `x ⋈ k` or `k ⋈ x` (or their negation when `v` is false), the
/// variable and the integer range it is confined to; `None` as the range
/// means no value satisfies the atom.
#[allow(clippy::type_complexity)]
fn atom_range(
    u: Universe,
    op: CmpOp,
    l: &AExpr,
    r: &AExpr,
    v: bool,
) -> Option<(String, Option<(i64, i64)>)> {
    let (min, max) = (u.min_value(), u.max_value());
    let (x, k, var_left) = match (l, r) {
        (AExpr::Var(x), AExpr::Lit(k)) => (x.clone(), u.embed(*k), true),
        (AExpr::Lit(k), AExpr::Var(x)) => (x.clone(), u.embed(*k), false),
        _ => return None,
    };
    // constraints as (lo, hi) with i128 to step past the bounds safely
    let (lo, hi): (i128, i128) = match (op, var_left, v) {
        (CmpOp::Eq, _, true) => (k as i128, k as i128),
        (CmpOp::Eq, _, false) => {
            if k == min {
                (k as i128 + 1, max as i128)
            } else if k == max {
                (min as i128, k as i128 - 1)
            } else {
                (min as i128, max as i128)
            }
        }
        (CmpOp::Le, true, true) | (CmpOp::Lt, false, false) => (min as i128, k as i128),
        (CmpOp::Lt, true, true) | (CmpOp::Le, false, false) => (min as i128, k as i128 - 1),
        (CmpOp::Le, false, true) | (CmpOp::Lt, true, false) => (k as i128, max as i128),
        (CmpOp::Lt, false, true) | (CmpOp::Le, true, false) => (k as i128 + 1, max as i128),
    };
    let lo = lo.max(min as i128);
    let hi = hi.min(max as i128);
    if lo > hi {
        return Some((x, None));
    }
    Some((x, Some((lo as i64, hi as i64))))
}

impl<V: ValueDomain> AbstractDomain for NonRelational<V> {
    type Elem = AbsMem<V::Val>;

    fn name(&self) -> String {
        self.value.name().to_string()
    }

    fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    fn universe(&self) -> Universe {
        self.value.universe()
    }

    fn bottom(&self) -> Self::Elem {
        AbsMem::Bot
    }

    fn top(&self) -> Self::Elem {
        self.env(std::iter::repeat_n(self.value.top(), self.vars.len()))
    }

    fn is_bottom(&self, a: &Self::Elem) -> bool {
        matches!(a, AbsMem::Bot)
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        match (a, b) {
            (AbsMem::Bot, _) => true,
            (_, AbsMem::Bot) => false,
            (AbsMem::Env(x), AbsMem::Env(y)) => x.iter().zip(y).all(|(p, q)| self.value.leq(p, q)),
        }
    }

    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        match (a, b) {
            (AbsMem::Bot, x) | (x, AbsMem::Bot) => x.clone(),
            _ => self.zip(a, b, |p, q| self.value.join(p, q)),
        }
    }

    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        match (a, b) {
            (AbsMem::Bot, _) | (_, AbsMem::Bot) => AbsMem::Bot,
            _ => self.zip(a, b, |p, q| self.value.meet(p, q)),
        }
    }

    fn widen(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        match (a, b) {
            (AbsMem::Bot, x) | (x, AbsMem::Bot) => x.clone(),
            _ => self.zip(a, b, |p, q| self.value.widen(p, q)),
        }
    }

    fn finite_height(&self) -> bool {
        self.value.finite_height()
    }

    fn elements(&self) -> Option<Vec<Self::Elem>> {
        let vals: Vec<V::Val> = self
            .value
            .elements()?
            .into_iter()
            .filter(|v| !self.value.is_bottom(v))
            .collect();
        let k = self.vars.len() as u32;
        let count = (vals.len() as u128).checked_pow(k)?;
        if count > ELEMENTS_CAP as u128 {
            return None;
        }
        let mut out = vec![AbsMem::Bot];
        for mut idx in 0..count as usize {
            let mut env: SmallVec<[V::Val; 4]> = SmallVec::from_elem(vals[0].clone(), k as usize);
            for slot in env.iter_mut().rev() {
                *slot = vals[idx % vals.len()].clone();
                idx /= vals.len();
            }
            out.push(AbsMem::Env(env));
        }
        Some(out)
    }

    fn abstract_memory(&self, m: &Memory) -> Self::Elem {
        debug_assert_eq!(m.names().as_ref(), self.vars.as_ref());
        AbsMem::Env(
            m.values()
                .iter()
                .map(|v| self.value.abstract_value(*v))
                .collect(),
        )
    }

    fn contains(&self, a: &Self::Elem, m: &Memory) -> bool {
        match a {
            AbsMem::Bot => false,
            AbsMem::Env(vals) => vals
                .iter()
                .zip(m.values())
                .all(|(a, v)| self.value.contains(a, *v)),
        }
    }

    fn concretize(&self, a: &Self::Elem, cap: usize) -> Option<Vec<Memory>> {
        let AbsMem::Env(vals) = a else {
            return Some(Vec::new());
        };
        let sets: Vec<Vec<i64>> = vals
            .iter()
            .map(|v| self.value.concretize(v, cap))
            .collect::<Option<_>>()?;
        let total = sets
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))?;
        if total > cap {
            return None;
        }
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut row = vec![0i64; sets.len()];
            for (slot, set) in row.iter_mut().zip(&sets).rev() {
                *slot = set[idx % set.len()];
                idx /= set.len();
            }
            out.push(Memory::new(self.vars.clone(), row));
        }
        Some(out)
    }

    fn assign(&self, x: &str, e: &AExpr, a: &Self::Elem) -> Result<Self::Elem> {
        let v = self.eval(e, a)?;
        self.update(x, v, a)
    }

    fn havoc(&self, x: &str, lo: i64, hi: i64, a: &Self::Elem) -> Result<Self::Elem> {
        let u = self.value.universe();
        let v = match u {
            Universe::Ring(n) if (hi as i128 - lo as i128 + 1) < n as i128 => {
                let vs: Vec<i64> = (lo..=hi).map(|k| u.embed(k)).collect();
                self.value.alpha_values(&vs)
            }
            Universe::Ring(_) => self.value.top(),
            Universe::Machine => self.value.range(lo, hi),
        };
        self.update(x, v, a)
    }

    fn guard(&self, b: &BExpr, v: bool) -> Result<Self::Elem> {
        let Some(c) = &self.carrier else {
            return self.guard_syntactic(b, v);
        };
        let key = (b.clone(), v);
        if let Some(hit) = self.guards.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let g = self.guard_exact(c, b, v)?;
        self.guards.lock().unwrap().insert(key, g.clone());
        Ok(g)
    }

    /// Per-variable projections of the support, read off the carrier index
    /// digits without building memories.
    fn alpha(&self, p: &Predicate) -> Self::Elem {
        let Some(n) = self.ring_size(&p.carrier) else {
            return alpha_by_memories(self, p);
        };
        let k = self.vars.len();
        let mut seen = vec![false; k * n];
        let mut any = false;
        for mut i in p.support() {
            any = true;
            for j in (0..k).rev() {
                seen[j * n + i % n] = true;
                i /= n;
            }
        }
        if !any {
            return AbsMem::Bot;
        }
        self.env((0..k).map(|j| {
            let vs: Vec<i64> = (0..n)
                .filter(|v| seen[j * n + v])
                .map(|v| v as i64)
                .collect();
            self.value.alpha_values(&vs)
        }))
    }

    /// The product of the per-variable concretizations, in index order.
    fn gamma_indices(&self, a: &Self::Elem, c: &Carrier) -> Vec<usize> {
        let Some(n) = self.ring_size(c) else {
            return gamma_by_memories(self, a, c);
        };
        let AbsMem::Env(vals) = a else {
            return Vec::new();
        };
        let mut out = vec![0usize];
        for v in vals {
            let digits: Vec<usize> = (0..n)
                .filter(|d| self.value.contains(v, *d as i64))
                .collect();
            out = out
                .iter()
                .flat_map(|base| digits.iter().map(move |d| base * n + d))
                .collect();
        }
        out
    }

    fn to_json(&self, a: &Self::Elem) -> Value {
        match a {
            AbsMem::Bot => Value::String("bot".into()),
            AbsMem::Env(vals) => {
                let mut m = Map::new();
                for (x, v) in self.vars.iter().zip(vals) {
                    m.insert(x.clone(), self.value.to_json(v));
                }
                Value::Object(m)
            }
        }
    }

    /// `"bot"`, `"top"` or an object; variables left out are top.
    fn from_json(&self, v: &Value) -> Result<Self::Elem> {
        match v {
            Value::String(s) if s == "bot" => Ok(AbsMem::Bot),
            Value::String(s) if s == "top" => Ok(self.top()),
            Value::Object(o) => {
                let mut vals: Vec<V::Val> = vec![self.value.top(); self.vars.len()];
                for (x, val) in o {
                    let i = self
                        .position(x)
                        .map_err(|_| Error::Invalid(format!("`{x}` is not a program variable")))?;
                    vals[i] = self.value.from_json(val)?;
                }
                Ok(self.env(vals))
            }
            _ => Err(Error::Invalid(format!("`{v}` is not an abstract memory"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{ConstVal, Constants, Interval, Itv};
    use crate::lang::{parse_aexpr, parse_bexpr};
    use serde_json::json;

    #[test]
    fn interval_assignment() {
        let d = NonRelational::of(Interval::new(Universe::Machine), &["x"]);
        let a = d.env_of(&[("x", Itv::Range(0, 1))]).unwrap();
        let r = d.assign("x", &parse_aexpr("4*x - 2").unwrap(), &a).unwrap();
        assert_eq!(r, d.env_of(&[("x", Itv::Range(-2, 2))]).unwrap());
        let same = d.assign("x", &parse_aexpr("x").unwrap(), &a).unwrap();
        assert_eq!(same, a);
        assert_eq!(
            d.assign("x", &AExpr::Lit(1), &AbsMem::Bot).unwrap(),
            AbsMem::Bot
        );
    }

    fn digit_routes_agree<V: ValueDomain + Clone>(value: V) {
        let d = NonRelational::of(value, &["x", "y"]);
        let c = d.carrier().unwrap().clone();
        for a in d.elements().unwrap() {
            assert_eq!(
                d.gamma_indices(&a, &c),
                gamma_by_memories(&d, &a, &c),
                "{a:?}"
            );
        }
        for bits in 0..1u64 << c.len() {
            let p = Predicate::from_bits(crate::logic::TruthLattice::Bool2, &c, bits);
            assert_eq!(d.alpha(&p), alpha_by_memories(&d, &p), "{bits:b}");
        }
    }

    #[test]
    fn digit_alpha_and_gamma_match_memory_enumeration() {
        let u = Universe::Ring(3);
        digit_routes_agree(Interval::new(u));
        digit_routes_agree(Constants::new(u));
        digit_routes_agree(crate::domains::Sign::new(u));
    }

    #[test]
    fn constant_folding() {
        let d = NonRelational::of(Constants::new(Universe::Machine), &["x"]);
        let r = d
            .assign("x", &parse_aexpr("2+3").unwrap(), &d.top())
            .unwrap();
        assert_eq!(r, d.env_of(&[("x", ConstVal::Const(5))]).unwrap());
    }

    #[test]
    fn machine_guards() {
        let d = NonRelational::of(Interval::new(Universe::Machine), &["x"]);
        let b = parse_bexpr("x <= 0").unwrap();
        assert_eq!(
            d.guard(&b, true).unwrap(),
            d.env_of(&[("x", Itv::Range(i64::MIN, 0))]).unwrap()
        );
        assert_eq!(
            d.guard(&b, false).unwrap(),
            d.env_of(&[("x", Itv::Range(1, i64::MAX))]).unwrap()
        );
        assert_eq!(d.guard(&BExpr::True, true).unwrap(), d.top());
        let b = parse_bexpr("100 < x and not (x = 3)").unwrap();
        assert_eq!(
            d.guard(&b, true).unwrap(),
            d.env_of(&[("x", Itv::Range(101, i64::MAX))]).unwrap()
        );
        let b = parse_bexpr("x < -9223372036854775808").unwrap();
        assert_eq!(d.guard(&b, true).unwrap(), AbsMem::Bot);
    }

    #[test]
    fn ring_guards_are_exact() {
        let d = NonRelational::of(Interval::new(Universe::Ring(8)), &["x", "y"]);
        let b = parse_bexpr("x + y <= 1").unwrap();
        // x + y ≤ 1 (mod 8) has solutions with both components in {0..7}
        let g = d.guard(&b, true).unwrap();
        assert_eq!(g, d.top());
        let b = parse_bexpr("x <= 2 and y = 5").unwrap();
        assert_eq!(
            d.guard(&b, true).unwrap(),
            d.env_of(&[("x", Itv::Range(0, 2)), ("y", Itv::Range(5, 5))])
                .unwrap()
        );
    }

    #[test]
    fn enumerations() {
        let d = NonRelational::of(Interval::new(Universe::Ring(8)), &["x", "y"]);
        assert_eq!(d.elements().unwrap().len(), 36 * 36 + 1);
        let a = d
            .env_of(&[("x", Itv::Range(1, 2)), ("y", Itv::Range(0, 2))])
            .unwrap();
        assert_eq!(d.concretize(&a, 100).unwrap().len(), 6);
        assert_eq!(
            d.from_json(&json!({"x": {"lo": 1, "hi": 2}, "y": {"lo": 0, "hi": 2}}))
                .unwrap(),
            a
        );
        assert_eq!(d.from_json(&d.to_json(&a)).unwrap(), a);
        assert!(d.from_json(&json!({"z": "top"})).is_err());
    }
}
