use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::set::{SetVal, Signature};
use super::syntax::LType;
use crate::{Error, Result};

/// Bound on materialized abstract tables and enumerated abstract posets.
pub const ABS_CAP: usize = 1 << 12;

/// Number of probe points used to compare abstract functions whose domain
/// cannot be enumerated.
pub const PROBES: usize = 48;

/// A finite lattice `A₀(b)` with a Galois connection to subsets of a base
/// carrier, given by `γ` as bitmasks. `α` is derived as the least element
/// above a set and must exist.
#[derive(Debug, Clone)]
pub struct FinPoset {
    pub name: String,
    pub labels: Vec<String>,
    n: usize,
    gamma: Vec<u64>,
    leq: Vec<Vec<bool>>,
    join: Vec<Vec<u16>>,
    alpha: Vec<u16>,
    bottom: u16,
    insertion: bool,
}

impl FinPoset {
    pub fn new(
        name: &str,
        n: usize,
        labels: Vec<String>,
        gamma: Vec<u64>,
        leq: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let k = labels.len();
        let bad = |m: String| Error::Invalid(format!("{name}: {m}"));
        if n > 16 || gamma.len() != k || leq.len() != k || leq.iter().any(|r| r.len() != k) {
            return Err(bad("inconsistent sizes".into()));
        }
        for a in 0..k {
            if !leq[a][a] {
                return Err(bad("order is not reflexive".into()));
            }
            for b in 0..k {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(bad("order is not antisymmetric".into()));
                }
                for c in 0..k {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(bad("order is not transitive".into()));
                    }
                }
            }
        }
        let least = |cands: Vec<usize>| -> Option<u16> {
            cands
                .iter()
                .find(|&&a| cands.iter().all(|&b| leq[a][b]))
                .map(|a| *a as u16)
        };
        let mut join = vec![vec![0u16; k]; k];
        for a in 0..k {
            for b in 0..k {
                let ubs = (0..k).filter(|&c| leq[a][c] && leq[b][c]).collect();
                join[a][b] = least(ubs).ok_or_else(|| bad("not a join semilattice".into()))?;
            }
        }
        let mut alpha = Vec::with_capacity(1 << n);
        for mask in 0..1u64 << n {
            let above = (0..k).filter(|&a| mask & !gamma[a] == 0).collect();
            alpha
                .push(least(above).ok_or_else(|| bad(format!("no best abstraction of {mask:b}")))?);
        }
        let bottom = alpha[0];
        // Adjunction, checked on every subset and every element.
        for mask in 0..1u64 << n {
            for a in 0..k {
                if leq[alpha[mask as usize] as usize][a] != (mask & !gamma[a] == 0) {
                    return Err(bad("α and γ are not adjoint".into()));
                }
            }
        }
        let insertion = (0..k).all(|a| alpha[gamma[a] as usize] as usize == a);
        Ok(FinPoset {
            name: name.to_string(),
            labels,
            n,
            gamma,
            leq,
            join,
            alpha,
            bottom,
            insertion,
        })
    }

    /// Intervals over carrier positions, plus the empty interval.
    pub fn interval(n: usize, values: &[i64]) -> Result<Self> {
        let mut labels = vec!["bot".to_string()];
        let mut gamma = vec![0u64];
        let mut bounds = vec![None];
        for lo in 0..n {
            for hi in lo..n {
                labels.push(format!("[{},{}]", values[lo], values[hi]));
                gamma.push(((1u64 << (hi + 1)) - 1) & !((1u64 << lo) - 1));
                bounds.push(Some((lo, hi)));
            }
        }
        let leq = bounds
            .iter()
            .map(|a| {
                bounds
                    .iter()
                    .map(|b| match (a, b) {
                        (None, _) => true,
                        (Some(_), None) => false,
                        (Some((l1, h1)), Some((l2, h2))) => l2 <= l1 && h1 <= h2,
                    })
                    .collect()
            })
            .collect();
        FinPoset::new("interval", n, labels, gamma, leq)
    }

    /// The flat lattice of constants.
    pub fn constants(n: usize, values: &[i64]) -> Result<Self> {
        let mut labels = vec!["bot".to_string()];
        labels.extend(values.iter().map(|v| v.to_string()));
        labels.push("top".into());
        let k = labels.len();
        let mut gamma = vec![0u64];
        gamma.extend((0..n).map(|i| 1u64 << i));
        gamma.push((1u64 << n) - 1);
        let leq = (0..k)
            .map(|a| (0..k).map(|b| a == 0 || b == k - 1 || a == b).collect())
            .collect();
        FinPoset::new("constants", n, labels, gamma, leq)
    }

    /// Exact abstraction: every subset is its own abstract element.
    pub fn powerset(n: usize, values: &[i64]) -> Result<Self> {
        let k = 1usize << n;
        let labels = (0..k as u64)
            .map(|m| {
                let xs: Vec<String> = (0..n)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| values[i].to_string())
                    .collect();
                format!("{{{}}}", xs.join(","))
            })
            .collect();
        let gamma = (0..k as u64).collect();
        let leq = (0..k as u64)
            .map(|a| (0..k as u64).map(|b| a & !b == 0).collect())
            .collect();
        FinPoset::new("powerset", n, labels, gamma, leq)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_insertion(&self) -> bool {
        self.insertion
    }

    pub fn carrier_size(&self) -> usize {
        self.n
    }

    pub fn leq(&self, a: u16, b: u16) -> bool {
        self.leq[a as usize][b as usize]
    }

    pub fn join(&self, a: u16, b: u16) -> u16 {
        self.join[a as usize][b as usize]
    }

    pub fn bottom(&self) -> u16 {
        self.bottom
    }

    pub fn alpha(&self, mask: u64) -> u16 {
        self.alpha[mask as usize]
    }

    pub fn gamma(&self, a: u16) -> u64 {
        self.gamma[a as usize]
    }

    pub fn label(&self, a: u16) -> &str {
        &self.labels[a as usize]
    }

    pub fn find(&self, label: &str) -> Option<u16> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as u16)
    }
}

/// Elements of `A(τ)`. Functions are monotone maps, either tabulated over
/// the enumerated domain poset or kept as closures when the domain is too
/// large to enumerate.
#[derive(Clone)]
pub enum AbsVal {
    Base(u16),
    Unit,
    Pair(Box<AbsVal>, Box<AbsVal>),
    Fun(Arc<AbsFun>),
}

pub enum AbsFun {
    Table(Vec<AbsVal>),
    Map(Box<dyn Fn(&AbsVal) -> Result<AbsVal> + Send + Sync>),
}

impl AbsVal {
    pub fn pair(a: AbsVal, b: AbsVal) -> Self {
        AbsVal::Pair(Box::new(a), Box::new(b))
    }
}

impl fmt::Debug for AbsVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsVal::Base(i) => write!(f, "#{i}"),
            AbsVal::Unit => write!(f, "•"),
            AbsVal::Pair(a, b) => write!(f, "({a:?}, {b:?})"),
            AbsVal::Fun(t) => match &**t {
                AbsFun::Table(rows) => f.debug_list().entries(rows).finish(),
                AbsFun::Map(_) => write!(f, "<fn>"),
            },
        }
    }
}

struct Inner {
    sig: Signature,
    base: HashMap<String, FinPoset>,
    probes: Mutex<HashMap<LType, Arc<Vec<AbsVal>>>>,
    seed: u64,
}

/// The type-indexed family of Galois connections `A(τ) ⇄ Q(⟦τ⟧)` induced
/// by per-base connections and the Cartesian closed structure.
#[derive(Clone)]
pub struct Lifted(Arc<Inner>);

impl fmt::Debug for Lifted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lifted")
            .field("base", &self.0.base.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Which base poset to build for every base type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Interval,
    Constants,
    Powerset,
}

impl std::str::FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(BaseKind::Interval),
            "constants" => Ok(BaseKind::Constants),
            "powerset" => Ok(BaseKind::Powerset),
            _ => Err(Error::Invalid(format!(
                "unknown base domain `{s}` (expected interval, constants or powerset)"
            ))),
        }
    }
}

impl Lifted {
    pub fn new(sig: Signature, base: HashMap<String, FinPoset>, seed: u64) -> Result<Self> {
        for (b, vals) in sig.base_types() {
            let p = base
                .get(b)
                .ok_or_else(|| Error::Invalid(format!("no abstract domain for base type {b}")))?;
            if p.carrier_size() != vals.len() {
                return Err(Error::CarrierMismatch(format!(
                    "{} abstracts {} values but {b} has {}",
                    p.name,
                    p.carrier_size(),
                    vals.len()
                )));
            }
        }
        Ok(Lifted(Arc::new(Inner {
            sig,
            base,
            probes: Mutex::default(),
            seed,
        })))
    }

    /// The same kind of base poset for every base type.
    pub fn uniform(sig: Signature, kind: BaseKind, seed: u64) -> Result<Self> {
        let mut base = HashMap::new();
        for (b, vals) in sig.base_types() {
            let p = match kind {
                BaseKind::Interval => FinPoset::interval(vals.len(), vals)?,
                BaseKind::Constants => FinPoset::constants(vals.len(), vals)?,
                BaseKind::Powerset => FinPoset::powerset(vals.len(), vals)?,
            };
            base.insert(b.clone(), p);
        }
        Lifted::new(sig, base, seed)
    }

    pub fn sig(&self) -> &Signature {
        &self.0.sig
    }

    pub fn base(&self, b: &str) -> Result<&FinPoset> {
        self.0
            .base
            .get(b)
            .ok_or_else(|| Error::Type(format!("unknown base type {b}")))
    }

    pub fn all_insertions(&self) -> bool {
        self.0.base.values().all(FinPoset::is_insertion)
    }

    /// Elements of `A(τ)` when there are at most `cap` of them.
    pub fn elements(&self, ty: &LType, cap: usize) -> Result<Option<Vec<AbsVal>>> {
        Ok(match ty {
            LType::Base(b) => {
                let p = self.base(b)?;
                (p.len() <= cap).then(|| (0..p.len() as u16).map(AbsVal::Base).collect())
            }
            LType::Unit => Some(vec![AbsVal::Unit]),
            LType::Prod(a, b) => match (self.elements(a, cap)?, self.elements(b, cap)?) {
                (Some(xs), Some(ys)) if xs.len() * ys.len() <= cap => {
                    let mut out = Vec::new();
                    for x in &xs {
                        for y in &ys {
                            out.push(AbsVal::pair(x.clone(), y.clone()));
                        }
                    }
                    Some(out)
                }
                _ => None,
            },
            LType::Arrow(a, b) => self.monotone_tables(a, b, cap)?,
        })
    }

    /// Every monotone table `A(a) → A(b)`, by backtracking along a linear
    /// extension of the domain; `None` past `cap` tables.
    fn monotone_tables(&self, a: &LType, b: &LType, cap: usize) -> Result<Option<Vec<AbsVal>>> {
        let Some(dom) = self.elements(a, ABS_CAP)? else {
            return Ok(None);
        };
        let Some(cod) = self.elements(b, ABS_CAP)? else {
            return Ok(None);
        };
        let order = self.extension(a, &dom)?;
        let mut below = vec![Vec::new(); dom.len()];
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[..pos] {
                if self.leq(a, &dom[j], &dom[i])? {
                    below[i].push(j);
                }
            }
        }
        let mut cod_leq = vec![vec![false; cod.len()]; cod.len()];
        for (i, x) in cod.iter().enumerate() {
            for (j, y) in cod.iter().enumerate() {
                cod_leq[i][j] = self.leq(b, x, y)?;
            }
        }
        let mut out = Vec::new();
        let mut choice = vec![usize::MAX; dom.len()];
        if !backtrack(&order, 0, &below, &cod_leq, &mut choice, &mut out, cap) {
            return Ok(None);
        }
        Ok(Some(
            out.into_iter()
                .map(|ch| {
                    AbsVal::Fun(Arc::new(AbsFun::Table(
                        ch.iter().map(|&c| cod[c].clone()).collect(),
                    )))
                })
                .collect(),
        ))
    }

    fn extension(&self, ty: &LType, dom: &[AbsVal]) -> Result<Vec<usize>> {
        let mut counts = Vec::with_capacity(dom.len());
        for x in dom {
            let mut c = 0;
            for y in dom {
                if self.leq(ty, y, x)? {
                    c += 1;
                }
            }
            counts.push(c);
        }
        let mut idx: Vec<usize> = (0..dom.len()).collect();
        idx.sort_by_key(|&i| counts[i]);
        Ok(idx)
    }

    /// Position of `v` among [`Self::elements`] of a first-order type.
    pub fn index_of(&self, ty: &LType, v: &AbsVal) -> Result<usize> {
        match (ty, v) {
            (LType::Base(_), AbsVal::Base(i)) => Ok(*i as usize),
            (LType::Unit, AbsVal::Unit) => Ok(0),
            (LType::Prod(a, b), AbsVal::Pair(x, y)) => {
                Ok(self.index_of(a, x)? * self.count(b)? + self.index_of(b, y)?)
            }
            _ => Err(Error::Type(format!("cannot index {v:?} in A({ty})"))),
        }
    }

    fn count(&self, ty: &LType) -> Result<usize> {
        match ty {
            LType::Base(b) => Ok(self.base(b)?.len()),
            LType::Unit => Ok(1),
            LType::Prod(a, b) => Ok(self.count(a)? * self.count(b)?),
            LType::Arrow(..) => Err(Error::Type(format!("A({ty}) is not indexed"))),
        }
    }

    /// Whether functions out of `A(ty)` are tabulated.
    fn tabulated(&self, ty: &LType) -> bool {
        ty.is_first_order() && self.count(ty).is_ok_and(|n| n <= ABS_CAP)
    }

    /// Builds a monotone map out of `A(dom)`, tabulating it when the domain
    /// is first-order and small.
    pub fn make_fun(
        &self,
        dom: &LType,
        f: impl Fn(&AbsVal) -> Result<AbsVal> + Send + Sync + 'static,
    ) -> Result<AbsVal> {
        if self.tabulated(dom) {
            let xs = self
                .elements(dom, ABS_CAP)?
                .expect("tabulated domain is enumerable");
            let rows = xs.iter().map(&f).collect::<Result<Vec<_>>>()?;
            Ok(AbsVal::Fun(Arc::new(AbsFun::Table(rows))))
        } else {
            Ok(AbsVal::Fun(Arc::new(AbsFun::Map(Box::new(f)))))
        }
    }

    pub fn apply(&self, dom: &LType, f: &AbsVal, a: &AbsVal) -> Result<AbsVal> {
        match f {
            AbsVal::Fun(t) => match &**t {
                AbsFun::Table(rows) => Ok(rows[self.index_of(dom, a)?].clone()),
                AbsFun::Map(g) => g(a),
            },
            _ => Err(Error::Type("abstract application of a non-function".into())),
        }
    }

    pub fn bottom(&self, ty: &LType) -> Result<AbsVal> {
        match ty {
            LType::Base(b) => Ok(AbsVal::Base(self.base(b)?.bottom())),
            LType::Unit => Ok(AbsVal::Unit),
            LType::Prod(a, b) => Ok(AbsVal::pair(self.bottom(a)?, self.bottom(b)?)),
            LType::Arrow(a, b) => {
                let bot = self.bottom(b)?;
                self.make_fun(a, move |_| Ok(bot.clone()))
            }
        }
    }

    /// Points at which functions out of `A(ty)` are compared: every element
    /// when `A(ty)` is small, otherwise a seeded sample that always
    /// includes the bottom element.
    pub fn probes(&self, ty: &LType) -> Result<Arc<Vec<AbsVal>>> {
        if let Some(p) = self.0.probes.lock().expect("probe cache").get(ty) {
            return Ok(p.clone());
        }
        let pts = match self.elements(ty, ABS_CAP)? {
            Some(xs) => xs,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.0.seed ^ hash_type(ty));
                let mut xs = vec![self.bottom(ty)?];
                for _ in 1..PROBES {
                    xs.push(self.random(ty, &mut rng)?);
                }
                xs
            }
        };
        let pts = Arc::new(pts);
        self.0
            .probes
            .lock()
            .expect("probe cache")
            .insert(ty.clone(), pts.clone());
        Ok(pts)
    }

    /// A random element of `A(ty)`. Functions are random monotone tables
    /// when the domain is tabulated, and `α` of random sets of concrete
    /// functions otherwise.
    pub fn random(&self, ty: &LType, rng: &mut ChaCha8Rng) -> Result<AbsVal> {
        match ty {
            LType::Base(b) => Ok(AbsVal::Base(rng.gen_range(0..self.base(b)?.len()) as u16)),
            LType::Unit => Ok(AbsVal::Unit),
            LType::Prod(a, b) => Ok(AbsVal::pair(self.random(a, rng)?, self.random(b, rng)?)),
            LType::Arrow(a, b) if self.tabulated(a) => {
                let dom = self.elements(a, ABS_CAP)?.expect("tabulated");
                let order = self.extension(a, &dom)?;
                let mut rows: Vec<Option<AbsVal>> = vec![None; dom.len()];
                for &i in &order {
                    // Least admissible value: join of the images below.
                    let mut lower = self.bottom(b)?;
                    for &j in &order {
                        if let Some(v) = &rows[j] {
                            if self.leq(a, &dom[j], &dom[i])? {
                                lower = self.join(b, &lower, v)?;
                            }
                        }
                    }
                    let r = self.random(b, rng)?;
                    let v = if rng.gen_bool(0.5) {
                        self.join(b, &lower, &r)?
                    } else {
                        lower
                    };
                    rows[i] = Some(v);
                }
                Ok(AbsVal::Fun(Arc::new(AbsFun::Table(
                    rows.into_iter().map(|r| r.expect("filled")).collect(),
                ))))
            }
            LType::Arrow(..) => {
                let all = self.sig().elements(ty)?;
                let k = rng.gen_range(0..=3.min(all.len()));
                let pick: Vec<SetVal> = (0..k)
                    .map(|_| all[rng.gen_range(0..all.len())].clone())
                    .collect();
                self.alpha(ty, &pick)
            }
        }
    }

    pub fn leq(&self, ty: &LType, a: &AbsVal, b: &AbsVal) -> Result<bool> {
        Ok(match (ty, a, b) {
            (LType::Base(t), AbsVal::Base(x), AbsVal::Base(y)) => self.base(t)?.leq(*x, *y),
            (LType::Unit, AbsVal::Unit, AbsVal::Unit) => true,
            (LType::Prod(s, t), AbsVal::Pair(a1, a2), AbsVal::Pair(b1, b2)) => {
                self.leq(s, a1, b1)? && self.leq(t, a2, b2)?
            }
            (LType::Arrow(s, t), AbsVal::Fun(_), AbsVal::Fun(_)) => {
                for u in self.probes(s)?.iter() {
                    if !self.leq(t, &self.apply(s, a, u)?, &self.apply(s, b, u)?)? {
                        return Ok(false);
                    }
                }
                true
            }
            _ => return Err(Error::Type(format!("{a:?} or {b:?} is not in A({ty})"))),
        })
    }

    pub fn equal(&self, ty: &LType, a: &AbsVal, b: &AbsVal) -> Result<bool> {
        Ok(self.leq(ty, a, b)? && self.leq(ty, b, a)?)
    }

    pub fn join(&self, ty: &LType, a: &AbsVal, b: &AbsVal) -> Result<AbsVal> {
        Ok(match (ty, a, b) {
            (LType::Base(t), AbsVal::Base(x), AbsVal::Base(y)) => {
                AbsVal::Base(self.base(t)?.join(*x, *y))
            }
            (LType::Unit, ..) => AbsVal::Unit,
            (LType::Prod(s, t), AbsVal::Pair(a1, a2), AbsVal::Pair(b1, b2)) => {
                AbsVal::pair(self.join(s, a1, b1)?, self.join(t, a2, b2)?)
            }
            (LType::Arrow(s, t), AbsVal::Fun(_), AbsVal::Fun(_)) => {
                let (me, s2, t2, f, g) = (
                    self.clone(),
                    (**s).clone(),
                    (**t).clone(),
                    a.clone(),
                    b.clone(),
                );
                self.make_fun(s, move |u| {
                    me.join(&t2, &me.apply(&s2, &f, u)?, &me.apply(&s2, &g, u)?)
                })?
            }
            _ => return Err(Error::Type(format!("{a:?} or {b:?} is not in A({ty})"))),
        })
    }

    /// `v ∈ γ_τ(a)`. At arrow types this is `∀x. f(x) ∈ γ(g(α{x}))`, which
    /// agrees with the subset formulation because `g` is monotone.
    pub fn gamma_contains(&self, ty: &LType, a: &AbsVal, v: &SetVal) -> Result<bool> {
        Ok(match (ty, a, v) {
            (LType::Base(b), AbsVal::Base(x), SetVal::Base(i)) => {
                self.base(b)?.gamma(*x) >> i & 1 == 1
            }
            (LType::Unit, AbsVal::Unit, SetVal::Unit) => true,
            (LType::Prod(s, t), AbsVal::Pair(a1, a2), SetVal::Pair(v1, v2)) => {
                self.gamma_contains(s, a1, v1)? && self.gamma_contains(t, a2, v2)?
            }
            (LType::Arrow(s, t), AbsVal::Fun(_), SetVal::Fun(_)) => {
                for x in self.sig().elements(s)? {
                    let fx = self.sig().apply(s, v, &x)?;
                    let gx = self.apply(s, a, &self.alpha(s, std::slice::from_ref(&x))?)?;
                    if !self.gamma_contains(t, &gx, &fx)? {
                        return Ok(false);
                    }
                }
                true
            }
            _ => {
                return Err(Error::Type(format!(
                    "{a:?} or {v:?} does not have type {ty}"
                )))
            }
        })
    }

    /// `γ_τ(a)` as a sorted list.
    pub fn gamma(&self, ty: &LType, a: &AbsVal) -> Result<Vec<SetVal>> {
        match (ty, a) {
            (LType::Prod(s, t), AbsVal::Pair(a1, a2)) => {
                let (xs, ys) = (self.gamma(s, a1)?, self.gamma(t, a2)?);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for x in &xs {
                    for y in &ys {
                        out.push(SetVal::pair(x.clone(), y.clone()));
                    }
                }
                Ok(out)
            }
            _ => {
                let mut out = Vec::new();
                for v in self.sig().elements(ty)? {
                    if self.gamma_contains(ty, a, &v)? {
                        out.push(v);
                    }
                }
                Ok(out)
            }
        }
    }

    /// `α_τ(U)`.
    pub fn alpha(&self, ty: &LType, set: &[SetVal]) -> Result<AbsVal> {
        match ty {
            LType::Base(b) => {
                let mask = set.iter().try_fold(0u64, |m, v| match v {
                    SetVal::Base(i) => Ok(m | 1 << i),
                    _ => Err(Error::Type(format!("{v:?} is not in ⟦{ty}⟧"))),
                })?;
                Ok(AbsVal::Base(self.base(b)?.alpha(mask)))
            }
            LType::Unit => Ok(AbsVal::Unit),
            LType::Prod(s, t) => {
                let firsts: Vec<SetVal> = set.iter().map(|v| v.fst().clone()).collect();
                let seconds: Vec<SetVal> = set.iter().map(|v| v.snd().clone()).collect();
                Ok(AbsVal::pair(
                    self.alpha(s, &firsts)?,
                    self.alpha(t, &seconds)?,
                ))
            }
            LType::Arrow(s, t) => {
                let (me, s2, t2) = (self.clone(), (**s).clone(), (**t).clone());
                let fs: Vec<SetVal> = set.to_vec();
                self.make_fun(s, move |u| {
                    let xs = me.gamma(&s2, u)?;
                    let mut outs = Vec::new();
                    for f in &fs {
                        for x in &xs {
                            outs.push(me.sig().apply(&s2, f, x)?);
                        }
                    }
                    outs.sort();
                    outs.dedup();
                    me.alpha(&t2, &outs)
                })
            }
        }
    }

    /// Whether a materialized function is order-preserving on its
    /// enumerated domain (closures are checked on probe points).
    pub fn is_monotone(&self, ty: &LType, f: &AbsVal) -> Result<bool> {
        let LType::Arrow(s, t) = ty else {
            return Ok(true);
        };
        let pts = self.probes(s)?;
        for x in pts.iter() {
            let fx = self.apply(s, f, x)?;
            for y in pts.iter() {
                if self.leq(s, x, y)? && !self.leq(t, &fx, &self.apply(s, f, y)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_json(&self, ty: &LType, a: &AbsVal) -> Result<serde_json::Value> {
        use serde_json::{json, Value};
        Ok(match (ty, a) {
            (LType::Base(b), AbsVal::Base(x)) => json!(self.base(b)?.label(*x)),
            (LType::Unit, AbsVal::Unit) => Value::Null,
            (LType::Prod(s, t), AbsVal::Pair(x, y)) => {
                json!([self.to_json(s, x)?, self.to_json(t, y)?])
            }
            (LType::Arrow(s, t), AbsVal::Fun(_)) => {
                let mut rows = Vec::new();
                for u in self.probes(s)?.iter() {
                    rows.push(json!({
                        "arg": self.to_json(s, u)?,
                        "value": self.to_json(t, &self.apply(s, a, u)?)?,
                    }));
                }
                Value::Array(rows)
            }
            _ => return Err(Error::Type(format!("{a:?} is not in A({ty})"))),
        })
    }

    /// Reads base elements by label, pairs as arrays and `null` for unit.
    pub fn from_json(&self, ty: &LType, v: &serde_json::Value) -> Result<AbsVal> {
        use serde_json::Value;
        let bad = || Error::Invalid(format!("`{v}` is not an element of A({ty})"));
        match (ty, v) {
            (LType::Base(b), Value::String(s)) => {
                self.base(b)?.find(s).map(AbsVal::Base).ok_or_else(bad)
            }
            (LType::Unit, Value::Null) => Ok(AbsVal::Unit),
            (LType::Prod(s, t), Value::Array(xs)) if xs.len() == 2 => Ok(AbsVal::pair(
                self.from_json(s, &xs[0])?,
                self.from_json(t, &xs[1])?,
            )),
            _ => Err(bad()),
        }
    }
}

fn backtrack(
    order: &[usize],
    pos: usize,
    below: &[Vec<usize>],
    cod_leq: &[Vec<bool>],
    choice: &mut [usize],
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> bool {
    if pos == order.len() {
        out.push(choice.to_vec());
        return out.len() <= cap;
    }
    let i = order[pos];
    for c in 0..cod_leq.len() {
        if below[i].iter().all(|&j| cod_leq[choice[j]][c]) {
            choice[i] = c;
            if !backtrack(order, pos + 1, below, cod_leq, choice, out, cap) {
                return false;
            }
        }
    }
    choice[i] = usize::MAX;
    true
}

fn hash_type(ty: &LType) -> u64 {
    use std::hash::{Hash, Hasher};
    // `DefaultHasher::new` has fixed keys, so probes are stable across runs.
    let mut h = std::collections::hash_map::DefaultHasher::new();
    ty.to_string().hash(&mut h);
    h.finish()
}

impl AbsVal {
    /// The base-element index; panics on other shapes.
    pub fn as_base(&self) -> u16 {
        match self {
            AbsVal::Base(i) => *i,
            v => panic!("{v:?} is not a base element"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_posets_are_insertions() {
        let vals = [0, 1, 2, 3];
        let i = FinPoset::interval(4, &vals).unwrap();
        assert_eq!(i.len(), 11);
        assert!(i.is_insertion());
        assert_eq!(i.label(i.alpha(0b0110)), "[1,2]");
        assert_eq!(i.label(i.alpha(0b1001)), "[0,3]");
        let c = FinPoset::constants(4, &vals).unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.is_insertion());
        assert_eq!(c.label(c.alpha(0b0011)), "top");
        let p = FinPoset::powerset(3, &vals[..3]).unwrap();
        assert_eq!(p.len(), 8);
        assert!(p.is_insertion());
    }

    #[test]
    fn non_adjoint_gamma_is_rejected() {
        // Two incomparable elements that both cover {0}: no best abstraction.
        let leq = vec![vec![true, false], vec![false, true]];
        assert!(FinPoset::new("bad", 1, vec!["a".into(), "b".into()], vec![1, 1], leq).is_err());
    }

    #[test]
    fn monotone_table_counts() {
        // Monotone self-maps of the four-element interval lattice over {0,1}
        // (a diamond), counted by brute force over all 4^4 maps.
        let sig = super::super::Signature::standard(2).unwrap();
        let l = Lifted::uniform(sig, BaseKind::Interval, 0).unwrap();
        let nat = LType::base("nat");
        let all = l
            .elements(&LType::arrow(nat.clone(), nat.clone()), ABS_CAP)
            .unwrap()
            .unwrap();
        let leq = |a: usize, b: usize| a == b || a == 0 || b == 3;
        let brute = (0..256usize)
            .filter(|k| {
                let f = |i: usize| k >> (2 * i) & 3;
                (0..4).all(|a| (0..4).all(|b| !leq(a, b) || leq(f(a), f(b))))
            })
            .count();
        assert_eq!(brute, 36);
        assert_eq!(all.len(), brute);
        assert!(all.iter().all(|f| l
            .is_monotone(&LType::arrow(nat.clone(), nat.clone()), f)
            .unwrap()));
    }
}
