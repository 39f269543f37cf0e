use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use super::syntax::{LTerm, LType};
use crate::{Error, Result};

/// Default bound on base carrier sizes.
pub const DEFAULT_BASE_CAP: usize = 4;

/// Largest set `⟦τ⟧` that is ever enumerated.
pub const SPACE_CAP: usize = 1 << 16;

/// Elements of the set semantics. Base values are positions in their
/// carrier; functions are tables indexed by the enumeration order of
/// their domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetVal {
    Base(u16),
    Unit,
    Pair(Box<SetVal>, Box<SetVal>),
    Fun(Arc<[SetVal]>),
}

impl SetVal {
    pub fn pair(a: SetVal, b: SetVal) -> Self {
        SetVal::Pair(Box::new(a), Box::new(b))
    }

    pub fn fst(&self) -> &SetVal {
        match self {
            SetVal::Pair(a, _) => a,
            _ => panic!("fst of a non-pair"),
        }
    }

    pub fn snd(&self) -> &SetVal {
        match self {
            SetVal::Pair(_, b) => b,
            _ => panic!("snd of a non-pair"),
        }
    }
}

/// A higher-order signature with its set-theoretic structure: finite base
/// carriers and a denotation for each constant.
#[derive(Debug, Clone)]
pub struct Signature {
    base: BTreeMap<String, Vec<i64>>,
    constants: BTreeMap<String, (LType, SetVal)>,
    cap: usize,
}

impl Signature {
    pub fn new(cap: usize) -> Self {
        Signature {
            base: BTreeMap::new(),
            constants: BTreeMap::new(),
            cap,
        }
    }

    pub fn add_base(&mut self, name: &str, values: Vec<i64>) -> Result<()> {
        if values.is_empty() || values.len() > self.cap {
            return Err(Error::CarrierTooLarge(format!(
                "base type {name} has {} values; carriers must have 1..={} values",
                values.len(),
                self.cap
            )));
        }
        let mut sorted = values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != values.len() {
            return Err(Error::Invalid(format!(
                "duplicate values in base type {name}"
            )));
        }
        self.base.insert(name.to_string(), values);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str, ty: LType, value: SetVal) -> Result<()> {
        if !self.well_formed(&ty, &value)? {
            return Err(Error::Type(format!(
                "denotation of {name} is not in ⟦{ty}⟧"
            )));
        }
        self.constants.insert(name.to_string(), (ty, value));
        Ok(())
    }

    pub fn base_types(&self) -> impl Iterator<Item = (&String, &Vec<i64>)> {
        self.base.iter()
    }

    pub fn carrier(&self, b: &str) -> Result<&[i64]> {
        self.base
            .get(b)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Type(format!("unknown base type {b}")))
    }

    pub fn constant(&self, c: &str) -> Result<&(LType, SetVal)> {
        self.constants
            .get(c)
            .ok_or_else(|| Error::Type(format!("unknown constant {c}")))
    }

    pub fn constants(&self) -> impl Iterator<Item = (&String, &(LType, SetVal))> {
        self.constants.iter()
    }

    /// `|⟦τ⟧|`, or an error beyond [`SPACE_CAP`].
    pub fn size(&self, ty: &LType) -> Result<usize> {
        let too_big =
            || Error::CarrierTooLarge(format!("⟦{ty}⟧ has more than {SPACE_CAP} elements"));
        let n = match ty {
            LType::Base(b) => self.carrier(b)?.len(),
            LType::Unit => 1,
            LType::Prod(a, b) => self
                .size(a)?
                .checked_mul(self.size(b)?)
                .ok_or_else(too_big)?,
            LType::Arrow(a, b) => {
                let (d, c) = (self.size(a)?, self.size(b)?);
                u32::try_from(d)
                    .ok()
                    .and_then(|d| c.checked_pow(d))
                    .ok_or_else(too_big)?
            }
        };
        if n > SPACE_CAP {
            return Err(too_big());
        }
        Ok(n)
    }

    /// `⟦τ⟧` in enumeration order.
    pub fn elements(&self, ty: &LType) -> Result<Vec<SetVal>> {
        self.size(ty)?;
        Ok(match ty {
            LType::Base(b) => (0..self.carrier(b)?.len() as u16)
                .map(SetVal::Base)
                .collect(),
            LType::Unit => vec![SetVal::Unit],
            LType::Prod(a, b) => {
                let (xs, ys) = (self.elements(a)?, self.elements(b)?);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for x in &xs {
                    for y in &ys {
                        out.push(SetVal::pair(x.clone(), y.clone()));
                    }
                }
                out
            }
            LType::Arrow(a, b) => {
                let d = self.size(a)?;
                let cs = self.elements(b)?;
                let total = self.size(ty)?;
                // Mixed radix, first argument most significant.
                (0..total)
                    .map(|mut k| {
                        let mut row = vec![SetVal::Unit; d];
                        for slot in row.iter_mut().rev() {
                            *slot = cs[k % cs.len()].clone();
                            k /= cs.len();
                        }
                        SetVal::Fun(row.into())
                    })
                    .collect()
            }
        })
    }

    /// Position of `v` in [`Self::elements`].
    pub fn index_of(&self, ty: &LType, v: &SetVal) -> Result<usize> {
        match (ty, v) {
            (LType::Base(b), SetVal::Base(i)) if (*i as usize) < self.carrier(b)?.len() => {
                Ok(*i as usize)
            }
            (LType::Unit, SetVal::Unit) => Ok(0),
            (LType::Prod(a, b), SetVal::Pair(x, y)) => {
                Ok(self.index_of(a, x)? * self.size(b)? + self.index_of(b, y)?)
            }
            (LType::Arrow(a, b), SetVal::Fun(row)) if row.len() == self.size(a)? => {
                let n = self.size(b)?;
                row.iter()
                    .try_fold(0usize, |acc, y| Ok(acc * n + self.index_of(b, y)?))
            }
            _ => Err(Error::Type(format!("value {v:?} is not in ⟦{ty}⟧"))),
        }
    }

    pub fn well_formed(&self, ty: &LType, v: &SetVal) -> Result<bool> {
        Ok(match (ty, v) {
            (LType::Base(b), SetVal::Base(i)) => (*i as usize) < self.carrier(b)?.len(),
            (LType::Unit, SetVal::Unit) => true,
            (LType::Prod(a, b), SetVal::Pair(x, y)) => {
                self.well_formed(a, x)? && self.well_formed(b, y)?
            }
            (LType::Arrow(a, b), SetVal::Fun(row)) => {
                row.len() == self.size(a)?
                    && row
                        .iter()
                        .try_fold(true, |ok, y| Ok::<_, Error>(ok && self.well_formed(b, y)?))?
            }
            _ => false,
        })
    }

    /// `f(a)` for `f ∈ ⟦dom → _⟧`.
    pub fn apply(&self, dom: &LType, f: &SetVal, a: &SetVal) -> Result<SetVal> {
        match f {
            SetVal::Fun(row) => Ok(row[self.index_of(dom, a)?].clone()),
            _ => Err(Error::Type("application of a non-function".into())),
        }
    }

    /// The type of `m` in the context `ctx_var : ctx_ty`.
    pub fn typecheck(&self, m: &LTerm, ctx_var: &str, ctx_ty: &LType) -> Result<LType> {
        let mut env = vec![(ctx_var.to_string(), ctx_ty.clone())];
        self.infer(m, &mut env)
    }

    pub(crate) fn infer(&self, m: &LTerm, env: &mut Vec<(String, LType)>) -> Result<LType> {
        match m {
            LTerm::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| Error::Unbound(x.clone())),
            LTerm::Const(c) => Ok(self.constant(c)?.0.clone()),
            LTerm::UnitVal => Ok(LType::Unit),
            LTerm::Pair(a, b) => Ok(LType::prod(self.infer(a, env)?, self.infer(b, env)?)),
            LTerm::Proj1(p) | LTerm::Proj2(p) => match self.infer(p, env)? {
                LType::Prod(a, b) => Ok(if matches!(m, LTerm::Proj1(_)) { *a } else { *b }),
                t => Err(Error::Type(format!("projection from {t} in {m}"))),
            },
            LTerm::Lam(y, ty, body) => {
                self.check_type(ty)?;
                env.push((y.clone(), ty.clone()));
                let r = self.infer(body, env);
                env.pop();
                Ok(LType::arrow(ty.clone(), r?))
            }
            LTerm::App(f, a) => {
                let ft = self.infer(f, env)?;
                let at = self.infer(a, env)?;
                match ft {
                    LType::Arrow(d, c) if *d == at => Ok(*c),
                    LType::Arrow(d, _) => Err(Error::Type(format!(
                        "argument of type {at} where {d} is expected in {m}"
                    ))),
                    t => Err(Error::Type(format!("application of {t} in {m}"))),
                }
            }
        }
    }

    fn check_type(&self, ty: &LType) -> Result<()> {
        match ty {
            LType::Base(b) => self.carrier(b).map(|_| ()),
            LType::Unit => Ok(()),
            LType::Prod(a, b) | LType::Arrow(a, b) => {
                self.check_type(a)?;
                self.check_type(b)
            }
        }
    }

    /// `⟦ctx_var : ctx_ty ⊢ m⟧(v)`.
    pub fn eval(&self, m: &LTerm, ctx_var: &str, ctx_ty: &LType, v: &SetVal) -> Result<SetVal> {
        let mut env = vec![(ctx_var.to_string(), ctx_ty.clone(), v.clone())];
        Ok(self.eval_in(m, &mut env)?.1)
    }

    fn eval_in(
        &self,
        m: &LTerm,
        env: &mut Vec<(String, LType, SetVal)>,
    ) -> Result<(LType, SetVal)> {
        match m {
            LTerm::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _, _)| y == x)
                .map(|(_, t, v)| (t.clone(), v.clone()))
                .ok_or_else(|| Error::Unbound(x.clone())),
            LTerm::Const(c) => Ok(self.constant(c)?.clone()),
            LTerm::UnitVal => Ok((LType::Unit, SetVal::Unit)),
            LTerm::Pair(a, b) => {
                let (ta, va) = self.eval_in(a, env)?;
                let (tb, vb) = self.eval_in(b, env)?;
                Ok((LType::prod(ta, tb), SetVal::pair(va, vb)))
            }
            LTerm::Proj1(p) | LTerm::Proj2(p) => match self.eval_in(p, env)? {
                (LType::Prod(a, b), SetVal::Pair(x, y)) => Ok(if matches!(m, LTerm::Proj1(_)) {
                    (*a, *x)
                } else {
                    (*b, *y)
                }),
                _ => Err(Error::Type(format!("projection from a non-pair in {m}"))),
            },
            LTerm::Lam(y, ty, body) => {
                let mut row = Vec::new();
                let mut cod = None;
                for v in self.elements(ty)? {
                    env.push((y.clone(), ty.clone(), v));
                    let r = self.eval_in(body, env);
                    env.pop();
                    let (t, out) = r?;
                    cod = Some(t);
                    row.push(out);
                }
                let cod = match cod {
                    Some(t) => t,
                    None => self.infer(body, &mut type_env(env, y, ty))?,
                };
                Ok((LType::arrow(ty.clone(), cod), SetVal::Fun(row.into())))
            }
            LTerm::App(f, a) => {
                let (ft, fv) = self.eval_in(f, env)?;
                let (_, av) = self.eval_in(a, env)?;
                match ft {
                    LType::Arrow(d, c) => Ok((*c, self.apply(&d, &fv, &av)?)),
                    t => Err(Error::Type(format!("application of {t} in {m}"))),
                }
            }
        }
    }

    pub fn value_to_json(&self, ty: &LType, v: &SetVal) -> Result<Value> {
        Ok(match (ty, v) {
            (LType::Base(b), SetVal::Base(i)) => json!(self.carrier(b)?[*i as usize]),
            (LType::Unit, SetVal::Unit) => Value::Null,
            (LType::Prod(a, b), SetVal::Pair(x, y)) => {
                json!([self.value_to_json(a, x)?, self.value_to_json(b, y)?])
            }
            (LType::Arrow(_, b), SetVal::Fun(row)) => Value::Array(
                row.iter()
                    .map(|y| self.value_to_json(b, y))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(Error::Type(format!("value {v:?} is not in ⟦{ty}⟧"))),
        })
    }

    pub fn value_from_json(&self, ty: &LType, v: &Value) -> Result<SetVal> {
        let bad = || Error::Type(format!("`{v}` is not a value of type {ty}"));
        let out = match (ty, v) {
            (LType::Base(b), Value::Number(n)) => {
                let k = n.as_i64().ok_or_else(bad)?;
                let pos = self
                    .carrier(b)?
                    .iter()
                    .position(|x| *x == k)
                    .ok_or_else(bad)?;
                SetVal::Base(pos as u16)
            }
            (LType::Unit, Value::Null) => SetVal::Unit,
            (LType::Prod(a, b), Value::Array(xs)) if xs.len() == 2 => SetVal::pair(
                self.value_from_json(a, &xs[0])?,
                self.value_from_json(b, &xs[1])?,
            ),
            (LType::Arrow(a, b), Value::Array(xs)) if xs.len() == self.size(a)? => SetVal::Fun(
                xs.iter()
                    .map(|x| self.value_from_json(b, x))
                    .collect::<Result<Vec<_>>>()?
                    .into(),
            ),
            _ => return Err(bad()),
        };
        Ok(out)
    }

    /// Reads `{"cap": n, "base": {name: [values]}, "constants": {name:
    /// {"type": sexp, "value": json}}}`. Function values are arrays indexed
    /// by the enumeration order of the domain.
    pub fn from_json(v: &Value) -> Result<Signature> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Invalid("signature must be a JSON object".into()))?;
        for k in obj.keys() {
            if !["cap", "base", "constants"].contains(&k.as_str()) {
                return Err(Error::Invalid(format!("unknown signature key `{k}`")));
            }
        }
        let cap = match obj.get("cap") {
            Some(c) => c
                .as_u64()
                .ok_or_else(|| Error::Invalid("cap must be a positive integer".into()))?
                as usize,
            None => DEFAULT_BASE_CAP,
        };
        let mut sig = Signature::new(cap);
        let base = obj
            .get("base")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Invalid("signature needs a `base` object".into()))?;
        for (name, vals) in base {
            let vals = vals
                .as_array()
                .and_then(|xs| xs.iter().map(Value::as_i64).collect::<Option<Vec<_>>>())
                .ok_or_else(|| Error::Invalid(format!("base type {name} needs integer values")))?;
            sig.add_base(name, vals)?;
        }
        if let Some(cs) = obj.get("constants") {
            let cs = cs
                .as_object()
                .ok_or_else(|| Error::Invalid("`constants` must be an object".into()))?;
            for (name, c) in cs {
                let ty = c
                    .get("type")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Invalid(format!("constant {name} needs a type")))?;
                let ty = LType::parse(ty)?;
                let val = c
                    .get("value")
                    .ok_or_else(|| Error::Invalid(format!("constant {name} needs a value")))?;
                let val = sig.value_from_json(&ty, val)?;
                sig.add_constant(name, ty, val)?;
            }
        }
        Ok(sig)
    }

    pub fn to_json(&self) -> Result<Value> {
        let mut cs = serde_json::Map::new();
        for (name, (ty, v)) in &self.constants {
            cs.insert(
                name.clone(),
                json!({"type": ty.to_string(), "value": self.value_to_json(ty, v)?}),
            );
        }
        Ok(json!({"cap": self.cap, "base": self.base, "constants": cs}))
    }

    /// `nat = {0..n-1}` and `bool = {0, 1}` with arithmetic capped at
    /// `n - 1`: `zero`, `one`, `succ`, `pred`, `double`, `add`, `max`,
    /// `iszero`, `not`, `choose` and the higher-order `twice`.
    pub fn standard(n: usize) -> Result<Signature> {
        let mut sig = Signature::new(n.max(2));
        sig.add_base("nat", (0..n as i64).collect())?;
        sig.add_base("bool", vec![0, 1])?;
        let nat = LType::base("nat");
        let boolean = LType::base("bool");
        let top = n as u16 - 1;
        let un = |f: &dyn Fn(u16) -> u16| {
            SetVal::Fun(
                (0..n as u16)
                    .map(|i| SetVal::Base(f(i)))
                    .collect::<Vec<_>>()
                    .into(),
            )
        };
        let bin = |f: &dyn Fn(u16, u16) -> u16| {
            SetVal::Fun(
                (0..n as u16)
                    .map(|i| {
                        SetVal::Fun(
                            (0..n as u16)
                                .map(|j| SetVal::Base(f(i, j)))
                                .collect::<Vec<_>>()
                                .into(),
                        )
                    })
                    .collect::<Vec<_>>()
                    .into(),
            )
        };
        let nn = LType::arrow(nat.clone(), nat.clone());
        let nnn = LType::arrow(nat.clone(), nn.clone());
        sig.add_constant("zero", nat.clone(), SetVal::Base(0))?;
        sig.add_constant("one", nat.clone(), SetVal::Base(1.min(top)))?;
        sig.add_constant("succ", nn.clone(), un(&|i| (i + 1).min(top)))?;
        sig.add_constant("pred", nn.clone(), un(&|i| i.saturating_sub(1)))?;
        sig.add_constant("double", nn.clone(), un(&|i| (2 * i).min(top)))?;
        sig.add_constant("add", nnn.clone(), bin(&|i, j| (i + j).min(top)))?;
        sig.add_constant("max", nnn, bin(&|i, j| i.max(j)))?;
        sig.add_constant(
            "iszero",
            LType::arrow(nat.clone(), boolean.clone()),
            un(&|i| u16::from(i == 0)),
        )?;
        sig.add_constant(
            "not",
            LType::arrow(boolean.clone(), boolean.clone()),
            SetVal::Fun(vec![SetVal::Base(1), SetVal::Base(0)].into()),
        )?;
        // choose b m n = if b then m else n
        let choose = SetVal::Fun(
            (0..2u16)
                .map(|b| {
                    SetVal::Fun(
                        (0..n as u16)
                            .map(|i| {
                                SetVal::Fun(
                                    (0..n as u16)
                                        .map(|j| SetVal::Base(if b == 1 { i } else { j }))
                                        .collect::<Vec<_>>()
                                        .into(),
                                )
                            })
                            .collect::<Vec<_>>()
                            .into(),
                    )
                })
                .collect::<Vec<_>>()
                .into(),
        );
        sig.add_constant("choose", LType::arrow(boolean, nnn_of(&nat)), choose)?;
        // twice f m = f (f m), tabulated over every f : nat → nat.
        let fs = sig.elements(&nn)?;
        let twice = SetVal::Fun(
            fs.iter()
                .map(|f| {
                    let SetVal::Fun(row) = f else { unreachable!() };
                    SetVal::Fun(
                        (0..n)
                            .map(|i| {
                                let SetVal::Base(j) = row[i] else {
                                    unreachable!()
                                };
                                row[j as usize].clone()
                            })
                            .collect::<Vec<_>>()
                            .into(),
                    )
                })
                .collect::<Vec<_>>()
                .into(),
        );
        sig.add_constant("twice", LType::arrow(nn.clone(), nn), twice)?;
        Ok(sig)
    }
}

fn nnn_of(nat: &LType) -> LType {
    LType::arrow(nat.clone(), LType::arrow(nat.clone(), nat.clone()))
}

fn type_env(env: &[(String, LType, SetVal)], y: &str, ty: &LType) -> Vec<(String, LType)> {
    let mut out: Vec<(String, LType)> =
        env.iter().map(|(x, t, _)| (x.clone(), t.clone())).collect();
    out.push((y.to_string(), ty.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> LType {
        LType::base("nat")
    }

    #[test]
    fn enumeration_and_indexing_agree() {
        let sig = Signature::standard(3).unwrap();
        for ty in [
            nat(),
            LType::Unit,
            LType::prod(nat(), LType::base("bool")),
            LType::arrow(nat(), nat()),
            LType::arrow(LType::base("bool"), LType::prod(nat(), nat())),
        ] {
            let xs = sig.elements(&ty).unwrap();
            assert_eq!(xs.len(), sig.size(&ty).unwrap());
            for (i, x) in xs.iter().enumerate() {
                assert_eq!(sig.index_of(&ty, x).unwrap(), i, "{ty}");
                assert!(sig.well_formed(&ty, x).unwrap());
            }
        }
        assert!(sig
            .elements(&LType::arrow(
                LType::arrow(nat(), nat()),
                LType::arrow(nat(), nat())
            ))
            .is_err());
    }

    #[test]
    fn typing_examples() {
        let sig = Signature::standard(4).unwrap();
        let ty = |s: &str| sig.typecheck(&LTerm::parse(s, "x").unwrap(), "x", &nat());
        assert_eq!(ty("x").unwrap(), nat());
        assert_eq!(ty("(pair x x)").unwrap(), LType::prod(nat(), nat()));
        assert_eq!(ty("(app succ x)").unwrap(), nat());
        assert!(matches!(ty("(app x x)"), Err(Error::Type(_))));
        assert!(matches!(ty("(app nope x)"), Err(Error::Type(_))));
        assert!(matches!(
            ty("(fst y)"),
            Err(Error::Type(_)) | Err(Error::Unbound(_))
        ));
    }

    #[test]
    fn evaluation_examples() {
        let sig = Signature::standard(4).unwrap();
        let ev = |s: &str, v: u16| {
            sig.eval(
                &LTerm::parse(s, "x").unwrap(),
                "x",
                &nat(),
                &SetVal::Base(v),
            )
            .unwrap()
        };
        assert_eq!(ev("x", 2), SetVal::Base(2));
        assert_eq!(ev("(fst (pair x x))", 3), SetVal::Base(3));
        assert_eq!(ev("(app (lam y nat (app succ y)) x)", 1), SetVal::Base(2));
        assert_eq!(ev("(app succ x)", 3), SetVal::Base(3));
        assert_eq!(ev("(app add x x)", 1), SetVal::Base(2));
        assert_eq!(ev("(app twice succ x)", 0), SetVal::Base(2));
        assert_eq!(
            ev("(app twice (lam y nat (app double y)) x)", 1),
            SetVal::Base(3)
        );
        assert_eq!(
            ev("(app choose (app iszero x) one zero)", 0),
            SetVal::Base(1)
        );
    }

    #[test]
    fn json_round_trip() {
        let sig = Signature::standard(4).unwrap();
        let back = Signature::from_json(&sig.to_json().unwrap()).unwrap();
        assert_eq!(back.to_json().unwrap(), sig.to_json().unwrap());
        let bad = json!({"base": {"nat": [0, 1]}, "constants": {"c": {"type": "nat", "value": 5}}});
        assert!(Signature::from_json(&bad).is_err());
        let big = json!({"base": {"nat": [0, 1, 2, 3, 4]}});
        assert!(matches!(
            Signature::from_json(&big),
            Err(Error::CarrierTooLarge(_))
        ));
    }
}
