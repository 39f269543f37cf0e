use std::sync::Arc;

use serde_json::Value;

use super::AbstractDomain;
use crate::lang::{AExpr, BExpr};
use crate::monads::{Memory, Universe};
use crate::{Error, Result};

/// Cartesian product of two domains over the same variables, with
/// `γ(u, v) = γ₁(u) ∧ γ₂(v)`. No reduction is performed beyond sending a
/// pair with a bottom component to `(⊥, ⊥)`.
#[derive(Debug, Clone)]
pub struct Product<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: AbstractDomain, B: AbstractDomain> Product<A, B> {
    pub fn new(first: A, second: B) -> Result<Self> {
        if first.vars() != second.vars() || first.universe() != second.universe() {
            return Err(Error::CarrierMismatch(
                "product components abstract different memories".into(),
            ));
        }
        Ok(Product { first, second })
    }

    fn canon(&self, a: A::Elem, b: B::Elem) -> (A::Elem, B::Elem) {
        if self.first.is_bottom(&a) || self.second.is_bottom(&b) {
            (self.first.bottom(), self.second.bottom())
        } else {
            (a, b)
        }
    }
}

impl<A: AbstractDomain, B: AbstractDomain> AbstractDomain for Product<A, B> {
    type Elem = (A::Elem, B::Elem);

    fn name(&self) -> String {
        format!("product:{}+{}", self.first.name(), self.second.name())
    }

    fn vars(&self) -> &Arc<[String]> {
        self.first.vars()
    }

    fn universe(&self) -> Universe {
        self.first.universe()
    }

    fn bottom(&self) -> Self::Elem {
        (self.first.bottom(), self.second.bottom())
    }

    fn top(&self) -> Self::Elem {
        self.canon(self.first.top(), self.second.top())
    }

    fn is_bottom(&self, a: &Self::Elem) -> bool {
        self.first.is_bottom(&a.0) || self.second.is_bottom(&a.1)
    }

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_bottom(a) || (self.first.leq(&a.0, &b.0) && self.second.leq(&a.1, &b.1))
    }

    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.is_bottom(a) {
            return b.clone();
        }
        if self.is_bottom(b) {
            return a.clone();
        }
        self.canon(self.first.join(&a.0, &b.0), self.second.join(&a.1, &b.1))
    }

    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.canon(self.first.meet(&a.0, &b.0), self.second.meet(&a.1, &b.1))
    }

    fn widen(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.is_bottom(a) {
            return b.clone();
        }
        if self.is_bottom(b) {
            return a.clone();
        }
        self.canon(self.first.widen(&a.0, &b.0), self.second.widen(&a.1, &b.1))
    }

    fn finite_height(&self) -> bool {
        self.first.finite_height() && self.second.finite_height()
    }

    fn elements(&self) -> Option<Vec<Self::Elem>> {
        let xs = self.first.elements()?;
        let ys = self.second.elements()?;
        if xs.len().checked_mul(ys.len())? > super::nonrel::ELEMENTS_CAP {
            return None;
        }
        let mut out = vec![self.bottom()];
        for x in xs.iter().filter(|x| !self.first.is_bottom(x)) {
            for y in ys.iter().filter(|y| !self.second.is_bottom(y)) {
                out.push((x.clone(), y.clone()));
            }
        }
        Some(out)
    }

    fn abstract_memory(&self, m: &Memory) -> Self::Elem {
        self.canon(
            self.first.abstract_memory(m),
            self.second.abstract_memory(m),
        )
    }

    fn contains(&self, a: &Self::Elem, m: &Memory) -> bool {
        self.first.contains(&a.0, m) && self.second.contains(&a.1, m)
    }

    fn concretize(&self, a: &Self::Elem, cap: usize) -> Option<Vec<Memory>> {
        if let Some(ms) = self.first.concretize(&a.0, cap) {
            return Some(
                ms.into_iter()
                    .filter(|m| self.second.contains(&a.1, m))
                    .collect(),
            );
        }
        let ms = self.second.concretize(&a.1, cap)?;
        Some(
            ms.into_iter()
                .filter(|m| self.first.contains(&a.0, m))
                .collect(),
        )
    }

    fn assign(&self, x: &str, e: &AExpr, a: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.canon(
            self.first.assign(x, e, &a.0)?,
            self.second.assign(x, e, &a.1)?,
        ))
    }

    fn havoc(&self, x: &str, lo: i64, hi: i64, a: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.canon(
            self.first.havoc(x, lo, hi, &a.0)?,
            self.second.havoc(x, lo, hi, &a.1)?,
        ))
    }

    fn guard(&self, b: &BExpr, v: bool) -> Result<Self::Elem> {
        Ok(self.canon(self.first.guard(b, v)?, self.second.guard(b, v)?))
    }

    fn to_json(&self, a: &Self::Elem) -> Value {
        if self.is_bottom(a) {
            return Value::String("bot".into());
        }
        Value::Array(vec![self.first.to_json(&a.0), self.second.to_json(&a.1)])
    }

    fn from_json(&self, v: &Value) -> Result<Self::Elem> {
        match v {
            Value::String(s) if s == "bot" => Ok(self.bottom()),
            Value::String(s) if s == "top" => Ok(self.top()),
            Value::Array(items) if items.len() == 2 => Ok(self.canon(
                self.first.from_json(&items[0])?,
                self.second.from_json(&items[1])?,
            )),
            _ => Err(Error::Invalid(format!("`{v}` is not a product element"))),
        }
    }
}
