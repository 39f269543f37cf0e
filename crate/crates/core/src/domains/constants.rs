use serde_json::{json, Value};

use super::ValueDomain;
use crate::lang::ArithOp;
use crate::monads::Universe;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstVal {
    Bot,
    Const(i64),
    Top,
}

/// The flat lattice of constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constants {
    universe: Universe,
}

impl Constants {
    pub fn new(universe: Universe) -> Self {
        Constants { universe }
    }
}

impl ValueDomain for Constants {
    type Val = ConstVal;

    fn name(&self) -> &'static str {
        "constants"
    }

    fn universe(&self) -> Universe {
        self.universe
    }

    fn bottom(&self) -> ConstVal {
        ConstVal::Bot
    }

    fn top(&self) -> ConstVal {
        match self.universe {
            Universe::Ring(1) => ConstVal::Const(0),
            _ => ConstVal::Top,
        }
    }

    fn leq(&self, a: &ConstVal, b: &ConstVal) -> bool {
        matches!((a, b), (ConstVal::Bot, _) | (_, ConstVal::Top)) || a == b
    }

    fn join(&self, a: &ConstVal, b: &ConstVal) -> ConstVal {
        match (a, b) {
            (ConstVal::Bot, x) | (x, ConstVal::Bot) => *x,
            _ if a == b => *a,
            _ => ConstVal::Top,
        }
    }

    fn meet(&self, a: &ConstVal, b: &ConstVal) -> ConstVal {
        match (a, b) {
            (ConstVal::Top, x) | (x, ConstVal::Top) => *x,
            _ if a == b => *a,
            _ => ConstVal::Bot,
        }
    }

    fn finite_height(&self) -> bool {
        true
    }

    fn abstract_value(&self, v: i64) -> ConstVal {
        ConstVal::Const(v)
    }

    fn contains(&self, a: &ConstVal, v: i64) -> bool {
        match a {
            ConstVal::Bot => false,
            ConstVal::Const(k) => *k == v,
            ConstVal::Top => self.universe.contains(v),
        }
    }

    fn concretize(&self, a: &ConstVal, cap: usize) -> Option<Vec<i64>> {
        match a {
            ConstVal::Bot => Some(Vec::new()),
            ConstVal::Const(k) => Some(vec![*k]),
            ConstVal::Top => self.universe.values().filter(|vs| vs.len() <= cap),
        }
    }

    fn elements(&self) -> Option<Vec<ConstVal>> {
        let vs = self.universe.values()?;
        let mut out = vec![ConstVal::Bot];
        out.extend(vs.into_iter().map(ConstVal::Const));
        if self.top() == ConstVal::Top {
            out.push(ConstVal::Top);
        }
        Some(out)
    }

    fn range(&self, lo: i64, hi: i64) -> ConstVal {
        match (lo, hi) {
            _ if lo > hi => ConstVal::Bot,
            _ if lo == hi => ConstVal::Const(lo),
            _ => ConstVal::Top,
        }
    }

    fn binop(&self, op: ArithOp, a: &ConstVal, b: &ConstVal) -> ConstVal {
        let u = self.universe;
        match (a, b) {
            (ConstVal::Bot, _) | (_, ConstVal::Bot) => ConstVal::Bot,
            (ConstVal::Const(x), ConstVal::Const(y)) => ConstVal::Const(match op {
                ArithOp::Add => u.add(*x, *y),
                ArithOp::Sub => u.sub(*x, *y),
                ArithOp::Mul => u.mul(*x, *y),
            }),
            (ConstVal::Const(0), ConstVal::Top) | (ConstVal::Top, ConstVal::Const(0))
                if op == ArithOp::Mul =>
            {
                ConstVal::Const(0)
            }
            _ => self.top(),
        }
    }

    fn to_json(&self, v: &ConstVal) -> Value {
        match v {
            ConstVal::Bot => json!("bot"),
            ConstVal::Const(k) => json!({ "const": k }),
            ConstVal::Top => json!("top"),
        }
    }

    fn from_json(&self, v: &Value) -> Result<ConstVal> {
        match v {
            Value::String(s) if s == "bot" => Ok(ConstVal::Bot),
            Value::String(s) if s == "top" => Ok(self.top()),
            Value::Object(o) => match o.get("const").and_then(Value::as_i64) {
                Some(k) if self.universe.contains(k) => Ok(ConstVal::Const(k)),
                Some(k) => Err(Error::Invalid(format!(
                    "constant {k} outside {}",
                    self.universe
                ))),
                None => Err(Error::Invalid(format!("`{v}` is not a constant"))),
            },
            _ => Err(Error::Invalid(format!("`{v}` is not a constant"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding() {
        let d = Constants::new(Universe::Machine);
        assert_eq!(
            d.binop(ArithOp::Add, &d.literal(2), &d.literal(3)),
            ConstVal::Const(5)
        );
        assert_eq!(
            d.binop(ArithOp::Add, &ConstVal::Top, &d.literal(3)),
            ConstVal::Top
        );
        assert_eq!(
            d.binop(ArithOp::Mul, &ConstVal::Top, &d.literal(0)),
            ConstVal::Const(0)
        );
        assert_eq!(
            d.binop(ArithOp::Mul, &ConstVal::Bot, &d.literal(0)),
            ConstVal::Bot
        );
    }

    #[test]
    fn flat_order() {
        let d = Constants::new(Universe::Ring(4));
        assert_eq!(d.join(&d.literal(1), &d.literal(2)), ConstVal::Top);
        assert_eq!(d.meet(&d.literal(1), &d.literal(2)), ConstVal::Bot);
        assert_eq!(d.elements().unwrap().len(), 6);
    }
}
