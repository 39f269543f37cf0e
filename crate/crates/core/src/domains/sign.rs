use std::sync::Arc;

use serde_json::{json, Value};

use super::ValueDomain;
use crate::lang::ArithOp;
use crate::monads::Universe;
use crate::{Error, Result};

/// A set of signs, as a bit mask over `{NEG, ZERO, POS}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVal(pub u8);

impl SignVal {
    pub const BOT: SignVal = SignVal(0);
    pub const NEG: SignVal = SignVal(1);
    pub const ZERO: SignVal = SignVal(2);
    pub const POS: SignVal = SignVal(4);
    pub const NONNEG: SignVal = SignVal(6);
    pub const TOP: SignVal = SignVal(7);

    const NAMES: [&'static str; 8] = [
        "bot", "neg", "zero", "nonpos", "pos", "nonzero", "nonneg", "top",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self.0 as usize]
    }

    fn bits(self) -> impl Iterator<Item = SignVal> {
        [Self::NEG, Self::ZERO, Self::POS]
            .into_iter()
            .filter(move |b| self.0 & b.0 != 0)
    }
}

/// Signs. On `Ring(n)` values are read in the signed window: `0` is zero,
/// `1..=(n-1)/2` are positive and the rest negative.
#[derive(Debug, Clone)]
pub struct Sign {
    universe: Universe,
    /// Per-operation result masks for single-sign operands, by enumeration
    /// on rings.
    table: Option<Arc<[[[u8; 3]; 3]; 3]>>,
}

impl Sign {
    pub fn new(universe: Universe) -> Self {
        let mut s = Sign {
            universe,
            table: None,
        };
        if let Some(values) = universe.values() {
            let mut t = [[[0u8; 3]; 3]; 3];
            for (oi, op) in [ArithOp::Add, ArithOp::Sub, ArithOp::Mul]
                .into_iter()
                .enumerate()
            {
                for &a in &values {
                    for &b in &values {
                        let r = match op {
                            ArithOp::Add => universe.add(a, b),
                            ArithOp::Sub => universe.sub(a, b),
                            ArithOp::Mul => universe.mul(a, b),
                        };
                        let (sa, sb) = (s.sign_index(a), s.sign_index(b));
                        t[oi][sa][sb] |= s.abstract_value(r).0;
                    }
                }
            }
            s.table = Some(Arc::new(t));
        }
        s
    }

    fn sign_index(&self, v: i64) -> usize {
        match self.abstract_value(v) {
            SignVal::NEG => 0,
            SignVal::ZERO => 1,
            _ => 2,
        }
    }

    fn single(op: ArithOp, a: SignVal, b: SignVal) -> SignVal {
        use SignVal as S;
        match op {
            ArithOp::Add => match (a, b) {
                (S::ZERO, x) | (x, S::ZERO) => x,
                _ if a == b => a,
                _ => S::TOP,
            },
            ArithOp::Sub => {
                let neg_b = match b {
                    S::NEG => S::POS,
                    S::POS => S::NEG,
                    x => x,
                };
                Self::single(ArithOp::Add, a, neg_b)
            }
            ArithOp::Mul => match (a, b) {
                (S::ZERO, _) | (_, S::ZERO) => S::ZERO,
                _ if a == b => S::POS,
                _ => S::NEG,
            },
        }
    }

    /// Signs that actually occur in the universe.
    fn realizable(&self) -> SignVal {
        match self.universe {
            Universe::Machine => SignVal::TOP,
            Universe::Ring(n) => {
                let n = n as i64;
                let mut m = SignVal::ZERO.0;
                if n > 1 {
                    m |= SignVal::NEG.0;
                }
                if (n - 1) / 2 >= 1 {
                    m |= SignVal::POS.0;
                }
                SignVal(m)
            }
        }
    }

    fn values_of(&self, s: SignVal) -> Option<Vec<i64>> {
        self.universe
            .values()
            .map(|vs| vs.into_iter().filter(|v| self.contains(&s, *v)).collect())
    }
}

impl ValueDomain for Sign {
    type Val = SignVal;

    fn name(&self) -> &'static str {
        "sign"
    }

    fn universe(&self) -> Universe {
        self.universe
    }

    fn bottom(&self) -> SignVal {
        SignVal::BOT
    }

    fn top(&self) -> SignVal {
        self.realizable()
    }

    fn leq(&self, a: &SignVal, b: &SignVal) -> bool {
        a.0 & !b.0 == 0
    }

    fn join(&self, a: &SignVal, b: &SignVal) -> SignVal {
        SignVal(a.0 | b.0)
    }

    fn meet(&self, a: &SignVal, b: &SignVal) -> SignVal {
        SignVal(a.0 & b.0)
    }

    fn finite_height(&self) -> bool {
        true
    }

    fn abstract_value(&self, v: i64) -> SignVal {
        match self.universe {
            Universe::Machine => match v.signum() {
                -1 => SignVal::NEG,
                0 => SignVal::ZERO,
                _ => SignVal::POS,
            },
            Universe::Ring(n) => {
                if v == 0 {
                    SignVal::ZERO
                } else if v <= (n as i64 - 1) / 2 {
                    SignVal::POS
                } else {
                    SignVal::NEG
                }
            }
        }
    }

    fn contains(&self, a: &SignVal, v: i64) -> bool {
        self.universe.contains(v) && self.leq(&self.abstract_value(v), a)
    }

    fn concretize(&self, a: &SignVal, cap: usize) -> Option<Vec<i64>> {
        if *a == SignVal::ZERO || *a == SignVal::BOT {
            return Some(if *a == SignVal::ZERO { vec![0] } else { vec![] });
        }
        self.values_of(*a).filter(|vs| vs.len() <= cap)
    }

    fn elements(&self) -> Option<Vec<SignVal>> {
        self.universe.values()?;
        let top = self.top();
        Some(
            (0..8u8)
                .map(SignVal)
                .filter(|s| self.leq(s, &top))
                .collect(),
        )
    }

    fn range(&self, lo: i64, hi: i64) -> SignVal {
        if lo > hi {
            return SignVal::BOT;
        }
        match self.universe {
            Universe::Machine => {
                let mut m = 0;
                if lo < 0 {
                    m |= SignVal::NEG.0;
                }
                if lo <= 0 && 0 <= hi {
                    m |= SignVal::ZERO.0;
                }
                if hi > 0 {
                    m |= SignVal::POS.0;
                }
                SignVal(m)
            }
            Universe::Ring(_) => (lo..=hi).fold(SignVal::BOT, |acc, v| {
                self.join(&acc, &self.abstract_value(v))
            }),
        }
    }

    fn binop(&self, op: ArithOp, a: &SignVal, b: &SignVal) -> SignVal {
        let oi = match op {
            ArithOp::Add => 0,
            ArithOp::Sub => 1,
            ArithOp::Mul => 2,
        };
        let mut out = SignVal::BOT;
        for sa in a.bits() {
            for sb in b.bits() {
                let r = match &self.table {
                    Some(t) => {
                        let idx = |s: SignVal| match s {
                            SignVal::NEG => 0,
                            SignVal::ZERO => 1,
                            _ => 2,
                        };
                        SignVal(t[oi][idx(sa)][idx(sb)])
                    }
                    None => Self::single(op, sa, sb),
                };
                out = self.join(&out, &r);
            }
        }
        out
    }

    fn to_json(&self, v: &SignVal) -> Value {
        json!(v.name())
    }

    fn from_json(&self, v: &Value) -> Result<SignVal> {
        let s = v
            .as_str()
            .ok_or_else(|| Error::Invalid(format!("`{v}` is not a sign")))?;
        let i = SignVal::NAMES
            .iter()
            .position(|n| *n == s)
            .ok_or_else(|| Error::Invalid(format!("unknown sign `{s}`")))?;
        Ok(self.meet(&SignVal(i as u8), &self.top()))
    }
}
