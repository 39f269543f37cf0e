use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde_json::Value;

use crate::{Error, Result};

/// Element of `[0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtNonNeg {
    Fin(Ratio<i64>),
    Inf,
}

impl Ord for ExtNonNeg {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtNonNeg::Inf, ExtNonNeg::Inf) => Ordering::Equal,
            (ExtNonNeg::Inf, _) => Ordering::Greater,
            (_, ExtNonNeg::Inf) => Ordering::Less,
            (ExtNonNeg::Fin(a), ExtNonNeg::Fin(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ExtNonNeg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl ExtNonNeg {
    pub fn zero() -> Self {
        ExtNonNeg::Fin(Ratio::from_integer(0))
    }

    pub fn fin(n: i64, d: i64) -> Self {
        ExtNonNeg::Fin(Ratio::new(n, d))
    }
}

impl fmt::Display for ExtNonNeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNonNeg::Inf => write!(f, "inf"),
            ExtNonNeg::Fin(r) => write!(f, "{r}"),
        }
    }
}

/// A truth value of one of the shipped lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truth {
    Bool(bool),
    Ext(ExtNonNeg),
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truth::Bool(b) => write!(f, "{b}"),
            Truth::Ext(e) => write!(f, "{e}"),
        }
    }
}

/// The complete lattices of truth values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruthLattice {
    /// `{⊥ ≤ ⊤}`.
    Bool2,
    /// `[0, ∞]` with the numeric order.
    ExtNonNegDown,
    /// `[0, ∞]` with the reversed order.
    ExtNonNegUp,
}

impl TruthLattice {
    pub fn name(self) -> &'static str {
        match self {
            TruthLattice::Bool2 => "bool",
            TruthLattice::ExtNonNegDown => "r-inf-le",
            TruthLattice::ExtNonNegUp => "r-inf-ge",
        }
    }

    pub fn top(self) -> Truth {
        match self {
            TruthLattice::Bool2 => Truth::Bool(true),
            TruthLattice::ExtNonNegDown => Truth::Ext(ExtNonNeg::Inf),
            TruthLattice::ExtNonNegUp => Truth::Ext(ExtNonNeg::zero()),
        }
    }

    pub fn bottom(self) -> Truth {
        match self {
            TruthLattice::Bool2 => Truth::Bool(false),
            TruthLattice::ExtNonNegDown => Truth::Ext(ExtNonNeg::zero()),
            TruthLattice::ExtNonNegUp => Truth::Ext(ExtNonNeg::Inf),
        }
    }

    pub fn from_bool(self, b: bool) -> Truth {
        if b {
            self.top()
        } else {
            self.bottom()
        }
    }

    pub fn contains(self, t: Truth) -> bool {
        matches!(
            (self, t),
            (TruthLattice::Bool2, Truth::Bool(_))
                | (
                    TruthLattice::ExtNonNegDown | TruthLattice::ExtNonNegUp,
                    Truth::Ext(_)
                )
        )
    }

    pub fn leq(self, a: Truth, b: Truth) -> bool {
        match (self, a, b) {
            (TruthLattice::Bool2, Truth::Bool(x), Truth::Bool(y)) => !x || y,
            (TruthLattice::ExtNonNegDown, Truth::Ext(x), Truth::Ext(y)) => x <= y,
            (TruthLattice::ExtNonNegUp, Truth::Ext(x), Truth::Ext(y)) => x >= y,
            _ => panic!("truth value {a} or {b} does not belong to {}", self.name()),
        }
    }

    pub fn meet(self, a: Truth, b: Truth) -> Truth {
        if self.leq(a, b) {
            a
        } else {
            b
        }
    }

    pub fn join(self, a: Truth, b: Truth) -> Truth {
        if self.leq(a, b) {
            b
        } else {
            a
        }
    }

    /// Meet of a finite family; `⊤` for the empty family.
    pub fn meet_all(self, it: impl IntoIterator<Item = Truth>) -> Truth {
        it.into_iter().fold(self.top(), |a, b| self.meet(a, b))
    }

    /// Join of a finite family; `⊥` for the empty family.
    pub fn join_all(self, it: impl IntoIterator<Item = Truth>) -> Truth {
        it.into_iter().fold(self.bottom(), |a, b| self.join(a, b))
    }

    /// A small sample of values used by exhaustive checks: both booleans,
    /// or `{0, 1/2, 1, ∞}`.
    pub fn sample(self) -> Vec<Truth> {
        match self {
            TruthLattice::Bool2 => vec![Truth::Bool(false), Truth::Bool(true)],
            _ => vec![
                Truth::Ext(ExtNonNeg::zero()),
                Truth::Ext(ExtNonNeg::fin(1, 2)),
                Truth::Ext(ExtNonNeg::fin(1, 1)),
                Truth::Ext(ExtNonNeg::Inf),
            ],
        }
    }

    pub fn to_json(self, t: Truth) -> Value {
        match t {
            Truth::Bool(b) => Value::Bool(b),
            Truth::Ext(ExtNonNeg::Inf) => Value::String("inf".into()),
            Truth::Ext(ExtNonNeg::Fin(r)) if r.is_integer() => Value::from(*r.numer()),
            Truth::Ext(ExtNonNeg::Fin(r)) => Value::String(r.to_string()),
        }
    }

    pub fn from_json(self, v: &Value) -> Result<Truth> {
        let bad = || Error::Invalid(format!("`{v}` is not a {} truth value", self.name()));
        match self {
            TruthLattice::Bool2 => v.as_bool().map(Truth::Bool).ok_or_else(bad),
            _ => {
                let e = match v {
                    Value::Number(n) => {
                        let k = n.as_i64().ok_or_else(bad)?;
                        ExtNonNeg::Fin(Ratio::from_integer(k))
                    }
                    Value::String(s) if s == "inf" => ExtNonNeg::Inf,
                    Value::String(s) => {
                        let r = match s.split_once('/') {
                            Some((a, b)) => {
                                let a: i64 = a.trim().parse().map_err(|_| bad())?;
                                let b: i64 = b.trim().parse().map_err(|_| bad())?;
                                if b == 0 {
                                    return Err(bad());
                                }
                                Ratio::new(a, b)
                            }
                            None => Ratio::from_integer(s.trim().parse().map_err(|_| bad())?),
                        };
                        ExtNonNeg::Fin(r)
                    }
                    _ => return Err(bad()),
                };
                if e < ExtNonNeg::zero() {
                    return Err(bad());
                }
                Ok(Truth::Ext(e))
            }
        }
    }
}

impl fmt::Display for TruthLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TruthLattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bool" => Ok(TruthLattice::Bool2),
            "r-inf-le" => Ok(TruthLattice::ExtNonNegDown),
            "r-inf-ge" => Ok(TruthLattice::ExtNonNegUp),
            _ => Err(Error::Invalid(format!("unknown truth lattice `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [TruthLattice; 3] = [
        TruthLattice::Bool2,
        TruthLattice::ExtNonNegDown,
        TruthLattice::ExtNonNegUp,
    ];

    #[test]
    fn lattice_axioms_on_samples() {
        for l in ALL {
            let s = l.sample();
            for &a in &s {
                assert!(l.leq(l.bottom(), a) && l.leq(a, l.top()));
                for &b in &s {
                    let m = l.meet(a, b);
                    let j = l.join(a, b);
                    assert!(l.leq(m, a) && l.leq(m, b));
                    assert!(l.leq(a, j) && l.leq(b, j));
                    for &c in &s {
                        if l.leq(c, a) && l.leq(c, b) {
                            assert!(l.leq(c, m));
                        }
                        assert_eq!(l.meet(a, l.meet(b, c)), l.meet(l.meet(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn empty_meets_and_joins() {
        let down = TruthLattice::ExtNonNegDown;
        assert_eq!(down.meet_all([]), Truth::Ext(ExtNonNeg::Inf));
        assert_eq!(down.join_all([]), Truth::Ext(ExtNonNeg::zero()));
        let up = TruthLattice::ExtNonNegUp;
        assert_eq!(up.meet_all([]), Truth::Ext(ExtNonNeg::zero()));
        assert_eq!(
            up.join_all([
                Truth::Ext(ExtNonNeg::fin(1, 2)),
                Truth::Ext(ExtNonNeg::fin(1, 1))
            ]),
            Truth::Ext(ExtNonNeg::fin(1, 2))
        );
    }

    #[test]
    fn json_values() {
        let l = TruthLattice::ExtNonNegDown;
        for t in l.sample() {
            assert_eq!(l.from_json(&l.to_json(t)).unwrap(), t);
        }
        assert!(l.from_json(&Value::from(-1)).is_err());
        assert!(TruthLattice::Bool2.from_json(&Value::from(1)).is_err());
    }
}
