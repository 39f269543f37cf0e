use serde_json::{json, Value};

use super::ValueDomain;
use crate::lang::ArithOp;
use crate::monads::Universe;
use crate::{Error, Result};

/// An integer interval; `Range(lo, hi)` always has `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Itv {
    Bot,
    Range(i64, i64),
}

/// Intervals over the bounds of the universe. On rings an arithmetic
/// result that wraps around is widened to the full range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    universe: Universe,
}

impl Interval {
    pub fn new(universe: Universe) -> Self {
        Interval { universe }
    }

    fn min(&self) -> i64 {
        self.universe.min_value()
    }

    fn max(&self) -> i64 {
        self.universe.max_value()
    }

    /// Builds `[lo, hi]` clipped to the universe; empty ranges are `Bot`.
    pub fn make(&self, lo: i64, hi: i64) -> Itv {
        let (lo, hi) = (lo.max(self.min()), hi.min(self.max()));
        if lo > hi {
            Itv::Bot
        } else {
            Itv::Range(lo, hi)
        }
    }

    /// Maps an exact integer result range back into the universe.
    fn fit(&self, lo: i128, hi: i128) -> Itv {
        match self.universe {
            Universe::Machine => {
                let clamp = |v: i128| v.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
                Itv::Range(clamp(lo), clamp(hi))
            }
            Universe::Ring(n) => {
                let n = n as i128;
                if hi - lo + 1 >= n {
                    return self.top();
                }
                let (l, h) = (lo.rem_euclid(n), hi.rem_euclid(n));
                if l <= h {
                    Itv::Range(l as i64, h as i64)
                } else {
                    self.top()
                }
            }
        }
    }
}

impl ValueDomain for Interval {
    type Val = Itv;

    fn name(&self) -> &'static str {
        "interval"
    }

    fn universe(&self) -> Universe {
        self.universe
    }

    fn bottom(&self) -> Itv {
        Itv::Bot
    }

    fn top(&self) -> Itv {
        Itv::Range(self.min(), self.max())
    }

    fn leq(&self, a: &Itv, b: &Itv) -> bool {
        match (a, b) {
            (Itv::Bot, _) => true,
            (_, Itv::Bot) => false,
            (Itv::Range(a, b), Itv::Range(c, d)) => c <= a && b <= d,
        }
    }

    fn join(&self, a: &Itv, b: &Itv) -> Itv {
        match (a, b) {
            (Itv::Bot, x) | (x, Itv::Bot) => *x,
            (Itv::Range(a, b), Itv::Range(c, d)) => Itv::Range(*a.min(c), *b.max(d)),
        }
    }

    fn meet(&self, a: &Itv, b: &Itv) -> Itv {
        match (a, b) {
            (Itv::Bot, _) | (_, Itv::Bot) => Itv::Bot,
            (Itv::Range(a, b), Itv::Range(c, d)) => self.make(*a.max(c), *b.min(d)),
        }
    }

    fn widen(&self, a: &Itv, b: &Itv) -> Itv {
        match (a, b) {
            (Itv::Bot, x) | (x, Itv::Bot) => *x,
            (Itv::Range(a, b), Itv::Range(c, d)) => Itv::Range(
                if c < a { self.min() } else { *a },
                if d > b { self.max() } else { *b },
            ),
        }
    }

    fn finite_height(&self) -> bool {
        self.universe.is_finite()
    }

    fn abstract_value(&self, v: i64) -> Itv {
        Itv::Range(v, v)
    }

    fn contains(&self, a: &Itv, v: i64) -> bool {
        matches!(a, Itv::Range(lo, hi) if *lo <= v && v <= *hi)
    }

    fn concretize(&self, a: &Itv, cap: usize) -> Option<Vec<i64>> {
        match a {
            Itv::Bot => Some(Vec::new()),
            Itv::Range(lo, hi) => {
                let width = (*hi as i128) - (*lo as i128) + 1;
                (width <= cap as i128).then(|| (*lo..=*hi).collect())
            }
        }
    }

    fn elements(&self) -> Option<Vec<Itv>> {
        let n = match self.universe {
            Universe::Ring(n) if n <= 64 => n as i64,
            _ => return None,
        };
        let mut out = vec![Itv::Bot];
        for lo in 0..n {
            for hi in lo..n {
                out.push(Itv::Range(lo, hi));
            }
        }
        Some(out)
    }

    fn range(&self, lo: i64, hi: i64) -> Itv {
        self.make(lo, hi)
    }

    fn binop(&self, op: ArithOp, a: &Itv, b: &Itv) -> Itv {
        let (Itv::Range(a, b), Itv::Range(c, d)) = (a, b) else {
            return Itv::Bot;
        };
        let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
        match op {
            ArithOp::Add => self.fit(a + c, b + d),
            ArithOp::Sub => self.fit(a - d, b - c),
            ArithOp::Mul => {
                let corners = [a * c, a * d, b * c, b * d];
                let lo = *corners.iter().min().unwrap();
                let hi = *corners.iter().max().unwrap();
                self.fit(lo, hi)
            }
        }
    }

    fn to_json(&self, v: &Itv) -> Value {
        match v {
            Itv::Bot => json!("bot"),
            Itv::Range(lo, hi) => json!({"lo": lo, "hi": hi}),
        }
    }

    /// Bounds outside the universe are clipped; `"top"` is accepted.
    fn from_json(&self, v: &Value) -> Result<Itv> {
        match v {
            Value::String(s) if s == "bot" => Ok(Itv::Bot),
            Value::String(s) if s == "top" => Ok(self.top()),
            Value::Object(o) => {
                let bound = |key: &str, default: i64| -> Result<i64> {
                    match o.get(key) {
                        None => Ok(default),
                        Some(Value::String(s)) if s == "-inf" || s == "min" => Ok(self.min()),
                        Some(Value::String(s)) if s == "inf" || s == "max" => Ok(self.max()),
                        Some(b) => b
                            .as_i64()
                            .ok_or_else(|| Error::Invalid(format!("bad interval bound {b}"))),
                    }
                };
                let lo = bound("lo", self.min())?;
                let hi = bound("hi", self.max())?;
                if lo > hi {
                    return Err(Error::Invalid(format!("empty interval [{lo}, {hi}]")));
                }
                Ok(self.make(lo, hi))
            }
            _ => Err(Error::Invalid(format!("`{v}` is not an interval"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_and_gamma() {
        let d = Interval::new(Universe::Machine);
        assert_eq!(d.alpha_values(&[]), Itv::Bot);
        assert_eq!(d.alpha_values(&[0, 1]), Itv::Range(0, 1));
        assert_eq!(d.alpha_values(&[2, 5, 3]), Itv::Range(2, 5));
        assert_eq!(d.concretize(&Itv::Bot, 10).unwrap(), Vec::<i64>::new());
        assert_eq!(d.concretize(&Itv::Range(0, 1), 10).unwrap(), vec![0, 1]);
        assert_eq!(d.concretize(&Itv::Range(2, 2), 10).unwrap(), vec![2]);
        assert!(d.concretize(&d.top(), 10).is_none());
    }

    #[test]
    fn affine_map_on_machine_ints() {
        let d = Interval::new(Universe::Machine);
        let x = Itv::Range(0, 1);
        let four_x = d.binop(ArithOp::Mul, &d.literal(4), &x);
        assert_eq!(
            d.binop(ArithOp::Sub, &four_x, &d.literal(2)),
            Itv::Range(-2, 2)
        );
    }

    #[test]
    fn machine_saturation() {
        let d = Interval::new(Universe::Machine);
        let r = d.binop(
            ArithOp::Add,
            &Itv::Range(i64::MAX - 1, i64::MAX),
            &d.literal(5),
        );
        assert_eq!(r, Itv::Range(i64::MAX, i64::MAX));
        let r = d.binop(ArithOp::Mul, &Itv::Range(-3, 2), &Itv::Range(i64::MIN, 0));
        assert_eq!(r, Itv::Range(i64::MIN, i64::MAX));
    }

    #[test]
    fn ring_wrapping() {
        let d = Interval::new(Universe::Ring(8));
        assert_eq!(
            d.binop(ArithOp::Add, &Itv::Range(2, 3), &d.literal(4)),
            Itv::Range(6, 7)
        );
        assert_eq!(
            d.binop(ArithOp::Add, &Itv::Range(6, 7), &d.literal(4)),
            Itv::Range(2, 3)
        );
        // crosses the wrap point
        assert_eq!(
            d.binop(ArithOp::Add, &Itv::Range(6, 7), &d.literal(1)),
            d.top()
        );
        assert_eq!(
            d.binop(ArithOp::Sub, &d.literal(0), &d.literal(6)),
            Itv::Range(2, 2)
        );
    }

    #[test]
    fn widening_jumps_to_bounds() {
        let d = Interval::new(Universe::Machine);
        assert_eq!(
            d.widen(&Itv::Range(0, 0), &Itv::Range(0, 1)),
            Itv::Range(0, i64::MAX)
        );
        assert_eq!(
            d.widen(&Itv::Range(0, 5), &Itv::Range(-1, 3)),
            Itv::Range(i64::MIN, 5)
        );
        assert_eq!(
            d.widen(&Itv::Range(0, 5), &Itv::Range(1, 3)),
            Itv::Range(0, 5)
        );
    }

    #[test]
    fn ring_json_clips() {
        let d = Interval::new(Universe::Ring(4));
        assert_eq!(
            d.from_json(&json!({"lo": -5, "hi": 10})).unwrap(),
            Itv::Range(0, 3)
        );
        assert_eq!(d.from_json(&json!("bot")).unwrap(), Itv::Bot);
        assert_eq!(d.elements().unwrap().len(), 11);
    }
}
