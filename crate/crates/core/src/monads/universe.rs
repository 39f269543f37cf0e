use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Value universe of the while language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Universe {
    /// `{0, .., n-1}` with arithmetic modulo `n`.
    Ring(u32),
    /// Signed 64-bit integers with saturating arithmetic.
    Machine,
}

impl Universe {
    pub fn ring(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("ring size must be positive".into()));
        }
        Ok(Universe::Ring(n))
    }

    /// Maps an integer literal into the universe.
    pub fn embed(self, v: i64) -> i64 {
        match self {
            Universe::Ring(n) => v.rem_euclid(n as i64),
            Universe::Machine => v,
        }
    }

    pub fn add(self, a: i64, b: i64) -> i64 {
        match self {
            Universe::Ring(n) => (a + b).rem_euclid(n as i64),
            Universe::Machine => a.saturating_add(b),
        }
    }

    pub fn sub(self, a: i64, b: i64) -> i64 {
        match self {
            Universe::Ring(n) => (a - b).rem_euclid(n as i64),
            Universe::Machine => a.saturating_sub(b),
        }
    }

    pub fn mul(self, a: i64, b: i64) -> i64 {
        match self {
            Universe::Ring(n) => ((a as i128 * b as i128).rem_euclid(n as i128)) as i64,
            Universe::Machine => a.saturating_mul(b),
        }
    }

    pub fn min_value(self) -> i64 {
        match self {
            Universe::Ring(_) => 0,
            Universe::Machine => i64::MIN,
        }
    }

    pub fn max_value(self) -> i64 {
        match self {
            Universe::Ring(n) => n as i64 - 1,
            Universe::Machine => i64::MAX,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Universe::Ring(_))
    }

    pub fn contains(self, v: i64) -> bool {
        self.min_value() <= v && v <= self.max_value()
    }

    /// All values, for ring universes.
    pub fn values(self) -> Option<Vec<i64>> {
        match self {
            Universe::Ring(n) => Some((0..n as i64).collect()),
            Universe::Machine => None,
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Ring(n) => write!(f, "ring{n}"),
            Universe::Machine => write!(f, "machine"),
        }
    }
}

impl FromStr for Universe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "machine" {
            return Ok(Universe::Machine);
        }
        s.strip_prefix("ring")
            .and_then(|n| n.parse::<u32>().ok())
            .ok_or_else(|| Error::Invalid(format!("unknown value universe `{s}`")))
            .and_then(Universe::ring)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_wraps() {
        let u = Universe::Ring(4);
        assert_eq!(u.add(3, 2), 1);
        assert_eq!(u.sub(0, 2), 2);
        assert_eq!(u.mul(3, 3), 1);
        assert_eq!(u.embed(-2), 2);
    }

    #[test]
    fn machine_saturates() {
        let u = Universe::Machine;
        assert_eq!(u.add(i64::MAX, 1), i64::MAX);
        assert_eq!(u.sub(i64::MIN, 1), i64::MIN);
        assert_eq!(u.mul(i64::MAX, -2), i64::MIN);
    }

    #[test]
    fn parse_names() {
        assert_eq!("ring8".parse::<Universe>().unwrap(), Universe::Ring(8));
        assert_eq!("machine".parse::<Universe>().unwrap(), Universe::Machine);
        assert!("ring0".parse::<Universe>().is_err());
        assert!("ints".parse::<Universe>().is_err());
    }
}
