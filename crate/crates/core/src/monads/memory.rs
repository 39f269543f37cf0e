use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::{Map, Value};
use smallvec::SmallVec;

use super::Universe;
use crate::lang::VarSet;
use crate::{Error, Result};

/// A total map from a sorted variable list to values.
///
/// The variable list is shared, so memories over the same scope compare by
/// their value vectors alone.
#[derive(Clone)]
pub struct Memory {
    names: Arc<[String]>,
    vals: SmallVec<[i64; 4]>,
}

impl Memory {
    pub fn new(names: Arc<[String]>, vals: impl IntoIterator<Item = i64>) -> Self {
        let vals: SmallVec<[i64; 4]> = vals.into_iter().collect();
        debug_assert_eq!(names.len(), vals.len());
        Memory { names, vals }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        let mut pairs: Vec<(&str, i64)> = pairs.into_iter().collect();
        pairs.sort();
        pairs.dedup_by(|a, b| a.0 == b.0);
        let names: Arc<[String]> = pairs.iter().map(|(n, _)| n.to_string()).collect();
        Memory::new(names, pairs.into_iter().map(|(_, v)| v))
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn values(&self) -> &[i64] {
        &self.vals
    }

    pub fn var_set(&self) -> VarSet {
        self.names.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(var)).ok()
    }

    pub fn get(&self, var: &str) -> Result<i64> {
        self.position(var)
            .map(|i| self.vals[i])
            .ok_or_else(|| Error::Unbound(var.to_string()))
    }

    pub fn set(&self, var: &str, v: i64) -> Result<Memory> {
        let i = self
            .position(var)
            .ok_or_else(|| Error::Unbound(var.to_string()))?;
        let mut out = self.clone();
        out.vals[i] = v;
        Ok(out)
    }

    /// Extends the memory with a fresh variable.
    pub fn with_var(&self, var: &str, v: i64) -> Result<Memory> {
        match self.names.binary_search_by(|n| n.as_str().cmp(var)) {
            Ok(_) => Err(Error::Scope {
                var: var.to_string(),
                construct: "addvar".into(),
                reason: "already in scope".into(),
            }),
            Err(i) => {
                let mut names: Vec<String> = self.names.to_vec();
                names.insert(i, var.to_string());
                let mut vals = self.vals.clone();
                vals.insert(i, v);
                Ok(Memory {
                    names: names.into(),
                    vals,
                })
            }
        }
    }

    /// Restricts the memory away from `var`.
    pub fn without_var(&self, var: &str) -> Result<Memory> {
        let i = self.position(var).ok_or_else(|| Error::Scope {
            var: var.to_string(),
            construct: "delvar".into(),
            reason: "not in scope".into(),
        })?;
        let mut names: Vec<String> = self.names.to_vec();
        names.remove(i);
        let mut vals = self.vals.clone();
        vals.remove(i);
        Ok(Memory {
            names: names.into(),
            vals,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (n, v) in self.names.iter().zip(&self.vals) {
            m.insert(n.clone(), Value::from(*v));
        }
        Value::Object(m)
    }

    /// Reads `{"x": 1, ...}`; the keys must be exactly `vars`.
    pub fn from_json(v: &Value, universe: Universe) -> Result<Memory> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Invalid(format!("memory must be a JSON object, got {v}")))?;
        let mut pairs = Vec::with_capacity(obj.len());
        for (k, val) in obj {
            let x = val
                .as_i64()
                .ok_or_else(|| Error::Invalid(format!("value of `{k}` is not an integer")))?;
            if !universe.contains(x) {
                return Err(Error::Invalid(format!(
                    "value {x} of `{k}` lies outside {universe}"
                )));
            }
            pairs.push((k.as_str(), x));
        }
        Ok(Memory::from_pairs(pairs))
    }
}

impl PartialEq for Memory {
    fn eq(&self, other: &Self) -> bool {
        self.vals == other.vals
            && (Arc::ptr_eq(&self.names, &other.names) || self.names == other.names)
    }
}

impl Eq for Memory {}

impl Ord for Memory {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.names, &other.names) {
            return self.vals.cmp(&other.vals);
        }
        self.names
            .cmp(&other.names)
            .then_with(|| self.vals.cmp(&other.vals))
    }
}

impl PartialOrd for Memory {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Memory {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vals.hash(state);
    }
}

impl fmt::Debug for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, v)) in self.names.iter().zip(&self.vals).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}↦{v}")?;
        }
        write!(f, "}}")
    }
}

/// All memories over a variable set in a ring universe, indexed in
/// mixed radix with the first variable most significant. Index order
/// coincides with [`Memory`] order.
#[derive(Debug, Clone, Hash)]
pub struct Carrier {
    names: Arc<[String]>,
    n: u32,
    size: usize,
}

/// Largest carrier we are willing to enumerate.
pub const CARRIER_CAP: usize = 1 << 20;

impl Carrier {
    pub fn new(vars: &VarSet, universe: Universe) -> Result<Self> {
        let n = match universe {
            Universe::Ring(n) => n,
            Universe::Machine => {
                return Err(Error::CarrierTooLarge(
                    "machine integers cannot be enumerated".into(),
                ))
            }
        };
        let mut size: usize = 1;
        for _ in vars {
            size = size
                .checked_mul(n as usize)
                .filter(|s| *s <= CARRIER_CAP)
                .ok_or_else(|| {
                    Error::CarrierTooLarge(format!(
                        "{} variables over {universe} exceed {CARRIER_CAP} memories",
                        vars.len()
                    ))
                })?;
        }
        Ok(Carrier {
            names: vars.iter().cloned().collect(),
            n,
            size,
        })
    }

    pub fn of(vars: &[&str], universe: Universe) -> Result<Self> {
        Carrier::new(&vars.iter().map(|s| s.to_string()).collect(), universe)
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn var_set(&self) -> VarSet {
        self.names.iter().cloned().collect()
    }

    pub fn universe(&self) -> Universe {
        Universe::Ring(self.n)
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn memory(&self, mut index: usize) -> Memory {
        let k = self.names.len();
        let mut vals: SmallVec<[i64; 4]> = SmallVec::from_elem(0, k);
        for slot in vals.iter_mut().rev() {
            *slot = (index % self.n as usize) as i64;
            index /= self.n as usize;
        }
        Memory {
            names: self.names.clone(),
            vals,
        }
    }

    pub fn index_of(&self, m: &Memory) -> Result<usize> {
        if m.names != self.names {
            return Err(Error::CarrierMismatch(format!(
                "memory {m} is not over variables {:?}",
                self.names
            )));
        }
        let mut idx = 0usize;
        for v in &m.vals {
            if *v < 0 || *v >= self.n as i64 {
                return Err(Error::CarrierMismatch(format!(
                    "value {v} outside ring{}",
                    self.n
                )));
            }
            idx = idx * self.n as usize + *v as usize;
        }
        Ok(idx)
    }

    pub fn memories(&self) -> impl Iterator<Item = Memory> + '_ {
        (0..self.size).map(|i| self.memory(i))
    }

    pub fn same_as(&self, other: &Carrier) -> bool {
        self.n == other.n && self.names == other.names
    }
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Carrier {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_set_scope() {
        let m = Memory::from_pairs([("y", 5), ("x", 2)]);
        assert_eq!(m.get("x").unwrap(), 2);
        assert_eq!(m.set("y", 1).unwrap().get("y").unwrap(), 1);
        assert!(m.get("z").is_err());
        let m2 = m.with_var("a", 0).unwrap();
        assert_eq!(m2.names().as_ref(), ["a", "x", "y"]);
        assert_eq!(m2.without_var("a").unwrap(), m);
        assert!(m.with_var("x", 0).is_err());
    }

    #[test]
    fn carrier_indexing_is_a_bijection() {
        let c = Carrier::of(&["x", "y"], Universe::Ring(3)).unwrap();
        assert_eq!(c.len(), 9);
        let mems: Vec<Memory> = c.memories().collect();
        for (i, m) in mems.iter().enumerate() {
            assert_eq!(c.index_of(m).unwrap(), i);
        }
        assert!(mems.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn json_roundtrip() {
        let m = Memory::from_pairs([("x", 1), ("y", 3)]);
        assert_eq!(
            Memory::from_json(&m.to_json(), Universe::Ring(4)).unwrap(),
            m
        );
        assert!(Memory::from_json(&m.to_json(), Universe::Ring(2)).is_err());
    }

    #[test]
    fn machine_carrier_refused() {
        assert!(Carrier::of(&["x"], Universe::Machine).is_err());
    }
}
