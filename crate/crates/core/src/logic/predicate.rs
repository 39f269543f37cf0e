use std::collections::BTreeSet;
use std::fmt;

use serde_json::{Map, Value};

use super::truth::{Truth, TruthLattice};
use crate::monads::{Carrier, Memory};
use crate::{Error, Result};

/// An Ω-valued predicate on a finite carrier, ordered pointwise.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    pub lattice: TruthLattice,
    pub carrier: Carrier,
    pub values: Vec<Truth>,
}

impl Predicate {
    pub fn new(lattice: TruthLattice, carrier: Carrier, values: Vec<Truth>) -> Result<Self> {
        if values.len() != carrier.len() {
            return Err(Error::CarrierMismatch(format!(
                "{} truth values for a carrier of {} memories",
                values.len(),
                carrier.len()
            )));
        }
        if let Some(t) = values.iter().find(|t| !lattice.contains(**t)) {
            return Err(Error::Invalid(format!("{t} is not in {lattice}")));
        }
        Ok(Predicate {
            lattice,
            carrier,
            values,
        })
    }

    pub fn constant(lattice: TruthLattice, carrier: &Carrier, t: Truth) -> Self {
        Predicate {
            lattice,
            carrier: carrier.clone(),
            values: vec![t; carrier.len()],
        }
    }

    pub fn top(lattice: TruthLattice, carrier: &Carrier) -> Self {
        Self::constant(lattice, carrier, lattice.top())
    }

    pub fn bottom(lattice: TruthLattice, carrier: &Carrier) -> Self {
        Self::constant(lattice, carrier, lattice.bottom())
    }

    /// The two-valued predicate that is `⊤` exactly on `indices`.
    pub fn from_indices(lattice: TruthLattice, carrier: &Carrier, indices: &[usize]) -> Self {
        let mut p = Self::bottom(lattice, carrier);
        for &i in indices {
            p.values[i] = lattice.top();
        }
        p
    }

    pub fn from_memories(
        lattice: TruthLattice,
        carrier: &Carrier,
        mems: impl IntoIterator<Item = Memory>,
    ) -> Result<Self> {
        let idx = mems
            .into_iter()
            .map(|m| carrier.index_of(&m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_indices(lattice, carrier, &idx))
    }

    /// Predicate number `bits` in the enumeration of two-valued predicates.
    pub fn from_bits(lattice: TruthLattice, carrier: &Carrier, bits: u64) -> Self {
        let idx: Vec<usize> = (0..carrier.len()).filter(|i| bits >> i & 1 == 1).collect();
        Self::from_indices(lattice, carrier, &idx)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Truth {
        self.values[i]
    }

    pub fn at(&self, m: &Memory) -> Result<Truth> {
        Ok(self.values[self.carrier.index_of(m)?])
    }

    /// Indices where the predicate is not `⊥`.
    pub fn support(&self) -> Vec<usize> {
        let bot = self.lattice.bottom();
        (0..self.len()).filter(|i| self.values[*i] != bot).collect()
    }

    /// Memories on which a two-valued predicate holds.
    pub fn holds_on(&self) -> BTreeSet<Memory> {
        let top = self.lattice.top();
        (0..self.len())
            .filter(|i| self.values[*i] == top)
            .map(|i| self.carrier.memory(i))
            .collect()
    }

    fn check_compatible(&self, other: &Predicate) -> Result<()> {
        if self.lattice != other.lattice || !self.carrier.same_as(&other.carrier) {
            return Err(Error::CarrierMismatch(format!(
                "predicates over {} / {} and {} / {} memories",
                self.lattice,
                self.carrier.len(),
                other.lattice,
                other.carrier.len()
            )));
        }
        Ok(())
    }

    pub fn leq(&self, other: &Predicate) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| self.lattice.leq(*a, *b)))
    }

    pub fn meet(&self, other: &Predicate) -> Result<Predicate> {
        self.zip_with(other, |l, a, b| l.meet(a, b))
    }

    pub fn join(&self, other: &Predicate) -> Result<Predicate> {
        self.zip_with(other, |l, a, b| l.join(a, b))
    }

    fn zip_with(
        &self,
        other: &Predicate,
        op: impl Fn(TruthLattice, Truth, Truth) -> Truth,
    ) -> Result<Predicate> {
        self.check_compatible(other)?;
        Ok(Predicate {
            lattice: self.lattice,
            carrier: self.carrier.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(self.lattice, *a, *b))
                .collect(),
        })
    }

    /// `{"x=1,y=0": value, ...}`, listing only entries above `⊥`.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for i in self.support() {
            m.insert(
                memory_key(&self.carrier.memory(i)),
                self.lattice.to_json(self.values[i]),
            );
        }
        Value::Object(m)
    }

    /// Accepts either a list of memories (two-valued predicate) or a map
    /// from memory keys to truth values; missing memories are `⊥`.
    pub fn from_json(lattice: TruthLattice, carrier: &Carrier, v: &Value) -> Result<Predicate> {
        match v {
            Value::Array(items) => {
                let mems = items
                    .iter()
                    .map(|item| Memory::from_json(item, carrier.universe()))
                    .collect::<Result<Vec<_>>>()?;
                Predicate::from_memories(lattice, carrier, mems)
            }
            Value::Object(map) => {
                let mut p = Predicate::bottom(lattice, carrier);
                for (k, t) in map {
                    let m = parse_memory_key(k, carrier)?;
                    p.values[carrier.index_of(&m)?] = lattice.from_json(t)?;
                }
                Ok(p)
            }
            _ => Err(Error::Invalid(
                "predicate must be a list of memories or a map of memory keys".into(),
            )),
        }
    }
}

/// Canonical textual key of a memory, `x=1,y=0`.
pub fn memory_key(m: &Memory) -> String {
    m.names()
        .iter()
        .zip(m.values())
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_memory_key(key: &str, carrier: &Carrier) -> Result<Memory> {
    let mut pairs = Vec::new();
    for part in key.split(',').filter(|s| !s.trim().is_empty()) {
        let (n, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("bad memory key `{key}`")))?;
        let v: i64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad memory key `{key}`")))?;
        pairs.push((n.trim(), v));
    }
    let m = Memory::from_pairs(pairs);
    carrier.index_of(&m)?;
    Ok(m)
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.support().into_iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            let m = self.carrier.memory(i);
            if self.lattice == TruthLattice::Bool2 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{m}: {}", self.values[i])?;
            }
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monads::Universe;

    #[test]
    fn json_forms() {
        let c = Carrier::of(&["x", "y"], Universe::Ring(3)).unwrap();
        let p = Predicate::from_bits(TruthLattice::Bool2, &c, 0b1000_0101);
        let back = Predicate::from_json(TruthLattice::Bool2, &c, &p.to_json()).unwrap();
        assert_eq!(back, p);
        let list = serde_json::json!([{"x": 0, "y": 0}, {"x": 0, "y": 2}, {"x": 2, "y": 1}]);
        assert_eq!(
            Predicate::from_json(TruthLattice::Bool2, &c, &list).unwrap(),
            p
        );
    }

    #[test]
    fn pointwise_order() {
        let c = Carrier::of(&["x"], Universe::Ring(4)).unwrap();
        let l = TruthLattice::Bool2;
        let a = Predicate::from_bits(l, &c, 0b0001);
        let b = Predicate::from_bits(l, &c, 0b0011);
        assert!(a.leq(&b).unwrap());
        assert!(!b.leq(&a).unwrap());
        assert_eq!(a.join(&b).unwrap(), b);
        assert_eq!(a.meet(&b).unwrap(), a);
    }
}
