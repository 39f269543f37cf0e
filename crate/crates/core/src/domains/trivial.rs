use std::sync::Arc;

use serde_json::Value;

use super::AbstractDomain;
use crate::lang::{AExpr, BExpr, VarSet};
use crate::monads::{Carrier, Memory, Universe};
use crate::Result;

/// The one-point domain, concretized as every memory. It is the unit of
/// [`super::Product`].
#[derive(Debug, Clone)]
pub struct Trivial {
    vars: Arc<[String]>,
    universe: Universe,
}

impl Trivial {
    pub fn new(vars: &VarSet, universe: Universe) -> Self {
        Trivial {
            vars: vars.iter().cloned().collect(),
            universe,
        }
    }
}

impl AbstractDomain for Trivial {
    type Elem = ();

    fn name(&self) -> String {
        "trivial".into()
    }

    fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    fn universe(&self) -> Universe {
        self.universe
    }

    fn bottom(&self) {}

    fn top(&self) {}

    fn is_bottom(&self, _: &()) -> bool {
        false
    }

    fn leq(&self, _: &(), _: &()) -> bool {
        true
    }

    fn join(&self, _: &(), _: &()) {}

    fn meet(&self, _: &(), _: &()) {}

    fn widen(&self, _: &(), _: &()) {}

    fn finite_height(&self) -> bool {
        true
    }

    fn elements(&self) -> Option<Vec<()>> {
        Some(vec![()])
    }

    fn abstract_memory(&self, _: &Memory) {}

    fn contains(&self, _: &(), _: &Memory) -> bool {
        true
    }

    fn concretize(&self, _: &(), cap: usize) -> Option<Vec<Memory>> {
        let vars: VarSet = self.vars.iter().cloned().collect();
        let c = Carrier::new(&vars, self.universe).ok()?;
        (c.len() <= cap).then(|| c.memories().collect())
    }

    fn assign(&self, _: &str, _: &AExpr, _: &()) -> Result<()> {
        Ok(())
    }

    fn havoc(&self, _: &str, _: i64, _: i64, _: &()) -> Result<()> {
        Ok(())
    }

    fn guard(&self, _: &BExpr, _: bool) -> Result<()> {
        Ok(())
    }

    fn to_json(&self, _: &()) -> Value {
        Value::Null
    }

    fn from_json(&self, _: &Value) -> Result<()> {
        Ok(())
    }
}
