//! Deliberately broken analyzers. They exist so the checkers can be shown
//! to reject something; they are never part of the default sweeps.

use serde_json::Value;

use crate::analyzer::{InductiveAnalyzer, Interpretation};
use crate::domains::AbstractDomain;
use crate::lang::Program;
use crate::Result;

/// An interval-style analyzer that returns `⊤` for any program writing
/// more than `k` variables, and is precise otherwise.
#[derive(Debug, Clone)]
pub struct CrippledAnalyzer<D> {
    pub inner: InductiveAnalyzer<D>,
    pub k: usize,
}

impl<D: AbstractDomain> CrippledAnalyzer<D> {
    pub fn new(domain: D, k: usize) -> Self {
        CrippledAnalyzer {
            inner: InductiveAnalyzer::new(domain),
            k,
        }
    }
}

impl<D: AbstractDomain> Interpretation for CrippledAnalyzer<D> {
    type Elem = D::Elem;

    fn name(&self) -> String {
        format!("crippled-{}({})", self.k, self.inner.domain.name())
    }

    fn apply(&self, p: &Program, x: &D::Elem) -> Result<D::Elem> {
        if p.assigned_vars().len() > self.k {
            Ok(self.inner.domain.top())
        } else {
            self.inner.post(p, x)
        }
    }

    fn leq(&self, a: &D::Elem, b: &D::Elem) -> bool {
        self.inner.domain.leq(a, b)
    }

    fn describe(&self, x: &D::Elem) -> Value {
        self.inner.domain.to_json(x)
    }
}

/// The inductive analyzer with the else branch of every conditional
/// dropped instead of joined.
pub fn unsound_analyzer<D: AbstractDomain>(domain: D) -> UnsoundAnalyzer<D> {
    let mut inner = InductiveAnalyzer::new(domain);
    inner.join_else = false;
    UnsoundAnalyzer(inner)
}

#[derive(Debug, Clone)]
pub struct UnsoundAnalyzer<D>(InductiveAnalyzer<D>);

impl<D: AbstractDomain> Interpretation for UnsoundAnalyzer<D> {
    type Elem = D::Elem;

    fn name(&self) -> String {
        format!("drop-else({})", self.0.domain.name())
    }

    fn apply(&self, p: &Program, x: &D::Elem) -> Result<D::Elem> {
        self.0.post(p, x)
    }

    fn leq(&self, a: &D::Elem, b: &D::Elem) -> bool {
        self.0.domain.leq(a, b)
    }

    fn describe(&self, x: &D::Elem) -> Value {
        self.0.domain.to_json(x)
    }
}
