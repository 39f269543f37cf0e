//! Abstract interpreters over an [`AbstractDomain`].
//!
//! [`InductiveAnalyzer`] is the compositional analyzer built from transfer
//! functions; loops are least fixpoints of
//! `Θ(f)(φ) = f(⟪body⟫(φ ∧ α(grd b tt))) ∨ (φ ∧ α(grd b ff))`, evaluated
//! exactly on finite lattices and by widening otherwise.
//! [`BestTransformer`] is `α ∘ collect ∘ γ`, computable when the universe is
//! a ring. Both implement [`Interpretation`] so the checkers in
//! [`crate::laws`] can compare them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::collecting::CollectingSem;
use crate::densem::DenSem;
use crate::domains::AbstractDomain;
use crate::lang::{BExpr, Program};
use crate::logic::{Predicate, TruthLattice};
use crate::monads::{Carrier, Memory, MonadKind, MonadValue};
use crate::{Error, Result};

/// Bound on the abstract iteration sequence of one loop evaluation on a
/// finite lattice. The sequence always cycles; the bound catches bugs.
const KLEENE_CAP: usize = 1_000_000;

/// Largest `γ` materialized by [`best_transformer_finite`].
pub const FINITE_GAMMA_CAP: usize = 1 << 16;

/// A mapping from programs to monotone maps between abstract carriers.
pub trait Interpretation: Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn name(&self) -> String;
    fn apply(&self, p: &Program, x: &Self::Elem) -> Result<Self::Elem>;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn describe(&self, x: &Self::Elem) -> Value;
}

/// The collecting semantics `p ↦ sp(⟦p⟧)`.
impl Interpretation for CollectingSem {
    type Elem = Predicate;

    fn name(&self) -> String {
        format!(
            "collecting({},{})",
            self.densem.monad,
            self.algebra.lattice()
        )
    }

    fn apply(&self, p: &Program, x: &Predicate) -> Result<Predicate> {
        self.collect_direct(p, x)
    }

    fn leq(&self, a: &Predicate, b: &Predicate) -> bool {
        a.leq(b).unwrap_or(false)
    }

    fn describe(&self, x: &Predicate) -> Value {
        x.to_json()
    }
}

/// How loops are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopMode {
    /// Kleene iteration when the lattice has finite height, widening
    /// otherwise.
    #[default]
    Auto,
    Kleene,
    Widening,
}

/// Per-loop counters, aggregated over every time the loop is evaluated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoopStat {
    /// Preorder index of the loop in the program.
    pub index: usize,
    pub guard: String,
    pub evaluations: usize,
    pub iterations: usize,
    pub max_iterations: usize,
    pub widenings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub program: Program,
    pub domain: String,
    pub pre: Value,
    pub post: Value,
    pub loop_stats: Vec<LoopStat>,
    pub mode: &'static str,
}

/// The compositional abstract interpreter `⟪−⟫`.
#[derive(Debug, Clone)]
pub struct InductiveAnalyzer<D> {
    pub domain: D,
    pub mode: LoopMode,
    /// Cleared only by the unsound test fixture, which then ignores the
    /// else branch of conditionals.
    pub(crate) join_else: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Cycle,
    Accumulate,
    Widen,
}

struct Stats {
    ids: HashMap<*const Program, usize>,
    loops: Vec<LoopStat>,
}

impl<D: AbstractDomain> InductiveAnalyzer<D> {
    pub fn new(domain: D) -> Self {
        InductiveAnalyzer {
            domain,
            mode: LoopMode::Auto,
            join_else: true,
        }
    }

    pub fn with_mode(mut self, mode: LoopMode) -> Self {
        self.mode = mode;
        self
    }

    /// Safety cap on widening rounds: two per bound and direction for each
    /// variable, plus the warm-up and the stabilization check.
    pub fn widening_cap(&self) -> usize {
        2 + 4 * self.domain.vars().len()
    }

    fn strategy(&self) -> Result<Strategy> {
        let finite = self.domain.universe().is_finite() && self.domain.finite_height();
        match self.mode {
            LoopMode::Auto | LoopMode::Kleene if finite => Ok(Strategy::Cycle),
            LoopMode::Auto | LoopMode::Kleene if self.domain.finite_height() => {
                Ok(Strategy::Accumulate)
            }
            LoopMode::Auto | LoopMode::Widening => Ok(Strategy::Widen),
            LoopMode::Kleene => Err(Error::Unsupported(format!(
                "Kleene iteration needs a finite-height lattice; {} has infinite chains",
                self.domain.name()
            ))),
        }
    }

    fn mode_name(&self) -> Result<&'static str> {
        Ok(match self.strategy()? {
            Strategy::Widen => "widening",
            _ => "kleene",
        })
    }

    /// Runs the analysis and records loop statistics.
    pub fn analyze(&self, p: &Program, pre: &D::Elem) -> Result<AnalysisReport> {
        let mut ids = HashMap::new();
        let mut loops = Vec::new();
        number_loops(p, &mut ids, &mut loops);
        let stats = RefCell::new(Stats { ids, loops });
        let strategy = self.strategy()?;
        let post = self.eval(p, pre, strategy, Some(&stats))?;
        Ok(AnalysisReport {
            program: p.clone(),
            domain: self.domain.name(),
            pre: self.domain.to_json(pre),
            post: self.domain.to_json(&post),
            loop_stats: stats.into_inner().loops,
            mode: self.mode_name()?,
        })
    }

    /// `⟪p⟫(a)`.
    pub fn post(&self, p: &Program, a: &D::Elem) -> Result<D::Elem> {
        self.eval(p, a, self.strategy()?, None)
    }

    fn eval(
        &self,
        p: &Program,
        a: &D::Elem,
        s: Strategy,
        stats: Option<&RefCell<Stats>>,
    ) -> Result<D::Elem> {
        let d = &self.domain;
        match p {
            Program::Skip => Ok(a.clone()),
            Program::Seq(x, y) => {
                let mid = self.eval(x, a, s, stats)?;
                self.eval(y, &mid, s, stats)
            }
            Program::Assign(x, e) => d.assign(x, e, a),
            Program::AssignHavoc { var, lo, hi } => d.havoc(var, *lo, *hi, a),
            Program::AssignFlip { var, lhs, rhs, .. } => {
                Ok(d.join(&d.assign(var, lhs, a)?, &d.assign(var, rhs, a)?))
            }
            Program::Diverge => Ok(d.bottom()),
            Program::AddVar(_) | Program::DelVar(_) => Err(Error::Unsupported(
                "abstract domains have a fixed variable set; addvar/delvar are not analyzable"
                    .into(),
            )),
            Program::If(b, t, e) => {
                let then_post = self.eval(t, &d.meet(a, &d.guard(b, true)?), s, stats)?;
                if !self.join_else {
                    return Ok(then_post);
                }
                let else_post = self.eval(e, &d.meet(a, &d.guard(b, false)?), s, stats)?;
                Ok(d.join(&then_post, &else_post))
            }
            Program::While(b, body) => self.eval_loop(p, b, body, a, s, stats),
        }
    }

    fn eval_loop(
        &self,
        node: &Program,
        b: &BExpr,
        body: &Program,
        phi: &D::Elem,
        s: Strategy,
        stats: Option<&RefCell<Stats>>,
    ) -> Result<D::Elem> {
        let d = &self.domain;
        let gtt = d.guard(b, true)?;
        let gff = d.guard(b, false)?;
        let tau = |x: &D::Elem| self.eval(body, &d.meet(x, &gtt), s, stats);
        let mut iterations = 0;
        let mut widenings = 0;
        let result = match s {
            Strategy::Cycle => {
                // μΘ(φ) = ⋁ᵢ τⁱ(φ) ∧ α(grd b ff), and the sequence τⁱ(φ)
                // eventually repeats because the lattice is finite.
                let mut seen = std::collections::HashSet::new();
                let mut x = phi.clone();
                let mut out = d.bottom();
                while seen.insert(x.clone()) {
                    iterations += 1;
                    if iterations > KLEENE_CAP {
                        return Err(Error::NoConvergence("abstract loop iteration".into()));
                    }
                    out = d.join(&out, &d.meet(&x, &gff));
                    x = tau(&x)?;
                }
                out
            }
            Strategy::Accumulate => {
                let mut w = phi.clone();
                loop {
                    iterations += 1;
                    if iterations > KLEENE_CAP {
                        return Err(Error::NoConvergence("abstract loop iteration".into()));
                    }
                    let next = d.join(&w, &tau(&w)?);
                    if next == w {
                        break;
                    }
                    w = next;
                }
                d.meet(&w, &gff)
            }
            Strategy::Widen => {
                let cap = self.widening_cap();
                let mut v = phi.clone();
                loop {
                    iterations += 1;
                    if iterations > cap {
                        return Err(Error::NoConvergence(format!(
                            "widening did not stabilize within {cap} rounds; the {} widening is broken",
                            d.name()
                        )));
                    }
                    let next = d.widen(&v, &tau(&v)?);
                    widenings += 1;
                    if next == v {
                        break;
                    }
                    v = next;
                }
                d.meet(&v, &gff)
            }
        };
        if let Some(stats) = stats {
            let mut st = stats.borrow_mut();
            if let Some(&i) = st.ids.get(&(node as *const Program)) {
                let l = &mut st.loops[i];
                l.evaluations += 1;
                l.iterations += iterations;
                l.max_iterations = l.max_iterations.max(iterations);
                l.widenings += widenings;
            }
        }
        Ok(result)
    }
}

fn number_loops(p: &Program, ids: &mut HashMap<*const Program, usize>, out: &mut Vec<LoopStat>) {
    match p {
        Program::While(b, body) => {
            ids.insert(p as *const Program, out.len());
            out.push(LoopStat {
                index: out.len(),
                guard: b.to_string(),
                ..LoopStat::default()
            });
            number_loops(body, ids, out);
        }
        Program::Seq(a, b) | Program::If(_, a, b) => {
            number_loops(a, ids, out);
            number_loops(b, ids, out);
        }
        _ => {}
    }
}

impl<D: AbstractDomain> Interpretation for InductiveAnalyzer<D> {
    type Elem = D::Elem;

    fn name(&self) -> String {
        format!("inductive({})", self.domain.name())
    }

    fn apply(&self, p: &Program, x: &D::Elem) -> Result<D::Elem> {
        self.post(p, x)
    }

    fn leq(&self, a: &D::Elem, b: &D::Elem) -> bool {
        self.domain.leq(a, b)
    }

    fn describe(&self, x: &D::Elem) -> Value {
        self.domain.to_json(x)
    }
}

/// The best abstract transformer `α ∘ collect(p) ∘ γ` on a ring universe,
/// over the two-valued powerset collecting semantics.
#[derive(Debug, Clone)]
pub struct BestTransformer<D> {
    pub domain: D,
    pub collecting: CollectingSem,
}

impl<D: AbstractDomain> BestTransformer<D> {
    pub fn new(domain: D, collecting: CollectingSem) -> Result<Self> {
        let c = &collecting.carrier;
        if !domain.universe().is_finite() {
            return Err(Error::Unsupported(
                "the best transformer needs a finite universe; use best_transformer_finite".into(),
            ));
        }
        if domain.vars().as_ref() != c.names().as_ref() || domain.universe() != c.universe() {
            return Err(Error::CarrierMismatch(format!(
                "{} does not abstract the collecting carrier",
                domain.name()
            )));
        }
        if collecting.algebra.lattice() != TruthLattice::Bool2 {
            return Err(Error::Unsupported(
                "abstract domains are connected to two-valued predicates only".into(),
            ));
        }
        Ok(BestTransformer { domain, collecting })
    }

    /// Convenience constructor over the powerset semantics.
    pub fn over(domain: D) -> Result<Self> {
        let u = domain.universe();
        let vars = domain.vars().iter().cloned().collect();
        let carrier = Carrier::new(&vars, u)?;
        let cs = CollectingSem::new(
            DenSem::new(MonadKind::PowerSet, u),
            crate::logic::EMAlgebra::new(MonadKind::PowerSet, TruthLattice::Bool2)?,
            carrier,
        )?;
        Self::new(domain, cs)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.collecting.carrier
    }

    pub fn gamma(&self, a: &D::Elem) -> Predicate {
        let c = self.carrier();
        Predicate::from_indices(TruthLattice::Bool2, c, &self.domain.gamma_indices(a, c))
    }

    pub fn best(&self, p: &Program, a: &D::Elem) -> Result<D::Elem> {
        let post = self.collecting.collect_direct(p, &self.gamma(a))?;
        if !post.carrier.same_as(self.carrier()) {
            return Err(Error::Unsupported(
                "program changes the variable set of the abstract domain".into(),
            ));
        }
        Ok(self.domain.alpha(&post))
    }

    pub fn report(&self, p: &Program, a: &D::Elem) -> Result<AnalysisReport> {
        let post = self.best(p, a)?;
        Ok(AnalysisReport {
            program: p.clone(),
            domain: self.domain.name(),
            pre: self.domain.to_json(a),
            post: self.domain.to_json(&post),
            loop_stats: Vec::new(),
            mode: "best-oracle",
        })
    }
}

impl<D: AbstractDomain> Interpretation for BestTransformer<D> {
    type Elem = D::Elem;

    fn name(&self) -> String {
        format!("best({})", self.domain.name())
    }

    fn apply(&self, p: &Program, x: &D::Elem) -> Result<D::Elem> {
        self.best(p, x)
    }

    fn leq(&self, a: &D::Elem, b: &D::Elem) -> bool {
        self.domain.leq(a, b)
    }

    fn describe(&self, x: &D::Elem) -> Value {
        self.domain.to_json(x)
    }
}

/// The best transformer on an unbounded universe when `γ(a)` happens to be
/// finite: each concrete input is run through the powerset semantics.
pub fn best_transformer_finite<D: AbstractDomain>(
    domain: &D,
    p: &Program,
    a: &D::Elem,
) -> Result<D::Elem> {
    let inputs = domain.concretize(a, FINITE_GAMMA_CAP).ok_or_else(|| {
        Error::Unsupported(format!(
            "γ of {} is infinite or larger than {FINITE_GAMMA_CAP} memories",
            domain.to_json(a)
        ))
    })?;
    let sem = DenSem::new(MonadKind::PowerSet, domain.universe());
    let mut out = domain.bottom();
    for m in inputs {
        let MonadValue::PowSet(outs) = sem.denote(p, &m)? else {
            unreachable!("powerset semantics yields sets")
        };
        for o in outs {
            out = domain.join(&out, &domain.abstract_memory(&align(domain, o)?));
        }
    }
    Ok(out)
}

fn align<D: AbstractDomain>(domain: &D, m: Memory) -> Result<Memory> {
    if m.names().as_ref() == domain.vars().as_ref() {
        Ok(m)
    } else {
        Err(Error::Unsupported(
            "program changes the variable set of the abstract domain".into(),
        ))
    }
}

/// Outcome of [`compare_with_best`].
#[derive(Debug, Clone)]
pub struct Comparison<E> {
    pub checked: usize,
    /// Inputs where the best transformer is strictly more precise.
    pub strict: usize,
    /// `(a, best(p)(a), ⟪p⟫(a))` where `best ≤ ⟪p⟫` fails.
    pub counterexample: Option<(E, E, E)>,
}

impl<E> Comparison<E> {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `best(p)(a) ≤ ⟪p⟫(a)` for every `a` in `sample`.
pub fn compare_with_best<D: AbstractDomain>(
    analyzer: &InductiveAnalyzer<D>,
    best: &BestTransformer<D>,
    p: &Program,
    sample: &[D::Elem],
) -> Result<Comparison<D::Elem>> {
    let d = &analyzer.domain;
    let mut cmp = Comparison {
        checked: 0,
        strict: 0,
        counterexample: None,
    };
    for a in sample {
        let b = best.best(p, a)?;
        let i = analyzer.post(p, a)?;
        cmp.checked += 1;
        if !d.leq(&b, &i) {
            cmp.counterexample = Some((a.clone(), b, i));
            break;
        }
        if b != i {
            cmp.strict += 1;
        }
    }
    Ok(cmp)
}

/// `α` of a finite set of memories.
pub fn alpha_of_memories<D: AbstractDomain>(domain: &D, ms: &[Memory]) -> D::Elem {
    ms.iter().fold(domain.bottom(), |acc, m| {
        domain.join(&acc, &domain.abstract_memory(m))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{ConstVal, Constants, Interval, Itv, NonRelational};
    use crate::lang::parse;
    use crate::monads::Universe;

    fn itv(u: Universe) -> NonRelational<Interval> {
        NonRelational::of(Interval::new(u), &["x"])
    }

    fn x_in(d: &NonRelational<Interval>, lo: i64, hi: i64) -> crate::domains::AbsMem<Itv> {
        d.env_of(&[("x", Itv::Range(lo, hi))]).unwrap()
    }

    #[test]
    fn interval_example() {
        let d = itv(Universe::Machine);
        let an = InductiveAnalyzer::new(d.clone());
        let pre = x_in(&d, 0, 1);
        let p0 = parse("x := 4*x - 2").unwrap();
        let p1 = parse("if x <= 0 { x := 0 - x } else { skip }").unwrap();
        let mid = an.post(&p0, &pre).unwrap();
        assert_eq!(mid, x_in(&d, -2, 2));
        assert_eq!(an.post(&p1, &mid).unwrap(), x_in(&d, 0, 2));
        let both = Program::seq(p0, p1);
        assert_eq!(an.post(&both, &pre).unwrap(), x_in(&d, 0, 2));
        assert_eq!(
            best_transformer_finite(&d, &both, &pre).unwrap(),
            x_in(&d, 2, 2)
        );
    }

    #[test]
    fn widening_loop() {
        let d = itv(Universe::Machine);
        let an = InductiveAnalyzer::new(d.clone());
        let p = parse("x := 0; while x < 100 { x := x + 1 }").unwrap();
        let r = an.analyze(&p, &d.top()).unwrap();
        assert_eq!(r.mode, "widening");
        assert_eq!(an.post(&p, &d.top()).unwrap(), x_in(&d, 100, i64::MAX));
        assert!(r.loop_stats[0].widenings <= 3);
        assert!(InductiveAnalyzer::new(d.clone())
            .with_mode(LoopMode::Kleene)
            .analyze(&p, &d.top())
            .is_err());
    }

    #[test]
    fn ring_loops_are_exact_fixpoints() {
        let u = Universe::Ring(8);
        let d = itv(u);
        let an = InductiveAnalyzer::new(d.clone());
        let p = parse("x := 0; while x < 5 { x := x + 1 }").unwrap();
        let r = an.analyze(&p, &d.top()).unwrap();
        assert_eq!(r.mode, "kleene");
        assert_eq!(an.post(&p, &d.top()).unwrap(), x_in(&d, 5, 5));
    }

    #[test]
    fn constant_propagation() {
        let d = NonRelational::of(Constants::new(Universe::Machine), &["x", "y"]);
        let an = InductiveAnalyzer::new(d.clone());
        let top = d.top();
        let p = parse("x := 2; while y <= 3 { x := x }").unwrap();
        assert_eq!(
            d.get(&an.post(&p, &top).unwrap(), "x").unwrap(),
            ConstVal::Const(2)
        );
        let q = parse("x := 2; if y <= 3 { x := 3 } else { skip }").unwrap();
        assert_eq!(
            d.get(&an.post(&q, &top).unwrap(), "x").unwrap(),
            ConstVal::Top
        );
    }

    #[test]
    fn best_transformer_on_ring() {
        let d = itv(Universe::Ring(8));
        let bt = BestTransformer::over(d.clone()).unwrap();
        let p = parse("x := havoc(0, 1)").unwrap();
        assert_eq!(bt.best(&p, &d.top()).unwrap(), x_in(&d, 0, 1));
        let a = x_in(&d, 2, 5);
        assert_eq!(bt.best(&Program::Skip, &a).unwrap(), a);
        let an = InductiveAnalyzer::new(d.clone());
        let all = d.elements().unwrap();
        let cmp = compare_with_best(&an, &bt, &parse("x := x + 3").unwrap(), &all).unwrap();
        assert!(cmp.holds());
        assert_eq!(cmp.checked, all.len());
    }
}
