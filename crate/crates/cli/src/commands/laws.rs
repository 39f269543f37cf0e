//! `check-laws`: the law checkers swept over the program corpus on the
//! variables `x, y`.

use aicat::analyzer::{BestTransformer, InductiveAnalyzer};
use aicat::domains::{AbstractDomain, GaloisConn};
use aicat::lang::VarSet;
use aicat::laws::corpus::{composition_pairs, law_corpus};
use aicat::laws::fixtures::{unsound_analyzer, CrippledAnalyzer};
use aicat::laws::{
    check_abstraction, check_concretization, check_galois, check_oplax, check_order, predicates,
    LawReport,
};
use aicat::logic::Predicate;
use aicat::par::Exec;
use serde_json::Value;

use super::Outcome;
use crate::config::RunConfig;
use crate::domain::{dispatch, DomainSpec, WithDomain};
use crate::failure::Failure;

/// Default number of seeded predicates added to the singletons when a
/// carrier is too large to enumerate.
pub const DEFAULT_SAMPLES: usize = 64;

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let u = cfg.universe()?;
    if !u.is_finite() {
        return Err(Failure::usage(
            "--values",
            "law sweeps need a finite ringN universe",
        ));
    }
    let spec = DomainSpec::parse(cfg.domain.as_deref().expect("resolved"))?;
    let vars: VarSet = ["x", "y"].iter().map(|s| s.to_string()).collect();
    dispatch(spec, &vars, u, Sweep { cfg })?
}

struct Sweep<'a> {
    cfg: &'a RunConfig,
}

struct Reports {
    items: Vec<Value>,
    violated: bool,
    complete: bool,
}

impl Reports {
    fn push<I, O>(
        &mut self,
        r: &LawReport<I, O>,
        input: impl Fn(&I) -> Value,
        output: impl Fn(&O) -> Value,
    ) {
        let mut v = r.to_json(input, output);
        if r.law != "oplax" && !self.complete {
            v.as_object_mut().expect("object").remove("complete");
        }
        self.violated |= !r.holds();
        self.items.push(v);
    }

    /// A negative fixture: its verdict is recorded next to the expected
    /// one and never fails the run.
    fn push_fixture<I, O>(
        &mut self,
        r: &LawReport<I, O>,
        expected: &str,
        input: impl Fn(&I) -> Value,
        output: impl Fn(&O) -> Value,
    ) {
        let mut v = r.to_json(input, output);
        v.as_object_mut().expect("object").remove("complete");
        v["fixture"] = true.into();
        v["expected"] = expected.into();
        self.items.push(v);
    }
}

impl WithDomain for Sweep<'_> {
    type Out = Result<Outcome, Failure>;

    fn run<D: AbstractDomain + Clone + 'static>(self, d: D) -> Self::Out {
        let cfg = self.cfg;
        let suite = cfg.suite.as_deref().expect("resolved");
        let exec = Exec::Parallel;
        let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
        let seed = cfg.seed.expect("resolved");

        let best = BestTransformer::over(d.clone())?;
        let analyzer = InductiveAnalyzer::new(d.clone());
        let collecting = &best.collecting;
        let carrier = best.carrier().clone();
        let corpus = law_corpus();
        let preds = predicates(&carrier, samples, seed);
        let elems = d.elements().ok_or_else(|| {
            Failure::usage(
                "--domain",
                format!("{} is too large to enumerate", d.name()),
            )
        })?;

        let show_d = |a: &D::Elem| d.to_json(a);
        let show_p = |p: &Predicate| p.to_json();
        let gamma = |a: &D::Elem| best.gamma(a);
        let alpha = |p: &Predicate| d.alpha(p);
        let mut out = Reports {
            items: Vec::new(),
            violated: false,
            complete: cfg.flag(cfg.complete),
        };
        let all = suite == "all";

        if all || suite == "oplax" {
            let pairs = composition_pairs(&corpus);
            let r = check_oplax(collecting, &pairs, &preds, exec)?;
            out.push(&r, show_p, show_p);
            let r = check_oplax(&best, &pairs, &elems, exec)?;
            out.push(&r, show_d, show_d);
            let r = check_oplax(&analyzer, &pairs, &elems, exec)?;
            out.push(&r, show_d, show_d);
        }
        if all || suite == "sound" {
            let r = check_concretization(gamma, &analyzer, collecting, &corpus, &elems, exec)?;
            out.push(&r, show_d, show_p);
            let r = check_abstraction(alpha, collecting, &best, &corpus, &preds, exec)?;
            out.push(&r, show_p, show_d);
            let r = check_order(&best, &analyzer, &corpus, &elems, exec)?;
            out.push(&r, show_d, show_d);
        }
        if all || suite == "galois" {
            let g = GaloisConn::new(d.clone(), carrier.clone())?;
            let r = check_galois(&g, &preds, &elems);
            out.push(&r, show_p, show_d);
        }
        if cfg.flag(cfg.fixtures) {
            let crippled = CrippledAnalyzer::new(d.clone(), 1);
            let pairs = composition_pairs(&corpus);
            let r = check_oplax(&crippled, &pairs, &elems, exec)?;
            out.push_fixture(&r, "violated", show_d, show_d);
            let r = check_abstraction(alpha, collecting, &crippled, &corpus, &preds, exec)?;
            out.push_fixture(&r, "violated", show_p, show_d);
            let unsound = unsound_analyzer(d.clone());
            let r = check_concretization(gamma, &unsound, collecting, &corpus, &elems, exec)?;
            out.push_fixture(&r, "violated", show_d, show_p);
        }
        Ok(Outcome {
            result: Value::Array(out.items),
            violated: out.violated,
        })
    }
}
