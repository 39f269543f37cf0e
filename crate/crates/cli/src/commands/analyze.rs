use aicat::analyzer::{
    best_transformer_finite, compare_with_best, BestTransformer, InductiveAnalyzer, LoopMode,
};
use aicat::domains::AbstractDomain;
use aicat::lang::{Program, VarSet};
use serde_json::{json, Value};

use super::{program, Outcome};
use crate::config::RunConfig;
use crate::domain::{dispatch, DomainSpec, WithDomain};
use crate::failure::{Context, Failure};

/// Largest lattice whose every element is used as a comparison input.
const COMPARE_ALL_UP_TO: usize = 4096;

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = program(cfg)?;
    let u = cfg.universe()?;
    let spec = DomainSpec::parse(cfg.domain.as_deref().expect("resolved"))?;
    let mut vars = p.vars();
    if let Some(pre) = &cfg.pre {
        collect_keys(pre, &mut vars);
    }
    dispatch(spec, &vars, u, Analyze { cfg, p: &p })?
}

fn collect_keys(v: &Value, out: &mut VarSet) {
    match v {
        Value::Object(o) => out.extend(o.keys().cloned()),
        Value::Array(items) => items.iter().for_each(|i| collect_keys(i, out)),
        _ => {}
    }
}

struct Analyze<'a> {
    cfg: &'a RunConfig,
    p: &'a Program,
}

impl WithDomain for Analyze<'_> {
    type Out = Result<Outcome, Failure>;

    fn run<D: AbstractDomain + Clone + 'static>(self, d: D) -> Self::Out {
        let cfg = self.cfg;
        let pre = match &cfg.pre {
            Some(v) => d.from_json(v).for_flag("--pre")?,
            None => d.top(),
        };
        let mode = if cfg.flag(cfg.widening) {
            LoopMode::Widening
        } else if cfg.flag(cfg.kleene) {
            LoopMode::Kleene
        } else {
            LoopMode::Auto
        };
        let an = InductiveAnalyzer::new(d.clone()).with_mode(mode);
        let report = an.analyze(self.p, &pre)?;
        let mut out = serde_json::to_value(&report).expect("reports serialize");
        let mut violated = false;
        if cfg.flag(cfg.compare_best) {
            let post = an.post(self.p, &pre)?;
            let (best_json, cmp) = if d.universe().is_finite() {
                let best = BestTransformer::over(d.clone())?;
                let mut sample = vec![pre.clone()];
                if let Some(all) = d.elements().filter(|e| e.len() <= COMPARE_ALL_UP_TO) {
                    sample.extend(all);
                }
                let c = compare_with_best(&an, &best, self.p, &sample)?;
                let cmp = json!({
                    "inputs": c.checked,
                    "strictly_more_precise": c.strict,
                    "holds": c.holds(),
                    "counterexample": c.counterexample.map(|(a, b, i)| json!({
                        "pre": d.to_json(&a), "best": d.to_json(&b), "analyzer": d.to_json(&i),
                    })),
                });
                (d.to_json(&best.best(self.p, &pre)?), cmp)
            } else {
                let b = best_transformer_finite(&d, self.p, &pre)?;
                let holds = d.leq(&b, &post);
                let cmp = json!({
                    "inputs": 1,
                    "strictly_more_precise": usize::from(holds && b != post),
                    "holds": holds,
                    "counterexample": if holds { Value::Null } else {
                        json!({"pre": d.to_json(&pre), "best": d.to_json(&b), "analyzer": d.to_json(&post)})
                    },
                });
                (d.to_json(&b), cmp)
            };
            violated = !cmp["holds"].as_bool().unwrap_or(false);
            out["best"] = json!({ "post": best_json, "comparison": cmp });
        }
        Ok(Outcome {
            result: out,
            violated,
        })
    }
}
