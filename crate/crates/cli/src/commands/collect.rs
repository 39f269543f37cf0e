use aicat::collecting::CollectingSem;
use aicat::densem::{DenSem, DEFAULT_FUEL};
use aicat::lang::VarSet;
use aicat::logic::{EMAlgebra, Predicate};
use aicat::monads::Carrier;
use serde_json::{json, Value};

use super::{program, Outcome};
use crate::config::RunConfig;
use crate::failure::{Context, Failure};

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = program(cfg)?;
    let u = cfg.universe()?;
    if !u.is_finite() {
        return Err(Failure::usage(
            "--values",
            "the collecting semantics needs a finite ringN universe",
        ));
    }
    let monad = cfg.monad_kind()?.expect("resolved");
    let lattice = cfg.truth_lattice()?.expect("resolved");
    let alg = EMAlgebra::new(monad, lattice).for_flag("--omega")?;

    // A scoped program's input variables cannot be read off its text, so
    // they come from the precondition alone.
    let mut vars = match &cfg.pre {
        Some(v) => pre_vars(v)?,
        None => VarSet::new(),
    };
    if !p.uses_scoping() {
        vars.extend(p.vars());
    } else if cfg.pre.is_none() {
        return Err(Failure::usage(
            "--pre",
            "programs with local variables need an explicit precondition",
        ));
    }
    let carrier = Carrier::new(&vars, u).for_flag("--values")?;
    let pre = match &cfg.pre {
        Some(v) => Predicate::from_json(lattice, &carrier, v).for_flag("--pre")?,
        None => Predicate::top(lattice, &carrier),
    };
    let sem = DenSem::new(monad, u).with_fuel(cfg.fuel.unwrap_or(DEFAULT_FUEL));
    let cs = CollectingSem::new(sem, alg, carrier.clone())?;
    let inductive = cfg.flag(cfg.inductive);
    let post = if inductive {
        cs.collect_inductive(&p, &pre)?
    } else {
        cs.collect_direct(&p, &pre)?
    };
    let mut out = json!({
        "vars": carrier.names().to_vec(),
        "omega": lattice.name(),
        "route": if inductive { "inductive" } else { "direct" },
        "post": post.to_json(),
    });
    let mut violated = false;
    if cfg.flag(cfg.check) {
        let other = if inductive {
            cs.collect_direct(&p, &pre)?
        } else {
            cs.collect_inductive(&p, &pre)?
        };
        let agree = other == post;
        violated = !agree;
        out["check"] = json!({ "agree": agree });
        if !agree {
            out["check"]["other"] = other.to_json();
        }
    }
    Ok(Outcome {
        result: out,
        violated,
    })
}

/// Variable names mentioned by a predicate in either JSON form.
fn pre_vars(v: &Value) -> Result<VarSet, Failure> {
    let mut out = VarSet::new();
    match v {
        Value::Array(items) => {
            for m in items {
                let obj = m
                    .as_object()
                    .ok_or_else(|| Failure::usage("--pre", format!("`{m}` is not a memory")))?;
                out.extend(obj.keys().cloned());
            }
        }
        Value::Object(map) => {
            for key in map.keys() {
                for part in key.split(',').filter(|s| !s.trim().is_empty()) {
                    let (n, _) = part.split_once('=').ok_or_else(|| {
                        Failure::usage("--pre", format!("bad memory key `{key}`"))
                    })?;
                    out.insert(n.trim().to_string());
                }
            }
        }
        _ => {
            return Err(Failure::usage(
                "--pre",
                "expected a list of memories or a map from memory keys to truth values",
            ))
        }
    }
    Ok(out)
}
