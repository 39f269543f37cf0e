use aicat::densem::{DenSem, DEFAULT_FUEL};
use aicat::lang::Program;
use aicat::monads::{Memory, MonadValue};
use serde_json::{json, Value};

use super::{program, Outcome};
use crate::config::RunConfig;
use crate::failure::{Context, Failure};

/// Variables brought into scope by `addvar` start outside the default input.
fn introduced(p: &Program, x: &str) -> bool {
    p.any(&|q| matches!(q, Program::AddVar(v) if v == x))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = program(cfg)?;
    let u = cfg.universe()?;
    let monad = cfg.monad_kind()?.expect("resolved config has a monad");
    let input = match &cfg.input {
        Some(v) => Memory::from_json(v, u).for_flag("--input")?,
        None => Memory::from_pairs(
            p.vars()
                .iter()
                .filter(|x| !introduced(&p, x))
                .map(|x| (x.as_str(), 0)),
        ),
    };
    let sem = DenSem::new(monad, u).with_fuel(cfg.fuel.unwrap_or(DEFAULT_FUEL));
    let d = sem.denote_traced(&p, &input)?;
    let mut out = monad_json(&d.value);
    if !d.exact {
        out["exact"] = false.into();
    }
    Ok(Outcome::ok(out))
}

/// `{"kind": ..., ...}` rendering of a monadic result; subdistribution
/// weights are exact rationals written as strings.
pub fn monad_json(v: &MonadValue<Memory>) -> Value {
    match v {
        MonadValue::Maybe(m) => json!({
            "kind": "maybe",
            "value": m.as_ref().map(Memory::to_json),
        }),
        MonadValue::PowSet(s) => json!({
            "kind": "powerset",
            "memories": s.iter().map(Memory::to_json).collect::<Vec<_>>(),
        }),
        MonadValue::SubDist(d) => json!({
            "kind": "subdist",
            "support": d
                .iter()
                .map(|(m, w)| json!({"memory": m.to_json(), "weight": w.to_string()}))
                .collect::<Vec<_>>(),
            "mass": v.mass().to_string(),
        }),
    }
}
