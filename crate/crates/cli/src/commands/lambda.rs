use aicat::lambda::{
    AbsVal, BaseKind, LTerm, LType, LambdaSem, Lifted, Signature, DEFAULT_BASE_CAP,
};
use aicat::Error;
use serde_json::{json, Value};

use super::{read_text, Outcome};
use crate::config::RunConfig;
use crate::failure::{Context, Failure};

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let sig = match &cfg.sig {
        Some(path) => {
            let v: Value = serde_json::from_str(&read_text(path, "--sig")?)
                .map_err(|e| Failure::usage("--sig", e))?;
            Signature::from_json(&v).for_flag("--sig")?
        }
        None => Signature::standard(DEFAULT_BASE_CAP)?,
    };
    let term_path = cfg
        .term
        .as_deref()
        .ok_or_else(|| Failure::usage("--term", "no term file given"))?;
    let ctx = LType::parse(cfg.ctx.as_deref().expect("resolved")).for_flag("--ctx")?;
    let kind: BaseKind = cfg
        .base_domain
        .as_deref()
        .expect("resolved")
        .parse()
        .for_flag("--base-domain")?;
    let lifted = Lifted::uniform(sig, kind, cfg.seed.expect("resolved")).for_flag("--sig")?;
    let sem = LambdaSem::new(lifted);
    let m = LTerm::parse(&read_text(term_path, "--term")?, &sem.ctx_var).for_flag("--term")?;
    let sigma = sem.typecheck(&m, &ctx).for_flag("--term")?;
    let l = &sem.lifted;
    let action = cfg
        .action
        .as_deref()
        .ok_or_else(|| Failure::usage("lambda", "missing action (eval, csemg, psem or check)"))?;

    let abstract_input = || -> Result<AbsVal, Failure> {
        match &cfg.input {
            Some(v) => l.from_json(&ctx, v).for_flag("--input"),
            None => Ok(l.alpha(&ctx, &l.sig().elements(&ctx)?)?),
        }
    };
    let mut out =
        json!({ "term": m.to_string(), "context": ctx.to_string(), "type": sigma.to_string() });
    let mut violated = false;
    match action {
        "eval" => {
            let input = cfg.input.clone().unwrap_or(Value::Null);
            let v = l.sig().value_from_json(&ctx, &input).for_flag("--input")?;
            out["value"] = l.sig().value_to_json(&sigma, &sem.eval(&m, &ctx, &v)?)?;
        }
        "csemg" => {
            let a = abstract_input()?;
            out["input"] = l.to_json(&ctx, &a)?;
            out["value"] = l.to_json(&sigma, &sem.csem_g(&m, &ctx, &a)?)?;
        }
        "psem" => {
            if cfg.input.is_some() {
                let a = abstract_input()?;
                out["input"] = l.to_json(&ctx, &a)?;
                out["value"] = l.to_json(&sigma, &sem.psem_at(&m, &ctx, &a)?)?;
            } else {
                let f = sem.psem(&m, &ctx)?;
                out["map"] = l.to_json(&LType::arrow(ctx.clone(), sigma.clone()), &f)?;
            }
        }
        "check" => {
            let below = sem.below_psem_violation(&m, &ctx)?;
            violated = below.is_some();
            out["csemg_below_psem"] = match below {
                None => json!({ "verdict": "holds" }),
                Some((a, g, p)) => json!({
                    "verdict": "violated",
                    "input": l.to_json(&ctx, &a)?,
                    "csemg": l.to_json(&sigma, &g)?,
                    "psem": l.to_json(&sigma, &p)?,
                }),
            };
            let mut normal = serde_json::Map::new();
            for ty in [&ctx, &sigma] {
                normal.insert(ty.to_string(), normality(&sem, ty)?);
            }
            out["normal"] = Value::Object(normal);
        }
        other => {
            return Err(Failure::usage(
                "lambda",
                format!("unknown action `{other}`"),
            ))
        }
    }
    Ok(Outcome {
        result: out,
        violated,
    })
}

/// Whether `α ∘ γ = id` at `ty`; a non-insertion is reported, not failed.
fn normality(sem: &LambdaSem, ty: &LType) -> Result<Value, Failure> {
    match sem.insertion_violation(ty) {
        Ok(None) => Ok(json!(true)),
        Ok(Some(a)) => Ok(json!({ "holds": false, "witness": sem.lifted.to_json(ty, &a)? })),
        Err(Error::CarrierTooLarge(why)) => Ok(json!({ "holds": null, "reason": why })),
        Err(e) => Err(e.into()),
    }
}
