mod analyze;
mod collect;
mod lambda;
mod laws;
mod run;

use std::path::Path;

use aicat::lang::Program;
use serde_json::Value;

use crate::config::RunConfig;
use crate::failure::{Context, Failure};

/// A finished command: its JSON result, and whether it found a law
/// violation that should make the process fail.
pub struct Outcome {
    pub result: Value,
    pub violated: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            violated: false,
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.command.as_deref() {
        Some("run") => run::run(cfg),
        Some("collect") => collect::run(cfg),
        Some("analyze") => analyze::run(cfg),
        Some("lambda") => lambda::run(cfg),
        Some("check-laws") => laws::run(cfg),
        other => Err(Failure::usage(
            "command",
            format!("unknown command {}", other.unwrap_or("(none)")),
        )),
    }
}

fn read_text(path: &Path, flag: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(flag, format!("{}: {e}", path.display())))
}

fn program(cfg: &RunConfig) -> Result<Program, Failure> {
    let path = cfg
        .program
        .as_deref()
        .ok_or_else(|| Failure::usage("PROGRAM", "no program file given"))?;
    aicat::lang::parse(&read_text(path, "PROGRAM")?).for_flag("PROGRAM")
}
