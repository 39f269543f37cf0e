//! `aicat`: run, collect, analyze and law-check while programs, and
//! analyze lambda terms. Every command prints one JSON report.

mod commands;
mod config;
mod domain;
mod failure;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::RunConfig;
use failure::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "aicat",
    version,
    about = "Categorical abstract interpretation toolkit"
)]
struct Cli {
    /// TOML file with default options; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for sampled sweeps.
    #[arg(long, global = true, env = "AICAT_SEED")]
    seed: Option<u64>,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the report to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Denote a program on one input memory.
    Run(RunArgs),
    /// Push a predicate through the collecting semantics.
    Collect(CollectArgs),
    /// Run the inductive abstract analyzer.
    Analyze(AnalyzeArgs),
    /// Evaluate or analyze a lambda term in context `x : CTX`.
    Lambda(LambdaArgs),
    /// Sweep the law checkers over the program corpus.
    CheckLaws(LawArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    monad: Option<String>,
    /// Value universe: `machine` or `ringN`.
    #[arg(long)]
    values: Option<String>,
    /// Input memory as a JSON object.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    fuel: Option<u64>,
    program: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CollectArgs {
    #[arg(long)]
    monad: Option<String>,
    /// Truth lattice: `bool`, `r-inf-le` or `r-inf-ge`.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    values: Option<String>,
    /// Precondition: a list of memories or a map from memory keys to truth values.
    #[arg(long)]
    pre: Option<String>,
    /// Use the structural route instead of `sp` of the denotation.
    #[arg(long)]
    inductive: bool,
    /// Also run the other route and report whether they agree.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    fuel: Option<u64>,
    program: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// `interval`, `constants`, `sign` or `product:a+b`.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    values: Option<String>,
    /// Abstract precondition as JSON.
    #[arg(long)]
    pre: Option<String>,
    #[arg(long)]
    widening: bool,
    #[arg(long)]
    kleene: bool,
    /// Also compute the best transformer and compare against it.
    #[arg(long)]
    compare_best: bool,
    program: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LambdaArgs {
    /// Signature file (JSON); defaults to the standard signature.
    #[arg(long)]
    sig: Option<PathBuf>,
    /// Term file in s-expression syntax.
    #[arg(long)]
    term: Option<PathBuf>,
    /// Type of the context variable `x`.
    #[arg(long)]
    ctx: Option<String>,
    /// `interval`, `constants` or `powerset`.
    #[arg(long)]
    base_domain: Option<String>,
    /// Concrete (eval) or abstract (csemg, psem) input as JSON.
    #[arg(long)]
    input: Option<String>,
    /// `eval`, `csemg`, `psem` or `check`.
    action: Option<String>,
}

#[derive(Args, Debug)]
struct LawArgs {
    /// `oplax`, `sound`, `galois` or `all`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    domain: Option<String>,
    /// Also run the deliberately broken analyzers.
    #[arg(long)]
    fixtures: bool,
    /// Report whether each naturality square is an equality.
    #[arg(long)]
    complete: bool,
    /// Seeded predicates per sweep when the carrier is too large to enumerate.
    #[arg(long)]
    samples: Option<usize>,
}

fn set(b: bool) -> Option<bool> {
    b.then_some(true)
}

fn parse_json(flag: &str, s: Option<String>) -> Result<Option<Value>, Failure> {
    s.map(|s| serde_json::from_str(&s).map_err(|e| Failure::usage(flag, e)))
        .transpose()
}

fn flags(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut c = RunConfig {
        seed: cli.seed,
        output: cli.output.clone(),
        ..Default::default()
    };
    match &cli.command {
        Command::Run(a) => {
            c.command = Some("run".into());
            c.monad = a.monad.clone();
            c.values = a.values.clone();
            c.input = parse_json("--input", a.input.clone())?;
            c.fuel = a.fuel;
            c.program = a.program.clone();
        }
        Command::Collect(a) => {
            c.command = Some("collect".into());
            c.monad = a.monad.clone();
            c.omega = a.omega.clone();
            c.values = a.values.clone();
            c.pre = parse_json("--pre", a.pre.clone())?;
            c.inductive = set(a.inductive);
            c.check = set(a.check);
            c.fuel = a.fuel;
            c.program = a.program.clone();
        }
        Command::Analyze(a) => {
            c.command = Some("analyze".into());
            c.domain = a.domain.clone();
            c.values = a.values.clone();
            c.pre = parse_json("--pre", a.pre.clone())?;
            c.widening = set(a.widening);
            c.kleene = set(a.kleene);
            c.compare_best = set(a.compare_best);
            c.program = a.program.clone();
        }
        Command::Lambda(a) => {
            c.command = Some("lambda".into());
            c.sig = a.sig.clone();
            c.term = a.term.clone();
            c.ctx = a.ctx.clone();
            c.base_domain = a.base_domain.clone();
            c.input = parse_json("--input", a.input.clone())?;
            c.action = a.action.clone();
        }
        Command::CheckLaws(a) => {
            c.command = Some("check-laws".into());
            c.suite = a.suite.clone();
            c.values = a.values.clone();
            c.domain = a.domain.clone();
            c.fixtures = set(a.fixtures);
            c.complete = set(a.complete);
            c.samples = a.samples;
        }
    }
    Ok(c)
}

fn emit(cfg: &RunConfig, pretty: bool, result: Value) -> Result<(), Failure> {
    let report = json!({ "schema": "aicat/1", "config": cfg, "result": result });
    let mut text = if pretty {
        serde_json::to_string_pretty(&report)
    } else {
        serde_json::to_string(&report)
    }
    .expect("JSON values serialize");
    text.push('\n');
    match &cfg.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage("--output", format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::usage("--output", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = flags(&cli)
        .and_then(|f| config::load_config(cli.config.as_deref(), f))
        .and_then(|cfg| {
            let o = commands::execute(&cfg)?;
            emit(&cfg, cli.pretty, o.result)?;
            Ok(o.violated)
        });
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("law violation: see the report");
            ExitCode::from(3)
        }
        Err(f) => {
            eprintln!("aicat: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
