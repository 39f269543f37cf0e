//! Run configuration: a TOML file merged with command-line flags.

use std::path::{Path, PathBuf};

use aicat::logic::{EMAlgebra, TruthLattice};
use aicat::monads::{MonadKind, Universe};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::Failure;

/// Everything a run depends on. Serialized into every report so the run
/// can be replayed; absent options are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub program: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monad: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuel: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widening: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kleene: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_best: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inductive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sig: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ctx: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixtures: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Fields set in `flags` win over the ones in `self`.
    pub fn merge(self, flags: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, flags; command, program, monad, omega, values, domain, pre, input,
            fuel, widening, kleene, compare_best, check, inductive, complete, sig, term, ctx,
            base_domain, action, suite, fixtures, samples, seed, output)
    }

    pub fn flag(&self, f: Option<bool>) -> bool {
        f.unwrap_or(false)
    }

    /// Fills per-command defaults and rejects inconsistent combinations.
    pub fn resolve(mut self) -> Result<RunConfig, Failure> {
        let cmd = self.command.clone().unwrap_or_default();
        let default_values = match cmd.as_str() {
            "collect" | "check-laws" => "ring4",
            _ => "machine",
        };
        if matches!(cmd.as_str(), "run" | "collect" | "analyze" | "check-laws") {
            self.values.get_or_insert_with(|| default_values.into());
        }
        if matches!(cmd.as_str(), "run" | "collect") {
            self.monad.get_or_insert_with(|| "powerset".into());
        }
        if cmd == "collect" {
            self.omega.get_or_insert_with(|| "bool".into());
        }
        if matches!(cmd.as_str(), "analyze" | "check-laws") {
            self.domain.get_or_insert_with(|| "interval".into());
        }
        if cmd == "check-laws" {
            self.suite.get_or_insert_with(|| "all".into());
        }
        if cmd == "lambda" {
            self.ctx.get_or_insert_with(|| "unit".into());
            self.base_domain.get_or_insert_with(|| "interval".into());
        }
        self.seed.get_or_insert(aicat::laws::DEFAULT_SEED);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), Failure> {
        let monad = self.monad_kind()?;
        let omega = self.truth_lattice()?;
        if let (Some(m), Some(o)) = (monad, omega) {
            EMAlgebra::new(m, o).map_err(|e| {
                Failure::usage("--omega", format!("inconsistent with --monad {m}: {e}"))
            })?;
        }
        self.universe()?;
        if let Some(d) = &self.domain {
            crate::domain::DomainSpec::parse(d)?;
        }
        if self.flag(self.widening) && self.flag(self.kleene) {
            return Err(Failure::usage(
                "--kleene",
                "cannot be combined with --widening",
            ));
        }
        if let Some(s) = &self.suite {
            if !matches!(s.as_str(), "oplax" | "sound" | "galois" | "all") {
                return Err(Failure::usage(
                    "--suite",
                    format!("unknown suite `{s}` (expected oplax, sound, galois or all)"),
                ));
            }
        }
        if let Some(a) = &self.action {
            if !matches!(a.as_str(), "eval" | "csemg" | "psem" | "check") {
                return Err(Failure::usage("lambda", format!("unknown action `{a}`")));
            }
        }
        Ok(())
    }

    pub fn monad_kind(&self) -> Result<Option<MonadKind>, Failure> {
        self.monad
            .as_deref()
            .map(|s| s.parse().map_err(|e| Failure::usage("--monad", e)))
            .transpose()
    }

    pub fn truth_lattice(&self) -> Result<Option<TruthLattice>, Failure> {
        self.omega
            .as_deref()
            .map(|s| s.parse().map_err(|e| Failure::usage("--omega", e)))
            .transpose()
    }

    pub fn universe(&self) -> Result<Universe, Failure> {
        self.values
            .as_deref()
            .unwrap_or("machine")
            .parse()
            .map_err(|e| Failure::usage("--values", e))
    }
}

/// Reads a TOML config file.
pub fn load_file(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage("--config", format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage("--config", e.to_string().trim_end()))
}

/// The config a run uses: the file (if any) overlaid by `flags`, with
/// defaults filled in and consistency checked before any work is done.
pub fn load_config(file: Option<&Path>, flags: RunConfig) -> Result<RunConfig, Failure> {
    let base = match file {
        Some(p) => load_file(p)?,
        None => RunConfig::default(),
    };
    base.merge(flags).resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win() {
        let file: RunConfig = toml::from_str("monad = \"maybe\"\nvalues = \"ring8\"").unwrap();
        let flags = RunConfig {
            monad: Some("powerset".into()),
            ..Default::default()
        };
        let m = file.merge(flags);
        assert_eq!(m.monad.as_deref(), Some("powerset"));
        assert_eq!(m.values.as_deref(), Some("ring8"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("monadd = \"maybe\"").is_err());
    }

    #[test]
    fn subdist_has_no_algebra() {
        let c = RunConfig {
            command: Some("collect".into()),
            monad: Some("subdist".into()),
            omega: Some("bool".into()),
            ..Default::default()
        };
        let err = c.resolve().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--omega"));
    }

    #[test]
    fn empty_flags_keep_file_values() {
        let file: RunConfig =
            toml::from_str("command = \"analyze\"\ndomain = \"sign\"\nseed = 3").unwrap();
        let r = load_config(None, file.clone()).unwrap();
        assert_eq!(r.domain.as_deref(), Some("sign"));
        assert_eq!(r.seed, Some(3));
        assert_eq!(r.values.as_deref(), Some("machine"));
    }
}
