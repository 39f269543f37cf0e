use serde::Serialize;
use serde_json::Value;

use crate::analyzer::Interpretation;
use crate::lang::Program;
use crate::par::{self, Exec};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
}

/// Which inequality a witness breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum Case {
    /// `F(skip)(a) ≤ a`.
    Identity,
    /// `F(p; q)(a) ≤ F(q)(F(p)(a))`.
    Composition { first: Program, second: Program },
    /// A naturality square for one program.
    Square { program: Program },
    /// `F(p)(a) ≤ G(p)(a)`.
    Order { program: Program },
    /// `α(c) ≤ a` disagrees with `c ≤ γ(a)`; the witness carries `α(c)`
    /// and `a`.
    Adjunction,
}

/// A counterexample: on `input`, `lhs ≤ rhs` fails.
#[derive(Debug, Clone)]
pub struct Witness<I, O> {
    pub case: Case,
    pub input: I,
    pub lhs: O,
    pub rhs: O,
}

#[derive(Debug, Clone)]
pub struct LawReport<I, O> {
    pub law: &'static str,
    pub subject: String,
    pub verdict: Verdict,
    pub checked: usize,
    /// Whether the identity inequality was an equality on every input.
    pub normal: Option<bool>,
    /// Whether every checked inequality was an equality.
    pub exact: Option<bool>,
    pub witness: Option<Witness<I, O>>,
}

impl<I, O> LawReport<I, O> {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// JSON rendering; `exact` is reported as `functorial` for oplax checks
    /// and `complete` for naturality checks.
    pub fn to_json(&self, input: impl Fn(&I) -> Value, output: impl Fn(&O) -> Value) -> Value {
        let mut v = serde_json::json!({
            "law": self.law,
            "subject": self.subject,
            "verdict": self.verdict,
            "checked": self.checked,
        });
        let exact_key = if self.law == "oplax" {
            "functorial"
        } else {
            "complete"
        };
        if let Some(n) = self.normal {
            v["normal"] = n.into();
        }
        if let Some(e) = self.exact {
            v[exact_key] = e.into();
        }
        if let Some(w) = &self.witness {
            v["witness"] = serde_json::json!({
                "case": w.case,
                "input": input(&w.input),
                "lhs": output(&w.lhs),
                "rhs": output(&w.rhs),
            });
        }
        v
    }
}

struct Partial<W> {
    checked: usize,
    exact: bool,
    witness: Option<W>,
}

fn merge<W>(parts: Vec<Result<Partial<W>>>) -> Result<Partial<W>> {
    let mut out = Partial {
        checked: 0,
        exact: true,
        witness: None,
    };
    for p in parts {
        let p = p?;
        out.checked += p.checked;
        out.exact &= p.exact;
        if out.witness.is_none() {
            out.witness = p.witness;
        }
    }
    Ok(out)
}

fn verdict<W>(w: &Option<W>) -> Verdict {
    if w.is_some() {
        Verdict::Violated
    } else {
        Verdict::Holds
    }
}

/// Checks `F(skip) ≤ id` and `F(p; q) ≤ F(q) ∘ F(p)` pointwise on `inputs`,
/// recording whether the normal and functorial equalities also hold.
pub fn check_oplax<F: Interpretation>(
    f: &F,
    pairs: &[(Program, Program)],
    inputs: &[F::Elem],
    exec: Exec,
) -> Result<LawReport<F::Elem, F::Elem>> {
    let mut normal = true;
    let mut witness = None;
    let mut checked = 0;
    for a in inputs {
        let lhs = f.apply(&Program::Skip, a)?;
        checked += 1;
        if !f.leq(&lhs, a) {
            witness.get_or_insert(Witness {
                case: Case::Identity,
                input: a.clone(),
                lhs: lhs.clone(),
                rhs: a.clone(),
            });
        }
        normal &= lhs == *a;
    }
    let parts = par::map(
        exec,
        pairs,
        |(p, q)| -> Result<Partial<Witness<F::Elem, F::Elem>>> {
            let pq = Program::seq(p.clone(), q.clone());
            let mut part = Partial {
                checked: 0,
                exact: true,
                witness: None,
            };
            for a in inputs {
                let lhs = f.apply(&pq, a)?;
                let rhs = f.apply(q, &f.apply(p, a)?)?;
                part.checked += 1;
                if lhs != rhs {
                    part.exact = false;
                    if !f.leq(&lhs, &rhs) {
                        part.witness = Some(Witness {
                            case: Case::Composition {
                                first: p.clone(),
                                second: q.clone(),
                            },
                            input: a.clone(),
                            lhs,
                            rhs,
                        });
                        break;
                    }
                }
            }
            Ok(part)
        },
    );
    let comp = merge(parts)?;
    let witness = witness.or(comp.witness);
    Ok(LawReport {
        law: "oplax",
        subject: f.name(),
        verdict: verdict(&witness),
        checked: checked + comp.checked,
        normal: Some(normal),
        exact: Some(normal && comp.exact),
        witness,
    })
}

/// Re-evaluates an oplax witness; true when it still shows a violation.
pub fn replay_oplax<F: Interpretation>(f: &F, w: &Witness<F::Elem, F::Elem>) -> Result<bool> {
    let (lhs, rhs) = match &w.case {
        Case::Identity => (f.apply(&Program::Skip, &w.input)?, w.input.clone()),
        Case::Composition { first, second } => (
            f.apply(&Program::seq(first.clone(), second.clone()), &w.input)?,
            f.apply(second, &f.apply(first, &w.input)?)?,
        ),
        _ => return Ok(false),
    };
    Ok(lhs == w.lhs && rhs == w.rhs && !f.leq(&lhs, &rhs))
}

/// Checks the lax naturality square `C(p) ∘ γ ≤ γ ∘ A(p)` on `inputs`.
pub fn check_concretization<A, C, G>(
    gamma: G,
    a: &A,
    c: &C,
    programs: &[Program],
    inputs: &[A::Elem],
    exec: Exec,
) -> Result<LawReport<A::Elem, C::Elem>>
where
    A: Interpretation,
    C: Interpretation,
    G: Fn(&A::Elem) -> C::Elem + Sync + Send,
{
    let gammas: Vec<C::Elem> = inputs.iter().map(&gamma).collect();
    let parts = par::map(
        exec,
        programs,
        |p| -> Result<Partial<Witness<A::Elem, C::Elem>>> {
            let mut part = Partial {
                checked: 0,
                exact: true,
                witness: None,
            };
            for (x, gx) in inputs.iter().zip(&gammas) {
                let lhs = c.apply(p, gx)?;
                let rhs = gamma(&a.apply(p, x)?);
                part.checked += 1;
                if lhs != rhs {
                    part.exact = false;
                    if !c.leq(&lhs, &rhs) {
                        part.witness = Some(Witness {
                            case: Case::Square { program: p.clone() },
                            input: x.clone(),
                            lhs,
                            rhs,
                        });
                        break;
                    }
                }
            }
            Ok(part)
        },
    );
    let all = merge(parts)?;
    Ok(LawReport {
        law: "concretization",
        subject: format!("{} against {}", a.name(), c.name()),
        verdict: verdict(&all.witness),
        checked: all.checked,
        normal: None,
        exact: Some(all.exact),
        witness: all.witness,
    })
}

/// Re-evaluates a concretization witness.
pub fn replay_concretization<A, C, G>(
    gamma: G,
    a: &A,
    c: &C,
    w: &Witness<A::Elem, C::Elem>,
) -> Result<bool>
where
    A: Interpretation,
    C: Interpretation,
    G: Fn(&A::Elem) -> C::Elem,
{
    let Case::Square { program } = &w.case else {
        return Ok(false);
    };
    let lhs = c.apply(program, &gamma(&w.input))?;
    let rhs = gamma(&a.apply(program, &w.input)?);
    Ok(lhs == w.lhs && rhs == w.rhs && !c.leq(&lhs, &rhs))
}

/// Checks the dual square `α ∘ C(p) ≤ A(p) ∘ α` on concrete `inputs`.
pub fn check_abstraction<C, A, H>(
    alpha: H,
    c: &C,
    a: &A,
    programs: &[Program],
    inputs: &[C::Elem],
    exec: Exec,
) -> Result<LawReport<C::Elem, A::Elem>>
where
    C: Interpretation,
    A: Interpretation,
    H: Fn(&C::Elem) -> A::Elem + Sync + Send,
{
    let alphas: Vec<A::Elem> = inputs.iter().map(&alpha).collect();
    let parts = par::map(
        exec,
        programs,
        |p| -> Result<Partial<Witness<C::Elem, A::Elem>>> {
            let mut part = Partial {
                checked: 0,
                exact: true,
                witness: None,
            };
            for (x, ax) in inputs.iter().zip(&alphas) {
                let lhs = alpha(&c.apply(p, x)?);
                let rhs = a.apply(p, ax)?;
                part.checked += 1;
                if lhs != rhs {
                    part.exact = false;
                    if !a.leq(&lhs, &rhs) {
                        part.witness = Some(Witness {
                            case: Case::Square { program: p.clone() },
                            input: x.clone(),
                            lhs,
                            rhs,
                        });
                        break;
                    }
                }
            }
            Ok(part)
        },
    );
    let all = merge(parts)?;
    Ok(LawReport {
        law: "abstraction",
        subject: format!("{} against {}", c.name(), a.name()),
        verdict: verdict(&all.witness),
        checked: all.checked,
        normal: None,
        exact: Some(all.exact),
        witness: all.witness,
    })
}

/// Checks `F ≤ G` pointwise: `F(p)(a) ≤ G(p)(a)`.
pub fn check_order<F, G>(
    f: &F,
    g: &G,
    programs: &[Program],
    inputs: &[F::Elem],
    exec: Exec,
) -> Result<LawReport<F::Elem, F::Elem>>
where
    F: Interpretation,
    G: Interpretation<Elem = F::Elem>,
{
    let parts = par::map(
        exec,
        programs,
        |p| -> Result<Partial<Witness<F::Elem, F::Elem>>> {
            let mut part = Partial {
                checked: 0,
                exact: true,
                witness: None,
            };
            for x in inputs {
                let lhs = f.apply(p, x)?;
                let rhs = g.apply(p, x)?;
                part.checked += 1;
                if lhs != rhs {
                    part.exact = false;
                    if !g.leq(&lhs, &rhs) {
                        part.witness = Some(Witness {
                            case: Case::Order { program: p.clone() },
                            input: x.clone(),
                            lhs,
                            rhs,
                        });
                        break;
                    }
                }
            }
            Ok(part)
        },
    );
    let all = merge(parts)?;
    Ok(LawReport {
        law: "order",
        subject: format!("{} below {}", f.name(), g.name()),
        verdict: verdict(&all.witness),
        checked: all.checked,
        normal: None,
        exact: Some(all.exact),
        witness: all.witness,
    })
}
