use std::collections::BTreeSet;

use super::ast::{BExpr, Program};
use crate::{Error, Result};

/// Objects of the scoped language category: finite sets of variables.
pub type VarSet = BTreeSet<String>;

fn construct_name(p: &Program) -> &'static str {
    match p {
        Program::Skip => "skip",
        Program::Seq(..) => "seq",
        Program::Assign(..) => "assign",
        Program::AssignHavoc { .. } => "havoc",
        Program::AssignFlip { .. } => "flip",
        Program::Diverge => "diverge",
        Program::If(..) => "if",
        Program::While(..) => "while",
        Program::AddVar(_) => "addvar",
        Program::DelVar(_) => "delvar",
    }
}

fn require(vars: &VarSet, scope: &VarSet, construct: &str) -> Result<()> {
    match vars.iter().find(|v| !scope.contains(*v)) {
        Some(v) => Err(Error::Scope {
            var: v.clone(),
            construct: construct.to_string(),
            reason: "not in scope".to_string(),
        }),
        None => Ok(()),
    }
}

fn guard_vars(b: &BExpr) -> VarSet {
    b.vars()
}

/// Computes the output variable set `X'` such that `p` is a morphism
/// `input -> X'` of the scoped language category, or reports the first
/// offending variable.
pub fn check_scoped(p: &Program, input: &VarSet) -> Result<VarSet> {
    let name = construct_name(p);
    match p {
        Program::Skip | Program::Diverge => Ok(input.clone()),
        Program::Seq(a, b) => {
            let mid = check_scoped(a, input)?;
            check_scoped(b, &mid)
        }
        Program::Assign(x, e) => {
            let mut vars = e.vars();
            vars.insert(x.clone());
            require(&vars, input, name)?;
            Ok(input.clone())
        }
        Program::AssignHavoc { var, .. } => {
            require(&VarSet::from([var.clone()]), input, name)?;
            Ok(input.clone())
        }
        Program::AssignFlip { var, lhs, rhs, .. } => {
            let mut vars = lhs.vars();
            rhs.collect_vars(&mut vars);
            vars.insert(var.clone());
            require(&vars, input, name)?;
            Ok(input.clone())
        }
        Program::If(b, t, e) => {
            require(&guard_vars(b), input, name)?;
            let out_t = check_scoped(t, input)?;
            let out_e = check_scoped(e, input)?;
            if out_t != out_e {
                let var = out_t
                    .symmetric_difference(&out_e)
                    .next()
                    .cloned()
                    .unwrap_or_default();
                return Err(Error::Scope {
                    var,
                    construct: name.to_string(),
                    reason: "branches end with different variable sets".to_string(),
                });
            }
            Ok(out_t)
        }
        Program::While(b, body) => {
            require(&guard_vars(b), input, name)?;
            let out = check_scoped(body, input)?;
            if out != *input {
                let var = out
                    .symmetric_difference(input)
                    .next()
                    .cloned()
                    .unwrap_or_default();
                return Err(Error::Scope {
                    var,
                    construct: name.to_string(),
                    reason: "loop body changes the variable set".to_string(),
                });
            }
            Ok(out)
        }
        Program::AddVar(x) => {
            if input.contains(x) {
                return Err(Error::Scope {
                    var: x.clone(),
                    construct: name.to_string(),
                    reason: "already in scope".to_string(),
                });
            }
            let mut out = input.clone();
            out.insert(x.clone());
            Ok(out)
        }
        Program::DelVar(x) => {
            if !input.contains(x) {
                return Err(Error::Scope {
                    var: x.clone(),
                    construct: name.to_string(),
                    reason: "not in scope".to_string(),
                });
            }
            let mut out = input.clone();
            out.remove(x);
            Ok(out)
        }
    }
}

/// Composition in the unscoped category: `q` after `p`.
pub fn seq_compose(p: &Program, q: &Program) -> Program {
    Program::seq(p.clone(), q.clone())
}

/// Composition in the scoped category. `p : p_in -> X` and `q : q_in -> Y`
/// compose only when `X = q_in`; returns the composite and `Y`.
pub fn seq_compose_scoped(
    p: &Program,
    p_in: &VarSet,
    q: &Program,
    q_in: &VarSet,
) -> Result<(Program, VarSet)> {
    let mid = check_scoped(p, p_in)?;
    if mid != *q_in {
        let var = mid
            .symmetric_difference(q_in)
            .next()
            .cloned()
            .unwrap_or_default();
        return Err(Error::Scope {
            var,
            construct: "seq".to_string(),
            reason: "output of the first program differs from input of the second".to_string(),
        });
    }
    let out = check_scoped(q, q_in)?;
    Ok((seq_compose(p, q), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn vars(names: &[&str]) -> VarSet {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn skip_keeps_scope() {
        assert_eq!(
            check_scoped(&Program::Skip, &vars(&["x"])).unwrap(),
            vars(&["x"])
        );
    }

    #[test]
    fn addvar_extends_scope() {
        let p = parse("addvar y; y := x").unwrap();
        assert_eq!(check_scoped(&p, &vars(&["x"])).unwrap(), vars(&["x", "y"]));
    }

    #[test]
    fn delvar_of_missing_variable() {
        let p = parse("delvar y").unwrap();
        match check_scoped(&p, &vars(&["x"])) {
            Err(Error::Scope { var, construct, .. }) => {
                assert_eq!(var, "y");
                assert_eq!(construct, "delvar");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_scope_use() {
        let p = parse("x := y + 1").unwrap();
        assert!(matches!(
            check_scoped(&p, &vars(&["x"])),
            Err(Error::Scope { var, .. }) if var == "y"
        ));
        let p = parse("addvar x").unwrap();
        assert!(check_scoped(&p, &vars(&["x"])).is_err());
    }

    #[test]
    fn branches_and_loops_must_agree() {
        let p = parse("if x <= 0 { addvar y } else { skip }").unwrap();
        assert!(check_scoped(&p, &vars(&["x"])).is_err());
        let p = parse("while x <= 0 { addvar y; delvar y }").unwrap();
        assert_eq!(check_scoped(&p, &vars(&["x"])).unwrap(), vars(&["x"]));
        let p = parse("while x <= 0 { addvar y }").unwrap();
        assert!(check_scoped(&p, &vars(&["x"])).is_err());
    }

    #[test]
    fn scoped_composition() {
        let p = parse("addvar y").unwrap();
        let q = parse("y := x; delvar x").unwrap();
        let (pq, out) = seq_compose_scoped(&p, &vars(&["x"]), &q, &vars(&["x", "y"])).unwrap();
        assert_eq!(out, vars(&["y"]));
        assert_eq!(pq.statements().len(), 3);
        assert!(seq_compose_scoped(&p, &vars(&["x"]), &q, &vars(&["x"])).is_err());
    }
}
