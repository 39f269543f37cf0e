use std::collections::BTreeSet;
use std::fmt;

use crate::{Error, Result};

/// Simple types over named base types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LType {
    Base(String),
    Unit,
    Prod(Box<LType>, Box<LType>),
    Arrow(Box<LType>, Box<LType>),
}

impl LType {
    pub fn base(name: &str) -> Self {
        LType::Base(name.to_string())
    }

    pub fn prod(a: LType, b: LType) -> Self {
        LType::Prod(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: LType, b: LType) -> Self {
        LType::Arrow(Box::new(a), Box::new(b))
    }

    /// Nesting depth of arrows to the left of an arrow.
    pub fn order(&self) -> usize {
        match self {
            LType::Base(_) | LType::Unit => 0,
            LType::Prod(a, b) => a.order().max(b.order()),
            LType::Arrow(a, b) => (a.order() + 1).max(b.order()),
        }
    }

    pub fn is_first_order(&self) -> bool {
        self.order() == 0
    }

    pub fn parse(src: &str) -> Result<LType> {
        let sx = Sexp::parse(src)?;
        LType::from_sexp(&sx)
    }

    fn from_sexp(sx: &Sexp) -> Result<LType> {
        match sx {
            Sexp::Atom(a) if a == "unit" => Ok(LType::Unit),
            Sexp::Atom(a) => Ok(LType::base(a)),
            Sexp::List(items) => match items.as_slice() {
                [Sexp::Atom(op), rest @ ..] if (op == "->" || op == "*") && rest.len() >= 2 => {
                    // Both constructors associate to the right.
                    let mut tys = rest
                        .iter()
                        .map(LType::from_sexp)
                        .collect::<Result<Vec<_>>>()?;
                    let mut acc = tys.pop().expect("two or more operands");
                    while let Some(t) = tys.pop() {
                        acc = if op == "->" {
                            LType::arrow(t, acc)
                        } else {
                            LType::prod(t, acc)
                        };
                    }
                    Ok(acc)
                }
                _ => Err(Error::Type(format!("malformed type `{sx}`"))),
            },
        }
    }
}

impl fmt::Display for LType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LType::Base(b) => write!(f, "{b}"),
            LType::Unit => write!(f, "unit"),
            LType::Prod(a, b) => write!(f, "(* {a} {b})"),
            LType::Arrow(a, b) => write!(f, "(-> {a} {b})"),
        }
    }
}

/// Terms in a single-variable context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LTerm {
    Var(String),
    Const(String),
    UnitVal,
    Pair(Box<LTerm>, Box<LTerm>),
    Proj1(Box<LTerm>),
    Proj2(Box<LTerm>),
    Lam(String, LType, Box<LTerm>),
    App(Box<LTerm>, Box<LTerm>),
}

impl LTerm {
    pub fn var(x: &str) -> Self {
        LTerm::Var(x.to_string())
    }

    pub fn constant(c: &str) -> Self {
        LTerm::Const(c.to_string())
    }

    pub fn pair(a: LTerm, b: LTerm) -> Self {
        LTerm::Pair(Box::new(a), Box::new(b))
    }

    pub fn app(f: LTerm, a: LTerm) -> Self {
        LTerm::App(Box::new(f), Box::new(a))
    }

    pub fn lam(y: &str, ty: LType, body: LTerm) -> Self {
        LTerm::Lam(y.to_string(), ty, Box::new(body))
    }

    pub fn depth(&self) -> usize {
        match self {
            LTerm::Var(_) | LTerm::Const(_) | LTerm::UnitVal => 1,
            LTerm::Proj1(m) | LTerm::Proj2(m) | LTerm::Lam(_, _, m) => 1 + m.depth(),
            LTerm::Pair(a, b) | LTerm::App(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            LTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            LTerm::Const(_) | LTerm::UnitVal => {}
            LTerm::Proj1(m) | LTerm::Proj2(m) => m.collect_free(bound, out),
            LTerm::Pair(a, b) | LTerm::App(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            LTerm::Lam(y, _, m) => {
                bound.push(y.clone());
                m.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Capture-avoiding substitution `self[x := n]`.
    pub fn subst(&self, x: &str, n: &LTerm) -> LTerm {
        match self {
            LTerm::Var(y) if y == x => n.clone(),
            LTerm::Var(_) | LTerm::Const(_) | LTerm::UnitVal => self.clone(),
            LTerm::Proj1(m) => LTerm::Proj1(Box::new(m.subst(x, n))),
            LTerm::Proj2(m) => LTerm::Proj2(Box::new(m.subst(x, n))),
            LTerm::Pair(a, b) => LTerm::pair(a.subst(x, n), b.subst(x, n)),
            LTerm::App(a, b) => LTerm::app(a.subst(x, n), b.subst(x, n)),
            LTerm::Lam(y, _, _) if y == x => self.clone(),
            LTerm::Lam(y, ty, body) => {
                let fv = n.free_vars();
                if fv.contains(y) {
                    let mut avoid = fv;
                    avoid.extend(body.free_vars());
                    avoid.insert(x.to_string());
                    let fresh = fresh_name(y, &avoid);
                    let renamed = body.subst(y, &LTerm::Var(fresh.clone()));
                    LTerm::lam(&fresh, ty.clone(), renamed.subst(x, n))
                } else {
                    LTerm::lam(y, ty.clone(), body.subst(x, n))
                }
            }
        }
    }

    /// Composition of terms in context: `(self ∘ first)` substitutes
    /// `first` for the context variable of `self`.
    pub fn compose_after(&self, ctx_var: &str, first: &LTerm) -> LTerm {
        self.subst(ctx_var, first)
    }

    /// Parses the s-expression syntax. Identifiers bound by `lam` or equal
    /// to `ctx_var` are variables; every other identifier is a constant.
    pub fn parse(src: &str, ctx_var: &str) -> Result<LTerm> {
        let sx = Sexp::parse(src)?;
        let mut scope = vec![ctx_var.to_string()];
        LTerm::from_sexp(&sx, &mut scope)
    }

    fn from_sexp(sx: &Sexp, scope: &mut Vec<String>) -> Result<LTerm> {
        match sx {
            Sexp::Atom(a) if a == "unit" => Ok(LTerm::UnitVal),
            Sexp::Atom(a) if scope.contains(a) => Ok(LTerm::Var(a.clone())),
            Sexp::Atom(a) => Ok(LTerm::Const(a.clone())),
            Sexp::List(items) => {
                let bad = || Error::Type(format!("malformed term `{sx}`"));
                let (head, rest) = items.split_first().ok_or_else(bad)?;
                match (head, rest) {
                    (Sexp::Atom(h), [a, b]) if h == "pair" => Ok(LTerm::pair(
                        LTerm::from_sexp(a, scope)?,
                        LTerm::from_sexp(b, scope)?,
                    )),
                    (Sexp::Atom(h), [m]) if h == "fst" => {
                        Ok(LTerm::Proj1(Box::new(LTerm::from_sexp(m, scope)?)))
                    }
                    (Sexp::Atom(h), [m]) if h == "snd" => {
                        Ok(LTerm::Proj2(Box::new(LTerm::from_sexp(m, scope)?)))
                    }
                    (Sexp::Atom(h), [Sexp::Atom(y), ty, body]) if h == "lam" => {
                        let ty = LType::from_sexp(ty)?;
                        scope.push(y.clone());
                        let body = LTerm::from_sexp(body, scope);
                        scope.pop();
                        Ok(LTerm::lam(y, ty, body?))
                    }
                    (Sexp::Atom(h), [f, args @ ..]) if h == "app" && !args.is_empty() => {
                        let mut acc = LTerm::from_sexp(f, scope)?;
                        for a in args {
                            acc = LTerm::app(acc, LTerm::from_sexp(a, scope)?);
                        }
                        Ok(acc)
                    }
                    _ => Err(bad()),
                }
            }
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many names")
}

impl fmt::Display for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LTerm::Var(x) | LTerm::Const(x) => write!(f, "{x}"),
            LTerm::UnitVal => write!(f, "unit"),
            LTerm::Pair(a, b) => write!(f, "(pair {a} {b})"),
            LTerm::Proj1(m) => write!(f, "(fst {m})"),
            LTerm::Proj2(m) => write!(f, "(snd {m})"),
            LTerm::Lam(y, ty, m) => write!(f, "(lam {y} {ty} {m})"),
            LTerm::App(a, b) => write!(f, "(app {a} {b})"),
        }
    }
}

/// Minimal s-expressions: atoms and parenthesized lists. `;` comments run
/// to the end of the line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub(crate) fn parse(src: &str) -> Result<Sexp> {
        let mut toks = Vec::new();
        for (ln, line) in src.lines().enumerate() {
            let line = line.split(';').next().unwrap_or("");
            let mut cur = String::new();
            let mut start = 0;
            for (col, ch) in line.char_indices() {
                if ch == '(' || ch == ')' || ch.is_whitespace() {
                    if !cur.is_empty() {
                        toks.push((std::mem::take(&mut cur), ln + 1, start + 1));
                    }
                    if !ch.is_whitespace() {
                        toks.push((ch.to_string(), ln + 1, col + 1));
                    }
                } else {
                    if cur.is_empty() {
                        start = col;
                    }
                    cur.push(ch);
                }
            }
            if !cur.is_empty() {
                toks.push((cur, ln + 1, start + 1));
            }
        }
        let mut pos = 0;
        let sx = Sexp::read(&toks, &mut pos)?;
        if let Some((t, line, column)) = toks.get(pos) {
            return Err(Error::Syntax {
                line: *line,
                column: *column,
                message: format!("unexpected `{t}` after the term"),
            });
        }
        Ok(sx)
    }

    fn read(toks: &[(String, usize, usize)], pos: &mut usize) -> Result<Sexp> {
        let Some((t, line, column)) = toks.get(*pos) else {
            return Err(Error::Syntax {
                line: toks.last().map_or(1, |t| t.1),
                column: toks.last().map_or(1, |t| t.2),
                message: "unexpected end of input".into(),
            });
        };
        *pos += 1;
        match t.as_str() {
            "(" => {
                let mut items = Vec::new();
                loop {
                    match toks.get(*pos) {
                        Some((c, _, _)) if c == ")" => {
                            *pos += 1;
                            return Ok(Sexp::List(items));
                        }
                        Some(_) => items.push(Sexp::read(toks, pos)?),
                        None => {
                            return Err(Error::Syntax {
                                line: *line,
                                column: *column,
                                message: "unclosed `(`".into(),
                            })
                        }
                    }
                }
            }
            ")" => Err(Error::Syntax {
                line: *line,
                column: *column,
                message: "unexpected `)`".into(),
            }),
            _ => Ok(Sexp::Atom(t.clone())),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => write!(f, "{a}"),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn types_parse_right_associative() {
        let t = LType::parse("(-> nat nat nat)").unwrap();
        assert_eq!(
            t,
            LType::arrow(
                LType::base("nat"),
                LType::arrow(LType::base("nat"), LType::base("nat"))
            )
        );
        assert_eq!(LType::parse(&t.to_string()).unwrap(), t);
        assert_eq!(LType::parse("(-> (-> nat nat) nat)").unwrap().order(), 2);
    }

    #[test]
    fn terms_resolve_constants() {
        let m = LTerm::parse("(lam y nat (app succ y))", "x").unwrap();
        assert_eq!(
            m,
            LTerm::lam(
                "y",
                LType::base("nat"),
                LTerm::app(LTerm::constant("succ"), LTerm::var("y"))
            )
        );
        assert_eq!(LTerm::parse(&m.to_string(), "x").unwrap(), m);
        let n = LTerm::parse("(app add x x)", "x").unwrap();
        assert_eq!(n.depth(), 3);
        assert!(LTerm::parse("(pair x", "x").is_err());
        assert!(LTerm::parse("(fst x) y", "x").is_err());
    }

    #[test]
    fn substitution_avoids_capture() {
        // (lam y nat (pair x y))[x := y] must not capture the free y.
        let m = LTerm::parse("(lam y nat (pair x y))", "x").unwrap();
        let r = m.subst("x", &LTerm::var("y"));
        match &r {
            LTerm::Lam(z, _, body) => {
                assert_ne!(z, "y");
                assert_eq!(**body, LTerm::pair(LTerm::var("y"), LTerm::Var(z.clone())));
            }
            _ => panic!("{r}"),
        }
        let shadow = LTerm::parse("(lam x nat x)", "x").unwrap();
        assert_eq!(shadow.subst("x", &LTerm::UnitVal), shadow);
    }
}
