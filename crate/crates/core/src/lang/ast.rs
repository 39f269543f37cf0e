use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Le,
    Eq,
    Lt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Lt => lhs < rhs,
        }
    }
}

/// Arithmetic expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AExpr {
    Lit(i64),
    Var(String),
    BinOp(ArithOp, Box<AExpr>, Box<AExpr>),
}

impl AExpr {
    pub fn var(name: &str) -> Self {
        AExpr::Var(name.to_string())
    }

    pub fn bin(op: ArithOp, lhs: AExpr, rhs: AExpr) -> Self {
        AExpr::BinOp(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn size(&self) -> usize {
        match self {
            AExpr::Lit(_) | AExpr::Var(_) => 1,
            AExpr::BinOp(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            AExpr::Lit(_) => {}
            AExpr::Var(x) => {
                out.insert(x.clone());
            }
            AExpr::BinOp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            AExpr::BinOp(ArithOp::Add | ArithOp::Sub, ..) => 1,
            AExpr::BinOp(ArithOp::Mul, ..) => 2,
            _ => 3,
        }
    }
}

/// Boolean expressions; kept apart from [`AExpr`] so guards are two-valued
/// by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BExpr {
    True,
    False,
    Cmp(CmpOp, AExpr, AExpr),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
}

impl BExpr {
    pub fn cmp(op: CmpOp, lhs: AExpr, rhs: AExpr) -> Self {
        BExpr::Cmp(op, lhs, rhs)
    }

    pub fn not(b: BExpr) -> Self {
        BExpr::Not(Box::new(b))
    }

    pub fn and(a: BExpr, b: BExpr) -> Self {
        BExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BExpr, b: BExpr) -> Self {
        BExpr::Or(Box::new(a), Box::new(b))
    }

    /// Comparison atoms count as a single node.
    pub fn size(&self) -> usize {
        match self {
            BExpr::True | BExpr::False | BExpr::Cmp(..) => 1,
            BExpr::Not(b) => 1 + b.size(),
            BExpr::And(a, b) | BExpr::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BExpr::True | BExpr::False => {}
            BExpr::Cmp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            BExpr::Not(b) => b.collect_vars(out),
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            BExpr::Or(..) => 1,
            BExpr::And(..) => 2,
            BExpr::Not(..) => 3,
            _ => 4,
        }
    }
}

/// While-language programs.
///
/// Values built through [`Program::seq`] or [`Program::normalize`] are in
/// sequence normal form: `Seq` is right-associated and never has `Skip` as
/// a component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Skip,
    Seq(Box<Program>, Box<Program>),
    Assign(String, AExpr),
    AssignHavoc {
        var: String,
        lo: i64,
        hi: i64,
    },
    AssignFlip {
        var: String,
        p: Ratio<i64>,
        lhs: AExpr,
        rhs: AExpr,
    },
    Diverge,
    If(BExpr, Box<Program>, Box<Program>),
    While(BExpr, Box<Program>),
    AddVar(String),
    DelVar(String),
}

impl Program {
    pub fn assign(var: &str, e: AExpr) -> Self {
        Program::Assign(var.to_string(), e)
    }

    pub fn if_(b: BExpr, then: Program, els: Program) -> Self {
        Program::If(b, Box::new(then.normalize()), Box::new(els.normalize()))
    }

    pub fn while_(b: BExpr, body: Program) -> Self {
        Program::While(b, Box::new(body.normalize()))
    }

    /// Sequential composition in normal form: `seq(Skip, q) = q`,
    /// `seq(p, Skip) = p` and `seq(seq(a, b), c) = seq(a, seq(b, c))`.
    pub fn seq(p: Program, q: Program) -> Program {
        match (p, q) {
            (Program::Skip, q) => q,
            (p, Program::Skip) => p,
            (Program::Seq(a, b), q) => Program::Seq(a, Box::new(Program::seq(*b, q))),
            (p, q) => Program::Seq(Box::new(p), Box::new(q)),
        }
    }

    /// Folds a list of statements into a normalized sequence.
    pub fn seq_all<I: IntoIterator<Item = Program>>(stmts: I) -> Program {
        let stmts: Vec<Program> = stmts.into_iter().collect();
        stmts
            .into_iter()
            .rev()
            .fold(Program::Skip, |acc, s| Program::seq(s, acc))
    }

    pub fn normalize(self) -> Program {
        match self {
            Program::Seq(a, b) => Program::seq(a.normalize(), b.normalize()),
            Program::If(b, t, e) => {
                Program::If(b, Box::new(t.normalize()), Box::new(e.normalize()))
            }
            Program::While(b, body) => Program::While(b, Box::new(body.normalize())),
            other => other,
        }
    }

    pub fn is_normal(&self) -> bool {
        match self {
            Program::Seq(a, b) => {
                !matches!(**a, Program::Seq(..) | Program::Skip)
                    && !matches!(**b, Program::Skip)
                    && a.is_normal()
                    && b.is_normal()
            }
            Program::If(_, t, e) => t.is_normal() && e.is_normal(),
            Program::While(_, body) => body.is_normal(),
            _ => true,
        }
    }

    /// Number of AST nodes, counting expression nodes and treating each
    /// comparison atom as one node.
    pub fn size(&self) -> usize {
        match self {
            Program::Skip | Program::Diverge | Program::AddVar(_) | Program::DelVar(_) => 1,
            Program::AssignHavoc { .. } => 2,
            Program::Assign(_, e) => 1 + e.size(),
            Program::AssignFlip { lhs, rhs, .. } => 1 + lhs.size() + rhs.size(),
            Program::Seq(a, b) => 1 + a.size() + b.size(),
            Program::If(b, t, e) => 1 + b.size() + t.size() + e.size(),
            Program::While(b, body) => 1 + b.size() + body.size(),
        }
    }

    /// Statements of a normalized sequence, in execution order.
    pub fn statements(&self) -> Vec<&Program> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Program::Seq(a, b) = cur {
            out.push(&**a);
            cur = b;
        }
        out.push(cur);
        out
    }

    /// Variables written by the program.
    pub fn assigned_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_assigned(&mut out);
        out
    }

    fn collect_assigned(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::Assign(x, _)
            | Program::AssignHavoc { var: x, .. }
            | Program::AssignFlip { var: x, .. }
            | Program::AddVar(x)
            | Program::DelVar(x) => {
                out.insert(x.clone());
            }
            Program::Seq(a, b) | Program::If(_, a, b) => {
                a.collect_assigned(out);
                b.collect_assigned(out);
            }
            Program::While(_, body) => body.collect_assigned(out),
            Program::Skip | Program::Diverge => {}
        }
    }

    /// Every variable the program reads or writes.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = self.assigned_vars();
        self.collect_read(&mut out);
        out
    }

    fn collect_read(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::Assign(_, e) => e.collect_vars(out),
            Program::AssignFlip { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Program::Seq(a, b) => {
                a.collect_read(out);
                b.collect_read(out);
            }
            Program::If(g, a, b) => {
                g.collect_vars(out);
                a.collect_read(out);
                b.collect_read(out);
            }
            Program::While(g, body) => {
                g.collect_vars(out);
                body.collect_read(out);
            }
            _ => {}
        }
    }

    pub fn uses_havoc(&self) -> bool {
        self.any(&|p| matches!(p, Program::AssignHavoc { .. }))
    }

    pub fn uses_flip(&self) -> bool {
        self.any(&|p| matches!(p, Program::AssignFlip { .. }))
    }

    pub fn uses_scoping(&self) -> bool {
        self.any(&|p| matches!(p, Program::AddVar(_) | Program::DelVar(_)))
    }

    pub fn any(&self, pred: &dyn Fn(&Program) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Program::Seq(a, b) | Program::If(_, a, b) => a.any(pred) || b.any(pred),
            Program::While(_, body) => body.any(pred),
            _ => false,
        }
    }
}

impl fmt::Display for AExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AExpr::Lit(k) => write!(f, "{k}"),
            AExpr::Var(x) => write!(f, "{x}"),
            AExpr::BinOp(op, l, r) => {
                let prec = self.precedence();
                if l.precedence() < prec {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // left-associative: equal precedence on the right needs parens
                if r.precedence() <= prec {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BExpr::True => write!(f, "true"),
            BExpr::False => write!(f, "false"),
            BExpr::Cmp(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
            BExpr::Not(b) => {
                if b.precedence() < 4 {
                    write!(f, "not ({b})")
                } else {
                    write!(f, "not {b}")
                }
            }
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                let prec = self.precedence();
                let word = if prec == 1 { "or" } else { "and" };
                if a.precedence() < prec {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {word} ")?;
                if b.precedence() <= prec {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

fn fmt_ratio(p: &Ratio<i64>) -> String {
    if *p.denom() == 1 {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

impl Program {
    fn fmt_indented(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let pad = "  ".repeat(indent);
        let stmts = self.statements();
        for (i, s) in stmts.iter().enumerate() {
            write!(f, "{pad}")?;
            s.fmt_stmt(f, indent)?;
            if i + 1 < stmts.len() {
                writeln!(f, ";")?;
            }
        }
        Ok(())
    }

    fn fmt_stmt(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let pad = "  ".repeat(indent);
        match self {
            Program::Skip => write!(f, "skip"),
            Program::Diverge => write!(f, "diverge"),
            Program::Assign(x, e) => write!(f, "{x} := {e}"),
            Program::AssignHavoc { var, lo, hi } => write!(f, "{var} := havoc({lo}, {hi})"),
            Program::AssignFlip { var, p, lhs, rhs } => {
                write!(f, "{var} := flip({}, {lhs}, {rhs})", fmt_ratio(p))
            }
            Program::AddVar(x) => write!(f, "addvar {x}"),
            Program::DelVar(x) => write!(f, "delvar {x}"),
            Program::If(b, t, e) => {
                writeln!(f, "if {b} {{")?;
                t.fmt_indented(f, indent + 1)?;
                writeln!(f)?;
                writeln!(f, "{pad}}} else {{")?;
                e.fmt_indented(f, indent + 1)?;
                writeln!(f)?;
                write!(f, "{pad}}}")
            }
            Program::While(b, body) => {
                writeln!(f, "while {b} {{")?;
                body.fmt_indented(f, indent + 1)?;
                writeln!(f)?;
                write!(f, "{pad}}}")
            }
            Program::Seq(..) => self.fmt_indented(f, indent),
        }
    }

    /// Single-line rendering, used in reports and witnesses.
    pub fn to_inline(&self) -> String {
        self.to_string()
            .lines()
            .map(str::trim)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indented(f, 0)
    }
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_inline())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assign(x: &str, k: i64) -> Program {
        Program::assign(x, AExpr::Lit(k))
    }

    #[test]
    fn seq_unit_laws() {
        let p = assign("x", 1);
        assert_eq!(Program::seq(Program::Skip, p.clone()), p);
        assert_eq!(Program::seq(p.clone(), Program::Skip), p);
    }

    #[test]
    fn seq_associativity_normal_form() {
        let (a, b, c) = (assign("x", 1), assign("y", 2), assign("x", 3));
        let left = Program::seq(Program::seq(a.clone(), b.clone()), c.clone());
        let right = Program::seq(a, Program::seq(b, c));
        assert_eq!(left, right);
        assert!(left.is_normal());
    }

    #[test]
    fn normalize_removes_nested_skips() {
        let p = Program::Seq(
            Box::new(Program::Seq(
                Box::new(Program::Skip),
                Box::new(assign("x", 1)),
            )),
            Box::new(Program::Skip),
        );
        assert_eq!(p.normalize(), assign("x", 1));
    }

    #[test]
    fn sizes() {
        // while x <= 1 { x := x + 1 }
        let body = Program::assign(
            "x",
            AExpr::bin(ArithOp::Add, AExpr::var("x"), AExpr::Lit(1)),
        );
        let w = Program::while_(BExpr::cmp(CmpOp::Le, AExpr::var("x"), AExpr::Lit(1)), body);
        assert_eq!(w.size(), 6);
    }

    #[test]
    fn expression_printing_is_minimal() {
        let e = AExpr::bin(
            ArithOp::Sub,
            AExpr::bin(ArithOp::Mul, AExpr::Lit(4), AExpr::var("x")),
            AExpr::Lit(2),
        );
        assert_eq!(e.to_string(), "4 * x - 2");
        let e = AExpr::bin(
            ArithOp::Sub,
            AExpr::var("a"),
            AExpr::bin(ArithOp::Sub, AExpr::var("b"), AExpr::var("c")),
        );
        assert_eq!(e.to_string(), "a - (b - c)");
    }
}
