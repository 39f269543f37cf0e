use std::collections::BTreeMap;

use crate::lang::{parse, AExpr, ArithOp, BExpr, CmpOp, Program};

/// Parameters of the exhaustive program enumeration.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub vars: Vec<String>,
    pub literals: Vec<i64>,
    pub ops: Vec<ArithOp>,
    /// Guards are `v <= k` for each variable `v` and each bound `k`.
    pub guard_bounds: Vec<i64>,
    pub max_size: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            vars: vec!["x".into(), "y".into()],
            literals: vec![0, 1],
            ops: vec![ArithOp::Add, ArithOp::Sub],
            guard_bounds: vec![0, 1],
            max_size: 7,
        }
    }
}

impl CorpusSpec {
    fn aexprs(&self) -> BTreeMap<usize, Vec<AExpr>> {
        let mut by_size: BTreeMap<usize, Vec<AExpr>> = BTreeMap::new();
        let atoms = self
            .vars
            .iter()
            .map(|v| AExpr::var(v))
            .chain(self.literals.iter().map(|k| AExpr::Lit(*k)))
            .collect();
        by_size.insert(1, atoms);
        for s in 2..self.max_size {
            let mut out = Vec::new();
            for l in 1..s - 1 {
                let (Some(ls), Some(rs)) = (by_size.get(&l), by_size.get(&(s - 1 - l))) else {
                    continue;
                };
                for op in &self.ops {
                    for a in ls {
                        for b in rs {
                            out.push(AExpr::bin(*op, a.clone(), b.clone()));
                        }
                    }
                }
            }
            by_size.insert(s, out);
        }
        by_size
    }

    fn guards(&self) -> Vec<BExpr> {
        let mut out = Vec::new();
        for v in &self.vars {
            for k in &self.guard_bounds {
                out.push(BExpr::cmp(CmpOp::Le, AExpr::var(v), AExpr::Lit(*k)));
            }
        }
        out
    }

    /// Every normalized program built from skip, assignment, conditionals,
    /// loops and sequencing with at most `max_size` AST nodes, smallest
    /// first.
    pub fn enumerate(&self) -> Vec<Program> {
        let exprs = self.aexprs();
        let guards = self.guards();
        let n = self.max_size;
        // progs[s]: all normal programs of size s; stmts[s]: the non-Seq ones.
        let mut progs: Vec<Vec<Program>> = vec![Vec::new(); n + 1];
        let mut stmts: Vec<Vec<Program>> = vec![Vec::new(); n + 1];
        for s in 1..=n {
            let mut st = Vec::new();
            if s == 1 {
                st.push(Program::Skip);
            }
            if let Some(es) = exprs.get(&(s - 1)) {
                for v in &self.vars {
                    for e in es {
                        st.push(Program::assign(v, e.clone()));
                    }
                }
            }
            for g in &guards {
                for t in 1..s.saturating_sub(2) {
                    for a in &progs[t] {
                        for b in &progs[s - 2 - t] {
                            st.push(Program::if_(g.clone(), a.clone(), b.clone()));
                        }
                    }
                }
                if s >= 3 {
                    for body in &progs[s - 2] {
                        st.push(Program::while_(g.clone(), body.clone()));
                    }
                }
            }
            let mut ps = st.clone();
            for a in 1..s.saturating_sub(1) {
                for head in stmts[a].iter().filter(|p| **p != Program::Skip) {
                    for tail in progs[s - 1 - a].iter().filter(|p| **p != Program::Skip) {
                        ps.push(Program::Seq(Box::new(head.clone()), Box::new(tail.clone())));
                    }
                }
            }
            stmts[s] = st;
            progs[s] = ps;
        }
        progs.into_iter().flatten().collect()
    }
}

const HAND_WRITTEN: [&str; 20] = [
    "x := 4*x - 2; if x <= 0 { x := 0 - x } else { skip }",
    "x := 0; y := 1",
    "x := 0; while x < 5 { x := x + 1 }",
    "y := 0; while x <= 2 { x := x + 1; y := y + 2 }",
    "while x < 3 { y := 0; while y < x { y := y + 1 }; x := x + 1 }",
    "if x <= y { x := y - x } else { y := x - y }",
    "x := x + y; y := x - y; x := x - y",
    "while y <= 1 { if x <= 0 { x := 1 } else { x := x * 2 }; y := y + 1 }",
    "x := 1; while 0 < y { x := x * 2; y := y - 1 }",
    "if x = y { skip } else { x := y; y := 0 }",
    "while x <= 3 and y <= 3 { x := x + 1; y := y + 2 }",
    "if not (x < 2) or y = 0 { x := 0 } else { y := y * y }",
    "x := 0; while x <= 1 { skip }",
    "y := x; while 1 <= y { y := y - 1; x := x + 1 }",
    "while x < 4 { while y < 2 { y := y + 1 }; x := x + y }",
    "x := 3 * x + 1; if 5 < x { x := x - 5 } else { x := x + 2 }",
    "if x <= 1 { if y <= 1 { x := 1 } else { x := 2 } } else { x := 3 }",
    "y := 2; while 0 < y { x := x + y; y := y - 1 }",
    "x := y * y - y; y := x + 1",
    "while x = 0 { x := y; y := y + 1 }",
];

/// Twenty larger programs over `x` and `y`, including nested loops.
pub fn hand_written() -> Vec<Program> {
    HAND_WRITTEN
        .iter()
        .map(|s| parse(s).expect("hand-written corpus parses"))
        .collect()
}

/// The default law corpus: the exhaustive enumeration plus the
/// hand-written programs.
pub fn law_corpus() -> Vec<Program> {
    let mut out = CorpusSpec::default().enumerate();
    out.extend(hand_written());
    out
}

/// The two programs from the interval example: `x := 4*x - 2` and the
/// conditional negation.
pub fn interval_example() -> (Program, Program) {
    (
        parse("x := 4*x - 2").expect("parses"),
        parse("if x <= 0 { x := 0 - x } else { skip }").expect("parses"),
    )
}

/// Pairs `(p, q)` whose composition `p; q` is checked against the
/// composition of the separate interpretations: every head/tail split of
/// a corpus sequence, plus the hand-written programs against each other.
pub fn composition_pairs(corpus: &[Program]) -> Vec<(Program, Program)> {
    let mut out = Vec::new();
    for p in corpus {
        let stmts = p.statements();
        for i in 1..stmts.len() {
            let head = Program::seq_all(stmts[..i].iter().map(|s| (*s).clone()));
            let tail = Program::seq_all(stmts[i..].iter().map(|s| (*s).clone()));
            out.push((head, tail));
        }
    }
    let hw = hand_written();
    for a in &hw {
        for b in &hw {
            out.push((a.clone(), b.clone()));
        }
    }
    let (p0, p1) = interval_example();
    out.push((p0, p1));
    out.push((
        parse("x := 0").expect("parses"),
        parse("y := 1").expect("parses"),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn count_by_size(ps: &[Program]) -> Vec<usize> {
        let mut c = vec![0; 8];
        for p in ps {
            c[p.size()] += 1;
        }
        c
    }

    #[test]
    fn enumeration_counts() {
        let ps = CorpusSpec::default().enumerate();
        // Closed-form counts from the generating recurrences.
        assert_eq!(count_by_size(&ps), vec![0, 1, 8, 4, 100, 144, 1776, 3248]);
        let distinct: BTreeSet<_> = ps.iter().collect();
        assert_eq!(distinct.len(), ps.len());
        assert!(ps.iter().all(|p| p.is_normal() && p.size() <= 7));
    }

    #[test]
    fn hand_written_are_larger_and_loop() {
        let hw = hand_written();
        assert_eq!(hw.len(), 20);
        assert!(hw.iter().any(|p| {
            p.any(&|q| matches!(q, Program::While(_, b) if b.any(&|r| matches!(r, Program::While(..)))))
        }));
    }

    #[test]
    fn pairs_recompose() {
        let corpus = law_corpus();
        for (p, q) in composition_pairs(&corpus).iter().take(2000) {
            let pq = Program::seq(p.clone(), q.clone());
            assert!(pq.is_normal());
        }
    }
}
