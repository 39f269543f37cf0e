use num_rational::Ratio;

use super::ast::{AExpr, ArithOp, BExpr, CmpOp, Program};
use super::RESERVED;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Assign,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Slash,
    Le,
    Lt,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Eq => "=",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |tok: Tok, out: &mut Vec<Spanned>| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            push(Tok::Ident(chars[start..i].iter().collect()), &mut out);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            col += i - start;
            push(Tok::Num(chars[start..i].iter().collect()), &mut out);
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = match (two.as_str(), c) {
            (":=", _) => (Tok::Assign, 2),
            ("<=", _) => (Tok::Le, 2),
            (_, '<') => (Tok::Lt, 1),
            (_, '=') => (Tok::Eq, 1),
            (_, ';') => (Tok::Semi, 1),
            (_, ',') => (Tok::Comma, 1),
            (_, '(') => (Tok::LParen, 1),
            (_, ')') => (Tok::RParen, 1),
            (_, '{') => (Tok::LBrace, 1),
            (_, '}') => (Tok::RBrace, 1),
            (_, '+') => (Tok::Plus, 1),
            (_, '-') => (Tok::Minus, 1),
            (_, '*') => (Tok::Star, 1),
            (_, '/') => (Tok::Slash, 1),
            _ => {
                return Err(Error::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        push(tok, &mut out);
        i += len;
        col += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let s = &self.toks[self.pos];
        Err(Error::Syntax {
            line: s.line,
            column: s.column,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        self.error(format!(
            "expected {wanted}, found {}",
            self.peek().describe()
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{}`", tok.text()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => {
                self.error(format!("reserved word `{s}` cannot be used as a variable"))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(s) if !s.contains('.') => {
                let text = if neg { format!("-{s}") } else { s };
                match text.parse::<i64>() {
                    Ok(v) => {
                        self.bump();
                        Ok(v)
                    }
                    Err(_) => self.error(format!("integer literal `{text}` out of range")),
                }
            }
            _ => self.unexpected("integer"),
        }
    }

    fn rat(&mut self) -> Result<Ratio<i64>> {
        let first = match self.peek().clone() {
            Tok::Num(s) => s,
            _ => return self.unexpected("probability"),
        };
        self.bump();
        let value = if let Some((whole, frac)) = first.split_once('.') {
            let digits = frac.len() as u32;
            let denom = 10i64
                .checked_pow(digits)
                .ok_or(())
                .or_else(|_| self.error("too many decimal digits"))?;
            let numer = format!("{whole}{frac}")
                .parse::<i64>()
                .or_else(|_| self.error("probability out of range"))?;
            Ratio::new(numer, denom)
        } else {
            let numer = first
                .parse::<i64>()
                .or_else(|_| self.error("probability out of range"))?;
            if *self.peek() == Tok::Slash {
                self.bump();
                let denom = match self.peek().clone() {
                    Tok::Num(s) if !s.contains('.') => s
                        .parse::<i64>()
                        .or_else(|_| self.error("probability out of range"))?,
                    _ => return self.unexpected("denominator"),
                };
                if denom == 0 {
                    return self.error("zero denominator");
                }
                self.bump();
                Ratio::new(numer, denom)
            } else {
                Ratio::from_integer(numer)
            }
        };
        if value > Ratio::from_integer(1) {
            return self.error("probability must lie in [0,1]");
        }
        Ok(value)
    }

    fn prog(&mut self) -> Result<Program> {
        let mut stmts = vec![self.stmt()?];
        while *self.peek() == Tok::Semi {
            self.bump();
            stmts.push(self.stmt()?);
        }
        Ok(Program::seq_all(stmts))
    }

    fn block(&mut self) -> Result<Program> {
        self.expect(Tok::LBrace)?;
        let p = self.prog()?;
        self.expect(Tok::RBrace)?;
        Ok(p)
    }

    fn stmt(&mut self) -> Result<Program> {
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.unexpected("statement"),
        };
        match word.as_str() {
            "skip" => {
                self.bump();
                Ok(Program::Skip)
            }
            "diverge" => {
                self.bump();
                Ok(Program::Diverge)
            }
            "if" => {
                self.bump();
                let b = self.bexpr()?;
                let then = self.block()?;
                self.expect_keyword("else")?;
                let els = self.block()?;
                Ok(Program::if_(b, then, els))
            }
            "while" => {
                self.bump();
                let b = self.bexpr()?;
                let body = self.block()?;
                Ok(Program::while_(b, body))
            }
            "addvar" => {
                self.bump();
                Ok(Program::AddVar(self.ident()?))
            }
            "delvar" => {
                self.bump();
                Ok(Program::DelVar(self.ident()?))
            }
            _ => {
                let var = self.ident()?;
                self.expect(Tok::Assign)?;
                if self.is_keyword("havoc") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let lo = self.int()?;
                    self.expect(Tok::Comma)?;
                    let hi = self.int()?;
                    self.expect(Tok::RParen)?;
                    if lo > hi {
                        return self.error(format!("empty havoc range [{lo}, {hi}]"));
                    }
                    Ok(Program::AssignHavoc { var, lo, hi })
                } else if self.is_keyword("flip") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let p = self.rat()?;
                    self.expect(Tok::Comma)?;
                    let lhs = self.aexpr()?;
                    self.expect(Tok::Comma)?;
                    let rhs = self.aexpr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Program::AssignFlip { var, p, lhs, rhs })
                } else {
                    Ok(Program::Assign(var, self.aexpr()?))
                }
            }
        }
    }

    fn aexpr(&mut self) -> Result<AExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = AExpr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<AExpr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.factor()?;
            lhs = AExpr::bin(ArithOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<AExpr> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(AExpr::Lit(self.int()?)),
            Tok::Minus => {
                if matches!(self.peek_at(1), Tok::Num(_)) {
                    Ok(AExpr::Lit(self.int()?))
                } else {
                    self.bump();
                    let e = self.factor()?;
                    Ok(AExpr::bin(ArithOp::Sub, AExpr::Lit(0), e))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.aexpr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(AExpr::Var(self.ident()?)),
            _ => self.unexpected("expression"),
        }
    }

    fn bexpr(&mut self) -> Result<BExpr> {
        let mut lhs = self.bconj()?;
        while self.is_keyword("or") {
            self.bump();
            let rhs = self.bconj()?;
            lhs = BExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bconj(&mut self) -> Result<BExpr> {
        let mut lhs = self.bneg()?;
        while self.is_keyword("and") {
            self.bump();
            let rhs = self.bneg()?;
            lhs = BExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bneg(&mut self) -> Result<BExpr> {
        if self.is_keyword("not") {
            self.bump();
            return Ok(BExpr::not(self.bneg()?));
        }
        self.batom()
    }

    fn batom(&mut self) -> Result<BExpr> {
        if self.is_keyword("true") {
            self.bump();
            return Ok(BExpr::True);
        }
        if self.is_keyword("false") {
            self.bump();
            return Ok(BExpr::False);
        }
        if *self.peek() == Tok::LParen {
            // `(` opens either a boolean group or an arithmetic operand
            let save = self.pos;
            self.bump();
            if let Ok(b) = self.bexpr() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if !matches!(self.peek(), Tok::Le | Tok::Lt | Tok::Eq) {
                        return Ok(b);
                    }
                }
            }
            self.pos = save;
        }
        let lhs = self.aexpr()?;
        let op = match self.peek() {
            Tok::Le => CmpOp::Le,
            Tok::Lt => CmpOp::Lt,
            Tok::Eq => CmpOp::Eq,
            _ => return self.unexpected("comparison"),
        };
        self.bump();
        let rhs = self.aexpr()?;
        Ok(BExpr::Cmp(op, lhs, rhs))
    }

    fn finish(&mut self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }
}

/// Parses a `.whl` program into sequence normal form.
pub fn parse(src: &str) -> Result<Program> {
    let mut p = Parser::new(src)?;
    let prog = p.prog()?;
    p.finish()?;
    Ok(prog)
}

pub fn parse_aexpr(src: &str) -> Result<AExpr> {
    let mut p = Parser::new(src)?;
    let e = p.aexpr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_bexpr(src: &str) -> Result<BExpr> {
    let mut p = Parser::new(src)?;
    let b = p.bexpr()?;
    p.finish()?;
    Ok(b)
}
