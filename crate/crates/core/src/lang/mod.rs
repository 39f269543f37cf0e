//! Syntax of the while language.
//!
//! Programs form a one-object category under sequential composition; the
//! [`Program::seq`] constructor keeps sequences right-associated and free
//! of `skip` so that the identity and associativity laws hold on the nose.
//! The scoped variant (with `addvar`/`delvar`) is stratified by
//! [`check_scoped`].

mod ast;
mod parse;
mod scope;

pub use ast::{AExpr, ArithOp, BExpr, CmpOp, Program};
pub use parse::{parse, parse_aexpr, parse_bexpr};
pub use scope::{check_scoped, seq_compose, seq_compose_scoped, VarSet};

/// Words that cannot be used as variable names.
pub const RESERVED: &[&str] = &[
    "skip", "if", "else", "while", "havoc", "flip", "diverge", "addvar", "delvar", "true", "false",
    "not", "and", "or",
];
