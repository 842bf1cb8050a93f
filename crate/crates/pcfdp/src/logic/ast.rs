use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::syntax::{Lit, OpKind, Term, Type};

/// Assertion-side expressions: constants, variables, and operator
/// applications. No lambdas, no application, no quotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Lit),
    Var(String),
    Op(OpKind, Vec<Expr>),
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Lit::Int(BigInt::from(n)))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Const(Lit::Bool(b))
    }

    pub fn unit() -> Expr {
        Expr::Const(Lit::Unit)
    }

    pub fn op2(op: OpKind, a: Expr, b: Expr) -> Expr {
        Expr::Op(op, vec![a, b])
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::op2(OpKind::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::op2(OpKind::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::op2(OpKind::Mul, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::op2(OpKind::Le, a, b)
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Expr::Var(x) => Some(x),
            _ => None,
        }
    }
}

/// Assertions of the program logic.
///
/// `OneEval { subj: u, arg: e, anchor: m, body: A }` states that applying
/// the function denoted by `u` to `e` terminates with a result, named `m`
/// inside `A`, satisfying `A`. `CodeEval { subj: u, anchor: m, body: A }`
/// states that `u` denotes a quotation whose content terminates, with the
/// resulting value bound modally to `m` in `A`. `Conv(e)` abbreviates
/// termination of the program denoted by `e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    TrueF,
    FalseF,
    Eq(Expr, Expr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Type, Box<Formula>),
    Exists(String, Type, Box<Formula>),
    ForallModal(String, Type, Box<Formula>),
    ExistsModal(String, Type, Box<Formula>),
    OneEval { subj: Expr, arg: Expr, anchor: String, body: Box<Formula> },
    CodeEval { subj: Expr, anchor: String, body: Box<Formula> },
    Conv(Expr),
}

impl Formula {
    pub fn eq(a: Expr, b: Expr) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, ty: Type, a: Formula) -> Formula {
        Formula::Forall(x.to_string(), ty, Box::new(a))
    }

    pub fn exists(x: &str, ty: Type, a: Formula) -> Formula {
        Formula::Exists(x.to_string(), ty, Box::new(a))
    }

    pub fn forall_modal(x: &str, ty: Type, a: Formula) -> Formula {
        Formula::ForallModal(x.to_string(), ty, Box::new(a))
    }

    pub fn exists_modal(x: &str, ty: Type, a: Formula) -> Formula {
        Formula::ExistsModal(x.to_string(), ty, Box::new(a))
    }

    pub fn one_eval(subj: Expr, arg: Expr, anchor: &str, body: Formula) -> Formula {
        Formula::OneEval { subj, arg, anchor: anchor.to_string(), body: Box::new(body) }
    }

    pub fn code_eval(subj: Expr, anchor: &str, body: Formula) -> Formula {
        Formula::CodeEval { subj, anchor: anchor.to_string(), body: Box::new(body) }
    }

    /// Left-folded conjunction; empty input gives T.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::TrueF,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::TrueF | Formula::FalseF | Formula::Eq(..) | Formula::Conv(_) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Forall(_, _, a)
            | Formula::Exists(_, _, a)
            | Formula::ForallModal(_, _, a)
            | Formula::ExistsModal(_, _, a) => 1 + a.size(),
            Formula::OneEval { body, .. } | Formula::CodeEval { body, .. } => 1 + body.size(),
        }
    }
}

/// A total-correctness judgement `{pre} term :anchor {post}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgement {
    pub pre: Formula,
    pub term: Term,
    pub anchor: String,
    pub post: Formula,
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {} :{} {{{}}}", self.pre, self.term, self.anchor, self.post)
    }
}

/// Deterministic fresh-name source: `fresh("m")` yields m1, m2, ...
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    counters: BTreeMap<String, u64>,
}

impl NameSupply {
    pub fn new() -> NameSupply {
        NameSupply::default()
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let n = self.counters.entry(base.to_string()).or_insert(0);
        *n += 1;
        format!("{}{}", base, n)
    }
}

// expression printing reuses the term precedence scheme, minus application
const E_OR: u8 = 1;
const E_AND: u8 = 2;
const E_NOT: u8 = 3;
const E_CMP: u8 = 4;
const E_ADD: u8 = 5;
const E_MUL: u8 = 6;
const E_ATOM: u8 = 8;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Var(_) => E_ATOM,
        Expr::Op(op, _) => match op {
            OpKind::Or => E_OR,
            OpKind::And => E_AND,
            OpKind::Not => E_NOT,
            OpKind::Eq | OpKind::Le => E_CMP,
            OpKind::Add | OpKind::Sub => E_ADD,
            OpKind::Mul => E_MUL,
        },
    }
}

fn fmt_expr(e: &Expr, need: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mine = expr_prec(e);
    let parens = mine < need;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(l) => write!(f, "{}", Term::Const(l.clone()))?,
        Expr::Var(x) => write!(f, "{}", x)?,
        Expr::Op(OpKind::Not, args) => {
            write!(f, "not ")?;
            fmt_expr(&args[0], E_NOT, f)?;
        }
        Expr::Op(op, args) => {
            fmt_expr(&args[0], mine, f)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(&args[1], mine + 1, f)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

/// Print an expression so it can stand directly after `eval` or `unbox`:
/// bare for variables and non-negative constants, parenthesised otherwise.
fn fmt_expr_arg(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let bare = match e {
        Expr::Var(_) => true,
        Expr::Const(Lit::Int(n)) => n.sign() != num_bigint::Sign::Minus,
        Expr::Const(_) => true,
        Expr::Op(..) => false,
    };
    if bare {
        fmt_expr(e, 0, f)
    } else {
        write!(f, "(")?;
        fmt_expr(e, 0, f)?;
        write!(f, ")")
    }
}

// formula precedence: binder-like forms lowest, then =>, \/, /\, ~, atoms
const F_BINDER: u8 = 0;
const F_IMP: u8 = 1;
const F_OR: u8 = 2;
const F_AND: u8 = 3;
const F_NOT: u8 = 4;
const F_ATOM: u8 = 5;

fn formula_prec(a: &Formula) -> u8 {
    match a {
        Formula::TrueF | Formula::FalseF | Formula::Eq(..) | Formula::Conv(_) => F_ATOM,
        Formula::Not(_) => F_NOT,
        Formula::And(..) => F_AND,
        Formula::Or(..) => F_OR,
        Formula::Implies(..) => F_IMP,
        _ => F_BINDER,
    }
}

fn fmt_formula(a: &Formula, need: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mine = formula_prec(a);
    let parens = mine < need;
    if parens {
        write!(f, "(")?;
    }
    match a {
        Formula::TrueF => write!(f, "T")?,
        Formula::FalseF => write!(f, "F")?,
        Formula::Eq(l, r) => {
            fmt_expr(l, E_ADD, f)?;
            write!(f, " == ")?;
            fmt_expr(r, E_ADD, f)?;
        }
        Formula::Conv(e) => {
            write!(f, "conv(")?;
            fmt_expr(e, 0, f)?;
            write!(f, ")")?;
        }
        Formula::Not(b) => {
            write!(f, "~")?;
            fmt_formula(b, F_NOT, f)?;
        }
        Formula::And(l, r) => {
            fmt_formula(l, F_AND, f)?;
            write!(f, " /\\ ")?;
            fmt_formula(r, F_AND + 1, f)?;
        }
        Formula::Or(l, r) => {
            fmt_formula(l, F_OR, f)?;
            write!(f, " \\/ ")?;
            fmt_formula(r, F_OR + 1, f)?;
        }
        Formula::Implies(l, r) => {
            fmt_formula(l, F_IMP + 1, f)?;
            write!(f, " => ")?;
            fmt_formula(r, F_IMP, f)?;
        }
        Formula::Forall(x, ty, b) => {
            write!(f, "forall {}:{}. ", x, ty)?;
            fmt_formula(b, F_BINDER, f)?;
        }
        Formula::Exists(x, ty, b) => {
            write!(f, "exists {}:{}. ", x, ty)?;
            fmt_formula(b, F_BINDER, f)?;
        }
        Formula::ForallModal(x, ty, b) => {
            write!(f, "forallc {}:{}. ", x, ty)?;
            fmt_formula(b, F_BINDER, f)?;
        }
        Formula::ExistsModal(x, ty, b) => {
            write!(f, "existsc {}:{}. ", x, ty)?;
            fmt_formula(b, F_BINDER, f)?;
        }
        Formula::OneEval { subj, arg, anchor, body } => {
            write!(f, "eval ")?;
            fmt_expr_arg(subj, f)?;
            write!(f, " ")?;
            fmt_expr_arg(arg, f)?;
            write!(f, " as {}. ", anchor)?;
            fmt_formula(body, F_BINDER, f)?;
        }
        Formula::CodeEval { subj, anchor, body } => {
            write!(f, "unbox ")?;
            fmt_expr_arg(subj, f)?;
            write!(f, " as {}. ", anchor)?;
            fmt_formula(body, F_BINDER, f)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, 0, f)
    }
}
