use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

/// Types: three base types, functions, and the code type `[| T |]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Unit,
    Bool,
    Int,
    Arrow(Box<Type>, Box<Type>),
    Code(Box<Type>),
}

impl Type {
    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn code(inner: Type) -> Type {
        Type::Code(Box::new(inner))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Unit | Type::Bool | Type::Int)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Unit => write!(f, "Unit"),
            Type::Bool => write!(f, "Bool"),
            Type::Int => write!(f, "Int"),
            Type::Arrow(d, c) => {
                // -> is right-associative; parenthesize arrow domains
                if matches!(**d, Type::Arrow(..)) {
                    write!(f, "({}) -> {}", d, c)
                } else {
                    write!(f, "{} -> {}", d, c)
                }
            }
            Type::Code(t) => write!(f, "[| {} |]", t),
        }
    }
}

/// Constant literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lit {
    Unit,
    Bool(bool),
    Int(BigInt),
}

impl Lit {
    pub fn ty(&self) -> Type {
        match self {
            Lit::Unit => Type::Unit,
            Lit::Bool(_) => Type::Bool,
            Lit::Int(_) => Type::Int,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Unit => write!(f, "()"),
            Lit::Bool(b) => write!(f, "{}", b),
            Lit::Int(n) => write!(f, "{}", n),
        }
    }
}

/// Operator symbols shared by programs and logical expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Eq,
    Le,
    And,
    Or,
    Not,
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Not => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Add => "+",
            OpKind::Sub => "-",
            OpKind::Mul => "*",
            OpKind::Eq => "==",
            OpKind::Le => "<=",
            OpKind::And => "/\\",
            OpKind::Or => "\\/",
            OpKind::Not => "not",
        }
    }

    pub const ALL: [OpKind; 8] = [
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mul,
        OpKind::Eq,
        OpKind::Le,
        OpKind::And,
        OpKind::Or,
        OpKind::Not,
    ];
}

/// Program terms. `Rec`'s inner term is syntactically an abstraction
/// (checked by the parser and again by the type checker).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Lit),
    Var(String),
    Abs(String, Type, Box<Term>),
    Rec(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Op(OpKind, Vec<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Quote(Box<Term>),
    Unquote(String, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Lit::Int(BigInt::from(n)))
    }

    pub fn bool(b: bool) -> Term {
        Term::Const(Lit::Bool(b))
    }

    pub fn unit() -> Term {
        Term::Const(Lit::Unit)
    }

    pub fn abs(x: &str, ty: Type, body: Term) -> Term {
        Term::Abs(x.to_string(), ty, Box::new(body))
    }

    pub fn rec(g: &str, ty: Type, abs: Term) -> Term {
        Term::Rec(g.to_string(), ty, Box::new(abs))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn op(op: OpKind, args: Vec<Term>) -> Term {
        Term::Op(op, args)
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn quote(m: Term) -> Term {
        Term::Quote(Box::new(m))
    }

    pub fn unquote(x: &str, rhs: Term, body: Term) -> Term {
        Term::Unquote(x.to_string(), Box::new(rhs), Box::new(body))
    }

    /// Values: constants, variables, abstractions, recursive
    /// abstractions, and quotes (whose bodies are never evaluated).
    pub fn is_value(&self) -> bool {
        matches!(
            self,
            Term::Const(_) | Term::Var(_) | Term::Abs(..) | Term::Rec(..) | Term::Quote(_)
        )
    }

    /// Number of AST nodes; drives generator budgets and termination measures.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::Abs(_, _, b) | Term::Rec(_, _, b) | Term::Quote(b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Op(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::If(c, t, e) => 1 + c.size() + t.size() + e.size(),
            Term::Unquote(_, r, b) => 1 + r.size() + b.size(),
        }
    }
}

// Precedence levels for printing; mirror the parser.
pub(crate) const P_LOW: u8 = 0;
pub(crate) const P_OR: u8 = 1;
pub(crate) const P_AND: u8 = 2;
pub(crate) const P_NOT: u8 = 3;
pub(crate) const P_CMP: u8 = 4;
pub(crate) const P_ADD: u8 = 5;
pub(crate) const P_MUL: u8 = 6;
pub(crate) const P_APP: u8 = 7;
pub(crate) const P_ATOM: u8 = 8;

impl Term {
    fn prec(&self) -> u8 {
        match self {
            Term::Abs(..) | Term::Rec(..) | Term::If(..) | Term::Unquote(..) => P_LOW,
            Term::Op(OpKind::Or, _) => P_OR,
            Term::Op(OpKind::And, _) => P_AND,
            Term::Op(OpKind::Not, _) => P_NOT,
            Term::Op(OpKind::Eq, _) | Term::Op(OpKind::Le, _) => P_CMP,
            Term::Op(OpKind::Add, _) | Term::Op(OpKind::Sub, _) => P_ADD,
            Term::Op(OpKind::Mul, _) => P_MUL,
            Term::App(..) => P_APP,
            // A negative literal reparses as an atom only where the grammar
            // expects one; application arguments need the parentheses.
            Term::Const(Lit::Int(n)) if n < &BigInt::zero() => P_APP,
            _ => P_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let my = self.prec();
        if my < min {
            write!(f, "(")?;
        }
        match self {
            Term::Const(l) => write!(f, "{}", l)?,
            Term::Var(x) => write!(f, "{}", x)?,
            Term::Abs(x, ty, b) => {
                write!(f, "\\{}:{}. ", x, ty)?;
                b.fmt_prec(f, P_LOW)?;
            }
            Term::Rec(g, ty, b) => {
                write!(f, "mu {}:{}. ", g, ty)?;
                b.fmt_prec(f, P_LOW)?;
            }
            Term::App(fun, arg) => {
                fun.fmt_prec(f, P_APP)?;
                write!(f, " ")?;
                arg.fmt_prec(f, P_ATOM)?;
            }
            Term::Op(OpKind::Not, args) => {
                write!(f, "not ")?;
                args[0].fmt_prec(f, P_NOT)?;
            }
            Term::Op(op, args) => {
                // left-associative: the right operand prints one level tighter
                args[0].fmt_prec(f, my)?;
                write!(f, " {} ", op.symbol())?;
                args[1].fmt_prec(f, my + 1)?;
            }
            Term::If(c, t, e) => {
                write!(f, "if ")?;
                c.fmt_prec(f, P_LOW)?;
                write!(f, " then ")?;
                t.fmt_prec(f, P_LOW)?;
                write!(f, " else ")?;
                e.fmt_prec(f, P_LOW)?;
            }
            Term::Quote(m) => {
                write!(f, "[| ")?;
                m.fmt_prec(f, P_LOW)?;
                write!(f, " |]")?;
            }
            Term::Unquote(x, rhs, body) => {
                write!(f, "let [|{}|] = ", x)?;
                rhs.fmt_prec(f, P_LOW)?;
                write!(f, " in ")?;
                body.fmt_prec(f, P_LOW)?;
            }
        }
        if my < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, P_LOW)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_display_parenthesizes_arrow_domains() {
        let t = Type::arrow(Type::arrow(Type::Int, Type::Int), Type::Bool);
        assert_eq!(t.to_string(), "(Int -> Int) -> Bool");
        let u = Type::arrow(Type::Int, Type::arrow(Type::Int, Type::Bool));
        assert_eq!(u.to_string(), "Int -> Int -> Bool");
        assert_eq!(Type::code(Type::arrow(Type::Int, Type::Int)).to_string(), "[| Int -> Int |]");
    }

    #[test]
    fn term_display_respects_precedence() {
        // (1 + 2) * 3 keeps its parentheses, 1 + 2 * 3 drops them
        let sum = Term::op(OpKind::Add, vec![Term::int(1), Term::int(2)]);
        let m = Term::op(OpKind::Mul, vec![sum.clone(), Term::int(3)]);
        assert_eq!(m.to_string(), "(1 + 2) * 3");
        let m2 = Term::op(
            OpKind::Add,
            vec![Term::int(1), Term::op(OpKind::Mul, vec![Term::int(2), Term::int(3)])],
        );
        assert_eq!(m2.to_string(), "1 + 2 * 3");
    }

    #[test]
    fn left_assoc_chains_print_flat() {
        // 0+1+1+1 associates left and must not gain parentheses
        let t = Term::op(
            OpKind::Add,
            vec![
                Term::op(
                    OpKind::Add,
                    vec![Term::op(OpKind::Add, vec![Term::int(0), Term::int(1)]), Term::int(1)],
                ),
                Term::int(1),
            ],
        );
        assert_eq!(t.to_string(), "0 + 1 + 1 + 1");
    }

    #[test]
    fn negative_literal_in_argument_position_is_parenthesized() {
        let t = Term::app(Term::var("f"), Term::int(-1));
        assert_eq!(t.to_string(), "f (-1)");
    }

    #[test]
    fn quote_and_unquote_display() {
        let t = Term::unquote(
            "x",
            Term::quote(Term::int(3)),
            Term::var("x"),
        );
        assert_eq!(t.to_string(), "let [|x|] = [| 3 |] in x");
    }

    #[test]
    fn values_are_recognized() {
        assert!(Term::quote(Term::app(Term::var("f"), Term::int(1))).is_value());
        assert!(Term::abs("x", Type::Int, Term::var("x")).is_value());
        assert!(!Term::app(Term::var("f"), Term::int(1)).is_value());
    }
}
