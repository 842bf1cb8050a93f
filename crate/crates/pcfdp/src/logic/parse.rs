use crate::syntax::lex::Tok;
use crate::syntax::parse::P;
use crate::syntax::{SyntaxError, Term};

use super::ast::{Expr, Formula};

/// Parse a single formula; the whole input must be consumed.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = P::new(text)?;
    let f = formula(&mut p)?;
    p.finish()?;
    Ok(f)
}

/// Parse a single logical expression; the whole input must be consumed.
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let mut p = P::new(text)?;
    let e = expr(&mut p)?;
    p.finish()?;
    Ok(e)
}

pub(crate) fn formula(p: &mut P) -> Result<Formula, SyntaxError> {
    form_imp(p)
}

fn form_imp(p: &mut P) -> Result<Formula, SyntaxError> {
    let lhs = form_or(p)?;
    if let Some(Tok::FatArrow) = p.peek() {
        p.next();
        let rhs = form_imp(p)?;
        return Ok(Formula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn form_or(p: &mut P) -> Result<Formula, SyntaxError> {
    let mut acc = form_and(p)?;
    while let Some(Tok::OrOp) = p.peek() {
        p.next();
        let rhs = form_and(p)?;
        acc = Formula::or(acc, rhs);
    }
    Ok(acc)
}

fn form_and(p: &mut P) -> Result<Formula, SyntaxError> {
    let mut acc = form_not(p)?;
    while let Some(Tok::AndOp) = p.peek() {
        p.next();
        let rhs = form_not(p)?;
        acc = Formula::and(acc, rhs);
    }
    Ok(acc)
}

fn form_not(p: &mut P) -> Result<Formula, SyntaxError> {
    if let Some(Tok::Tilde) = p.peek() {
        p.next();
        let inner = form_not(p)?;
        return Ok(Formula::not(inner));
    }
    form_atom(p)
}

fn form_atom(p: &mut P) -> Result<Formula, SyntaxError> {
    match p.peek().cloned() {
        Some(Tok::Ident(s)) => match s.as_str() {
            "T" => {
                p.next();
                Ok(Formula::TrueF)
            }
            "F" => {
                p.next();
                Ok(Formula::FalseF)
            }
            "forall" | "exists" | "forallc" | "existsc" => {
                p.next();
                let x = p.expect_ident()?;
                p.expect(Tok::Colon)?;
                let ty = p.ty()?;
                p.expect(Tok::Dot)?;
                let body = formula(p)?;
                Ok(match s.as_str() {
                    "forall" => Formula::Forall(x, ty, Box::new(body)),
                    "exists" => Formula::Exists(x, ty, Box::new(body)),
                    "forallc" => Formula::ForallModal(x, ty, Box::new(body)),
                    _ => Formula::ExistsModal(x, ty, Box::new(body)),
                })
            }
            "eval" => {
                p.next();
                let subj = expr(p)?;
                let arg = expr(p)?;
                p.expect_keyword("as")?;
                let anchor = p.expect_ident()?;
                p.expect(Tok::Dot)?;
                let body = formula(p)?;
                Ok(Formula::OneEval { subj, arg, anchor, body: Box::new(body) })
            }
            "unbox" => {
                p.next();
                let subj = expr(p)?;
                p.expect_keyword("as")?;
                let anchor = p.expect_ident()?;
                p.expect(Tok::Dot)?;
                let body = formula(p)?;
                Ok(Formula::CodeEval { subj, anchor, body: Box::new(body) })
            }
            "conv" => {
                p.next();
                p.expect(Tok::LParen)?;
                let x = p.expect_ident()?;
                p.expect(Tok::RParen)?;
                Ok(Formula::Conv(Expr::Var(x)))
            }
            _ => equation(p),
        },
        Some(Tok::LParen) => {
            // a parenthesis may open a formula or the left expression of an
            // equation; try the formula reading, fall back on failure or if
            // an `==` follows the closing parenthesis
            let snapshot = p.i;
            p.next();
            let attempt = formula(p).and_then(|f| {
                p.expect(Tok::RParen)?;
                Ok(f)
            });
            match attempt {
                Ok(f) if !matches!(p.peek(), Some(Tok::EqEq)) => Ok(f),
                _ => {
                    p.i = snapshot;
                    equation(p)
                }
            }
        }
        _ => equation(p),
    }
}

fn equation(p: &mut P) -> Result<Formula, SyntaxError> {
    let lhs = add_expr(p)?;
    p.expect(Tok::EqEq)?;
    let rhs = add_expr(p)?;
    Ok(Formula::Eq(lhs, rhs))
}

/// Full expression, all operator levels. Used after `eval` and `unbox`,
/// where the following `as` keyword delimits it.
pub(crate) fn expr(p: &mut P) -> Result<Expr, SyntaxError> {
    let start = p.pos();
    let t = p.expr_or()?;
    to_expr(&t, start)
}

/// Additive level only: equation operands stop before `==`, `<=` and the
/// boolean operators, which keeps `a == b /\ c == d` unambiguous. Any
/// parenthesised subexpression admits the full operator set again.
fn add_expr(p: &mut P) -> Result<Expr, SyntaxError> {
    let start = p.pos();
    let t = p.expr_add()?;
    to_expr(&t, start)
}

fn to_expr(t: &Term, start: crate::syntax::lex::Pos) -> Result<Expr, SyntaxError> {
    term_to_expr(t).map_err(|what| {
        SyntaxError { pos: start, msg: format!("{} cannot appear in an assertion expression", what) }
    })
}

/// Reinterpret a term as an assertion expression; names the offending
/// construct on failure.
pub(crate) fn term_to_expr(t: &Term) -> Result<Expr, &'static str> {
    match t {
        Term::Const(l) => Ok(Expr::Const(l.clone())),
        Term::Var(x) => Ok(Expr::Var(x.clone())),
        Term::Op(op, args) => {
            let args = args.iter().map(term_to_expr).collect::<Result<Vec<_>, _>>()?;
            Ok(Expr::Op(*op, args))
        }
        Term::Abs(..) => Err("a lambda"),
        Term::Rec(..) => Err("a recursive function"),
        Term::App(..) => Err("an application"),
        Term::If(..) => Err("a conditional"),
        Term::Quote(_) => Err("a quotation"),
        Term::Unquote(..) => Err("an unquote"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Type;

    fn ok(src: &str) -> Formula {
        parse_formula(src).unwrap()
    }

    #[test]
    fn atoms() {
        assert_eq!(ok("T"), Formula::TrueF);
        assert_eq!(ok("F"), Formula::FalseF);
        assert_eq!(ok("x == 3"), Formula::eq(Expr::var("x"), Expr::int(3)));
        assert_eq!(ok("conv(x)"), Formula::Conv(Expr::var("x")));
    }

    #[test]
    fn spec_idiom_for_comparisons() {
        assert_eq!(
            ok("(0 <= i) == true"),
            Formula::eq(Expr::le(Expr::int(0), Expr::var("i")), Expr::bool(true))
        );
    }

    #[test]
    fn eval_and_unbox_forms() {
        assert_eq!(
            ok("eval u 2 as z. z == 3"),
            Formula::one_eval(
                Expr::var("u"),
                Expr::int(2),
                "z",
                Formula::eq(Expr::var("z"), Expr::int(3))
            )
        );
        assert_eq!(
            ok("unbox m as x. x == 3"),
            Formula::code_eval(Expr::var("m"), "x", Formula::eq(Expr::var("x"), Expr::int(3)))
        );
    }

    #[test]
    fn connective_precedence_and_associativity() {
        assert_eq!(
            ok("T /\\ F \\/ ~T => F"),
            Formula::implies(
                Formula::or(
                    Formula::and(Formula::TrueF, Formula::FalseF),
                    Formula::not(Formula::TrueF)
                ),
                Formula::FalseF
            )
        );
        assert_eq!(
            ok("T => F => T"),
            Formula::implies(Formula::TrueF, Formula::implies(Formula::FalseF, Formula::TrueF))
        );
    }

    #[test]
    fn binder_bodies_extend_right() {
        let f = ok("T /\\ forall x:Int. x == 1 => F");
        assert_eq!(
            f,
            Formula::and(
                Formula::TrueF,
                Formula::forall(
                    "x",
                    Type::Int,
                    Formula::implies(Formula::eq(Expr::var("x"), Expr::int(1)), Formula::FalseF)
                )
            )
        );
    }

    #[test]
    fn modal_quantifiers() {
        let f = ok("forallc x:Int. conv(x)");
        assert_eq!(f, Formula::forall_modal("x", Type::Int, Formula::Conv(Expr::var("x"))));
        let g = ok("existsc x:[| Int |]. T");
        assert_eq!(g, Formula::exists_modal("x", Type::code(Type::Int), Formula::TrueF));
    }

    #[test]
    fn parenthesised_formula_versus_expression() {
        assert_eq!(ok("(T => F) => T").to_string(), "(T => F) => T");
        assert_eq!(
            ok("(1 + 2) == 3"),
            Formula::eq(Expr::add(Expr::int(1), Expr::int(2)), Expr::int(3))
        );
        assert_eq!(
            ok("(a /\\ b) == c"),
            Formula::eq(
                Expr::op2(crate::syntax::OpKind::And, Expr::var("a"), Expr::var("b")),
                Expr::var("c")
            )
        );
    }

    #[test]
    fn negative_literals_in_equations() {
        assert_eq!(ok("x == -1"), Formula::eq(Expr::var("x"), Expr::int(-1)));
        assert_eq!(
            ok("eval u (-1) as z. T"),
            Formula::one_eval(Expr::var("u"), Expr::int(-1), "z", Formula::TrueF)
        );
    }

    #[test]
    fn lambdas_are_rejected_in_expressions() {
        let e = parse_formula("(\\x:Int. x) == y").unwrap_err();
        assert!(e.msg.contains("lambda"), "{}", e.msg);
    }

    #[test]
    fn bare_comparison_is_not_a_formula() {
        assert!(parse_formula("x <= y").is_err());
    }

    #[test]
    fn trailing_input_rejected() {
        assert!(parse_formula("T T").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "T",
            "x == 3",
            "~(T /\\ F)",
            "T /\\ F \\/ ~T => F",
            "(T => F) => T",
            "forall x:Int. (0 <= x) == true => (exists y:Int. x + 1 == y)",
            "forallc x:Int. conv(x)",
            "eval u 2 as z. z == 3",
            "unbox m as x. x == 3 /\\ T",
            "(forall x:Int. x == x) /\\ T",
            "eval u (x + 1) as z. (z == 1 => F) /\\ T",
            "(0 <= i) == true",
            "existsc q:[| Int -> Int |]. unbox q as y. eval y 1 as z. z == 1",
        ] {
            let f = ok(src);
            let printed = f.to_string();
            assert_eq!(ok(&printed), f, "round-trip failed for {}", src);
            assert_eq!(printed, src, "canonical form drifted for {}", src);
        }
    }
}
