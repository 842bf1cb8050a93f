use super::ast::{Lit, OpKind, Term, Type};
use super::lex::{lex, LexError, Pos, Tok};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("syntax error at {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
}

impl From<LexError> for SyntaxError {
    fn from(e: LexError) -> Self {
        SyntaxError { pos: e.pos, msg: e.msg }
    }
}

const TERM_KEYWORDS: [&str; 9] =
    ["if", "then", "else", "let", "in", "mu", "not", "true", "false"];

/// Token cursor shared with the formula parser.
pub(crate) struct P {
    toks: Vec<(Tok, Pos)>,
    pub(crate) i: usize,
}

impl P {
    pub(crate) fn new(text: &str) -> Result<P, SyntaxError> {
        Ok(P { toks: lex(text)?, i: 0 })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks
            .get(self.i)
            .or_else(|| self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    pub(crate) fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    pub(crate) fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { pos: self.pos(), msg: msg.into() })
    }

    pub(crate) fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(got) if *got == t => {
                self.i += 1;
                Ok(())
            }
            Some(got) => {
                let got = got.clone();
                self.err(format!("expected `{}`, found `{}`", t, got))
            }
            None => self.err(format!("expected `{}`, found end of input", t)),
        }
    }

    pub(crate) fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !TERM_KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected identifier, found `{}`", t))
            }
            None => self.err("expected identifier, found end of input"),
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.i += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{}`", kw)),
        }
    }

    pub(crate) fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub(crate) fn finish(&self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(format!("unexpected trailing `{}`", self.peek().unwrap()))
        }
    }

    // ---- types ----

    pub(crate) fn ty(&mut self) -> Result<Type, SyntaxError> {
        let lhs = self.ty_atom()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.next();
            let rhs = self.ty()?;
            Ok(Type::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<Type, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => match s.as_str() {
                "Unit" => {
                    self.next();
                    Ok(Type::Unit)
                }
                "Bool" => {
                    self.next();
                    Ok(Type::Bool)
                }
                "Int" => {
                    self.next();
                    Ok(Type::Int)
                }
                _ => self.err(format!("unknown type `{}`", s)),
            },
            Some(Tok::LParen) => {
                self.next();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::OpenQuote) => {
                self.next();
                let t = self.ty()?;
                self.expect(Tok::CloseQuote)?;
                Ok(Type::code(t))
            }
            _ => self.err("expected a type"),
        }
    }

    // ---- terms ----

    pub(crate) fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(Tok::Lambda) => {
                self.next();
                let x = self.expect_ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                Ok(Term::Abs(x, ty, Box::new(body)))
            }
            Some(Tok::Ident(s)) if s == "mu" => {
                self.next();
                let g = self.expect_ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                if !matches!(body, Term::Abs(..)) {
                    return self.err("recursion body must be an abstraction");
                }
                Ok(Term::Rec(g, ty, Box::new(body)))
            }
            Some(Tok::Ident(s)) if s == "if" => {
                self.next();
                let c = self.term()?;
                self.expect_keyword("then")?;
                let t = self.term()?;
                self.expect_keyword("else")?;
                let e = self.term()?;
                Ok(Term::ite(c, t, e))
            }
            Some(Tok::Ident(s)) if s == "let" => {
                self.next();
                self.expect(Tok::OpenQuote)?;
                let x = self.expect_ident()?;
                self.expect(Tok::CloseQuote)?;
                self.expect(Tok::Eq)?;
                let rhs = self.term()?;
                self.expect_keyword("in")?;
                let body = self.term()?;
                Ok(Term::Unquote(x, Box::new(rhs), Box::new(body)))
            }
            _ => self.term_or(),
        }
    }

    fn term_or(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_and()?;
        while self.peek() == Some(&Tok::OrOp) {
            self.next();
            let rhs = self.term_and()?;
            lhs = Term::op(OpKind::Or, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn term_and(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_not()?;
        while self.peek() == Some(&Tok::AndOp) {
            self.next();
            let rhs = self.term_not()?;
            lhs = Term::op(OpKind::And, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn term_not(&mut self) -> Result<Term, SyntaxError> {
        if self.at_keyword("not") {
            self.next();
            let arg = self.term_not()?;
            Ok(Term::op(OpKind::Not, vec![arg]))
        } else {
            self.term_cmp()
        }
    }

    fn term_cmp(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_add()?;
        loop {
            let op = match self.peek() {
                Some(Tok::EqEq) => OpKind::Eq,
                Some(Tok::Le) => OpKind::Le,
                _ => break,
            };
            self.next();
            let rhs = self.term_add()?;
            lhs = Term::op(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn term_add(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => OpKind::Add,
                Some(Tok::Minus) => OpKind::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.term_mul()?;
            lhs = Term::op(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn term_mul(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_app()?;
        while self.peek() == Some(&Tok::Star) {
            self.next();
            let rhs = self.term_app()?;
            lhs = Term::op(OpKind::Mul, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::LParen) | Some(Tok::OpenQuote) | Some(Tok::Int(_)) => true,
            Some(Tok::Ident(s)) => {
                !TERM_KEYWORDS.contains(&s.as_str()) || s == "true" || s == "false"
            }
            _ => false,
        }
    }

    fn term_app(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_atom()?;
        while self.starts_atom() {
            let rhs = self.term_atom()?;
            lhs = Term::app(lhs, rhs);
        }
        Ok(lhs)
    }

    pub(crate) fn term_atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.next();
                Ok(Term::Const(Lit::Int(n)))
            }
            Some(Tok::Minus) => {
                self.next();
                match self.peek().cloned() {
                    Some(Tok::Int(n)) => {
                        self.next();
                        Ok(Term::Const(Lit::Int(-n)))
                    }
                    _ => self.err("expected integer literal after `-`"),
                }
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => {
                    self.next();
                    Ok(Term::bool(true))
                }
                "false" => {
                    self.next();
                    Ok(Term::bool(false))
                }
                _ if TERM_KEYWORDS.contains(&s.as_str()) => {
                    self.err(format!("unexpected keyword `{}`", s))
                }
                _ => {
                    self.next();
                    Ok(Term::Var(s))
                }
            },
            Some(Tok::LParen) => {
                self.next();
                if self.peek() == Some(&Tok::RParen) {
                    self.next();
                    return Ok(Term::unit());
                }
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::OpenQuote) => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::CloseQuote)?;
                Ok(Term::quote(t))
            }
            Some(t) => self.err(format!("expected a term, found `{}`", t)),
            None => self.err("expected a term, found end of input"),
        }
    }

    // The assertion language reuses the operator ladder but has no
    // application, so juxtaposed atoms delimit each other there.

    pub(crate) fn expr_or(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.expr_and()?;
        while self.peek() == Some(&Tok::OrOp) {
            self.next();
            let rhs = self.expr_and()?;
            lhs = Term::op(OpKind::Or, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.expr_not()?;
        while self.peek() == Some(&Tok::AndOp) {
            self.next();
            let rhs = self.expr_not()?;
            lhs = Term::op(OpKind::And, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn expr_not(&mut self) -> Result<Term, SyntaxError> {
        if self.at_keyword("not") {
            self.next();
            let arg = self.expr_not()?;
            Ok(Term::op(OpKind::Not, vec![arg]))
        } else {
            self.expr_cmp()
        }
    }

    fn expr_cmp(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.expr_add()?;
        loop {
            let op = match self.peek() {
                Some(Tok::EqEq) => OpKind::Eq,
                Some(Tok::Le) => OpKind::Le,
                _ => break,
            };
            self.next();
            let rhs = self.expr_add()?;
            lhs = Term::op(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    pub(crate) fn expr_add(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => OpKind::Add,
                Some(Tok::Minus) => OpKind::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.expr_mul()?;
            lhs = Term::op(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn expr_mul(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.term_atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.next();
            let rhs = self.term_atom()?;
            lhs = Term::op(OpKind::Mul, vec![lhs, rhs]);
        }
        Ok(lhs)
    }
}

/// Parse a complete term; input must be fully consumed.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut p = P::new(text)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

/// Parse a complete type.
pub fn parse_type(text: &str) -> Result<Type, SyntaxError> {
    let mut p = P::new(text)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quote_of_sum() {
        let t = parse_term("[| 1 + 7 |]").unwrap();
        assert_eq!(t, Term::quote(Term::op(OpKind::Add, vec![Term::int(1), Term::int(7)])));
    }

    #[test]
    fn unit_literal() {
        assert_eq!(parse_term("()").unwrap(), Term::unit());
    }

    #[test]
    fn unquote_of_quote() {
        let t = parse_term("let [|x|] = [|3|] in x").unwrap();
        assert_eq!(t, Term::unquote("x", Term::quote(Term::int(3)), Term::var("x")));
    }

    #[test]
    fn application_binds_tighter_than_product() {
        let t = parse_term("f x * 2").unwrap();
        assert_eq!(
            t,
            Term::op(OpKind::Mul, vec![Term::app(Term::var("f"), Term::var("x")), Term::int(2)])
        );
    }

    #[test]
    fn binop_precedence_ladder() {
        // \/ loosest, then /\, comparisons, additive, multiplicative
        let t = parse_term("a \\/ b /\\ 1 + 2 * 3 <= 7").unwrap();
        let prod = Term::op(OpKind::Mul, vec![Term::int(2), Term::int(3)]);
        let sum = Term::op(OpKind::Add, vec![Term::int(1), prod]);
        let cmp = Term::op(OpKind::Le, vec![sum, Term::int(7)]);
        let conj = Term::op(OpKind::And, vec![Term::var("b"), cmp]);
        assert_eq!(t, Term::op(OpKind::Or, vec![Term::var("a"), conj]));
    }

    #[test]
    fn left_associativity() {
        let t = parse_term("10 - 3 - 2").unwrap();
        assert_eq!(
            t,
            Term::op(
                OpKind::Sub,
                vec![Term::op(OpKind::Sub, vec![Term::int(10), Term::int(3)]), Term::int(2)]
            )
        );
    }

    #[test]
    fn lambda_extends_right() {
        let t = parse_term("\\x:Int. x + 1").unwrap();
        assert_eq!(
            t,
            Term::abs("x", Type::Int, Term::op(OpKind::Add, vec![Term::var("x"), Term::int(1)]))
        );
    }

    #[test]
    fn mu_requires_abstraction_body() {
        assert!(parse_term("mu g:Int -> Int. \\x:Int. g x").is_ok());
        assert!(parse_term("mu g:Int -> Int. 5").is_err());
    }

    #[test]
    fn minus_after_term_is_subtraction() {
        let t = parse_term("f -1").unwrap();
        assert_eq!(t, Term::op(OpKind::Sub, vec![Term::var("f"), Term::int(1)]));
        let u = parse_term("f (-1)").unwrap();
        assert_eq!(u, Term::app(Term::var("f"), Term::int(-1)));
    }

    #[test]
    fn not_sits_between_comparisons_and_conjunction() {
        let t = parse_term("not 1 <= 2 /\\ b").unwrap();
        let cmp = Term::op(OpKind::Le, vec![Term::int(1), Term::int(2)]);
        assert_eq!(
            t,
            Term::op(OpKind::And, vec![Term::op(OpKind::Not, vec![cmp]), Term::var("b")])
        );
    }

    #[test]
    fn keywords_stop_application() {
        let t = parse_term("if f x then 1 else 2").unwrap();
        assert_eq!(
            t,
            Term::ite(Term::app(Term::var("f"), Term::var("x")), Term::int(1), Term::int(2))
        );
    }

    #[test]
    fn error_carries_position() {
        let e = parse_term("1 +\n  then").unwrap_err();
        assert_eq!(e.pos.line, 2);
    }

    #[test]
    fn trailing_input_rejected() {
        assert!(parse_term("1 2 3 )").is_err());
    }

    #[test]
    fn types_parse_and_nest() {
        assert_eq!(
            parse_type("Int -> [| Int -> Int |]").unwrap(),
            Type::arrow(Type::Int, Type::code(Type::arrow(Type::Int, Type::Int)))
        );
        assert_eq!(
            parse_type("(Int -> Int) -> Bool").unwrap(),
            Type::arrow(Type::arrow(Type::Int, Type::Int), Type::Bool)
        );
    }

    #[test]
    fn display_round_trip_on_samples() {
        for src in [
            "\\x:Int. x + 1",
            "mu g:Int -> [| Int |]. \\n:Int. if n <= 0 then [| 0 |] else let [|x|] = g (n - 1) in [| x + 1 |]",
            "(\\x:Int. x) 2",
            "[| \\x:Int. x * x |]",
            "not (a \\/ b) /\\ true",
            "f (-3) - 4",
            "if 1 <= 0 then () else ()",
        ] {
            let t = parse_term(src).unwrap();
            let printed = t.to_string();
            let back = parse_term(&printed).unwrap();
            assert_eq!(t, back, "round-trip failed: {} -> {}", src, printed);
        }
    }
}
