//! Token stream shared by the term, type, and formula parsers.

use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    OpenQuote,  // [|
    CloseQuote, // |]
    Lambda,     // \
    Colon,
    Dot,
    Arrow,    // ->
    Plus,
    Minus,
    Star,
    EqEq,     // ==
    Eq,       // =
    Le,       // <=
    AndOp,    // /\
    OrOp,     // \/
    FatArrow, // =>
    Tilde,    // ~
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{}", s),
            Tok::Int(n) => write!(f, "{}", n),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::OpenQuote => write!(f, "[|"),
            Tok::CloseQuote => write!(f, "|]"),
            Tok::Lambda => write!(f, "\\"),
            Tok::Colon => write!(f, ":"),
            Tok::Dot => write!(f, "."),
            Tok::Arrow => write!(f, "->"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::EqEq => write!(f, "=="),
            Tok::Eq => write!(f, "="),
            Tok::Le => write!(f, "<="),
            Tok::AndOp => write!(f, "/\\"),
            Tok::OrOp => write!(f, "\\/"),
            Tok::FatArrow => write!(f, "=>"),
            Tok::Tilde => write!(f, "~"),
        }
    }
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("lex error at {pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

/// Tokenize; `#` starts a comment running to end of line.
pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => bump!(),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '(' => {
                out.push((Tok::LParen, pos));
                bump!();
            }
            ')' => {
                out.push((Tok::RParen, pos));
                bump!();
            }
            '[' => {
                if chars.get(i + 1) == Some(&'|') {
                    out.push((Tok::OpenQuote, pos));
                    bump!();
                    bump!();
                } else {
                    return Err(LexError { pos, msg: "expected `[|`".into() });
                }
            }
            '|' => {
                if chars.get(i + 1) == Some(&']') {
                    out.push((Tok::CloseQuote, pos));
                    bump!();
                    bump!();
                } else {
                    return Err(LexError { pos, msg: "expected `|]`".into() });
                }
            }
            '\\' => {
                if chars.get(i + 1) == Some(&'/') {
                    out.push((Tok::OrOp, pos));
                    bump!();
                    bump!();
                } else {
                    out.push((Tok::Lambda, pos));
                    bump!();
                }
            }
            '/' => {
                if chars.get(i + 1) == Some(&'\\') {
                    out.push((Tok::AndOp, pos));
                    bump!();
                    bump!();
                } else {
                    return Err(LexError { pos, msg: "expected `/\\`".into() });
                }
            }
            ':' => {
                out.push((Tok::Colon, pos));
                bump!();
            }
            '.' => {
                out.push((Tok::Dot, pos));
                bump!();
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push((Tok::Arrow, pos));
                    bump!();
                    bump!();
                } else {
                    out.push((Tok::Minus, pos));
                    bump!();
                }
            }
            '+' => {
                out.push((Tok::Plus, pos));
                bump!();
            }
            '*' => {
                out.push((Tok::Star, pos));
                bump!();
            }
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push((Tok::EqEq, pos));
                    bump!();
                    bump!();
                } else if chars.get(i + 1) == Some(&'>') {
                    out.push((Tok::FatArrow, pos));
                    bump!();
                    bump!();
                } else {
                    out.push((Tok::Eq, pos));
                    bump!();
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push((Tok::Le, pos));
                    bump!();
                    bump!();
                } else {
                    return Err(LexError { pos, msg: "expected `<=`".into() });
                }
            }
            '~' => {
                out.push((Tok::Tilde, pos));
                bump!();
            }
            _ if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
                out.push((Tok::Int(s.parse().expect("digit string")), pos));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    s.push(chars[i]);
                    bump!();
                }
                out.push((Tok::Ident(s), pos));
            }
            _ => {
                return Err(LexError { pos, msg: format!("unexpected character `{}`", c) });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_staged_syntax() {
        let toks = lex("let [|x|] = [| 1 + 7 |] in x").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|(t, _)| t).collect();
        assert!(matches!(kinds[0], Tok::Ident(s) if s == "let"));
        assert!(kinds.contains(&&Tok::OpenQuote));
        assert!(kinds.contains(&&Tok::CloseQuote));
        assert!(kinds.contains(&&Tok::Eq));
    }

    #[test]
    fn distinguishes_lambda_from_or() {
        assert_eq!(lex("\\/").unwrap()[0].0, Tok::OrOp);
        assert_eq!(lex("\\x").unwrap()[0].0, Tok::Lambda);
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let toks = lex("1 # everything here vanishes\n2").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[1].1.line, 2);
    }

    #[test]
    fn primes_allowed_inside_identifiers() {
        let toks = lex("y' y''").unwrap();
        assert!(matches!(&toks[0].0, Tok::Ident(s) if s == "y'"));
        assert!(matches!(&toks[1].0, Tok::Ident(s) if s == "y''"));
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(lex("a ? b").is_err());
        assert!(lex("a < b").is_err());
    }
}
