//! Abstract syntax, concrete-syntax parsing, substitution, and the
//! dual-context modal type checker.

mod ast;
pub mod lex;
pub(crate) mod parse;
pub(crate) mod typecheck;
mod vars;

pub use ast::{Lit, OpKind, Term, Type};
pub use parse::{parse_term, parse_type, SyntaxError};
pub use typecheck::{typecheck_term, TypeError, TypingCtx};
pub use vars::{alpha_eq, free_vars, fresh_name, substitute};
