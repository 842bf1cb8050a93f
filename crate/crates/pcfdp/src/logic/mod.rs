//! The assertion language: expressions over program variables, formulae
//! with modal quantifiers and evaluation predicates, their parsing,
//! typing, substitution, and abbreviation expansion.

mod ast;
pub(crate) mod parse;
mod typecheck;
mod vars;

pub use ast::{Expr, Formula, Judgement, NameSupply};
pub use parse::{parse_expr, parse_formula};
pub use typecheck::{
    expand_abbrev, type_of_expr, typecheck_formula, typecheck_judgement, FormulaTypeError,
};
pub use vars::{
    alpha_eq_formula, display_eq, fv_expr, fv_formula, subst_expr, subst_formula,
    IllegalSubstitution,
};
