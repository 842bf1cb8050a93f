use crate::syntax::{Term, Type};

use super::model::BoundedConfig;

/// The canonical diverging program at any type: a recursive function that
/// immediately re-invokes itself, applied to unit.
pub fn omega_at(ty: &Type) -> Term {
    let fun = Type::arrow(Type::Unit, ty.clone());
    Term::app(
        Term::rec("g", fun, Term::abs("z", Type::Unit, Term::app(Term::var("g"), Term::var("z")))),
        Term::unit(),
    )
}

/// A program that unquotes diverging code and runs it.
pub fn splice_omega_at(ty: &Type) -> Term {
    Term::unquote("x", Term::quote(omega_at(ty)), Term::var("x"))
}

/// Deterministic closed values of the given type, ordered small-first.
/// Integer values span [-int_bound, int_bound]; function pools mix
/// identity, constants, an everywhere-diverging body, and slow loops.
pub fn value_pool(ty: &Type, cfg: &BoundedConfig) -> Vec<Term> {
    match ty {
        Type::Unit => vec![Term::unit()],
        Type::Bool => vec![Term::bool(true), Term::bool(false)],
        Type::Int => {
            let mut out = vec![Term::int(0)];
            for n in 1..=cfg.int_bound {
                out.push(Term::int(n));
                out.push(Term::int(-n));
            }
            out
        }
        Type::Arrow(d, c) => {
            let mut out = Vec::new();
            if d == c {
                out.push(Term::abs("x", (**d).clone(), Term::var("x")));
            }
            for v in value_pool(c, cfg).into_iter().take(2) {
                out.push(Term::abs("x", (**d).clone(), v));
            }
            out.push(Term::abs("x", (**d).clone(), omega_at(c)));
            if **d == Type::Int && **c == Type::Int {
                out.push(Term::abs(
                    "x",
                    Type::Int,
                    Term::op(
                        crate::syntax::OpKind::Add,
                        vec![Term::var("x"), Term::int(1)],
                    ),
                ));
                out.push(slow_descent());
            }
            if **d == Type::Int && **c == Type::Bool {
                out.push(Term::abs(
                    "x",
                    Type::Int,
                    Term::op(crate::syntax::OpKind::Le, vec![Term::var("x"), Term::int(0)]),
                ));
            }
            out.truncate(cfg.fn_pool_size.max(1));
            out
        }
        Type::Code(inner) => {
            let mut out: Vec<Term> = value_pool(inner, cfg)
                .into_iter()
                .take(cfg.code_pool_size.saturating_sub(1).max(1))
                .map(Term::quote)
                .collect();
            out.push(Term::quote(omega_at(inner)));
            out.truncate(cfg.code_pool_size.max(1));
            out
        }
    }
}

/// Counts down to zero one call at a time; terminating but fuel-hungry.
fn slow_descent() -> Term {
    crate::syntax::parse_term(
        "mu f:Int -> Int. \\n:Int. if n <= 0 then 0 else f (n - 1)",
    )
    .unwrap()
}

/// Closed programs for modal variables: the divergent ones come first so
/// truncation can never lose them, then a convergent non-value, then the
/// value pool.
pub fn modal_pool(ty: &Type, cfg: &BoundedConfig) -> Vec<Term> {
    let mut out = vec![omega_at(ty), splice_omega_at(ty)];
    if let Some(p) = running_program(ty) {
        out.push(p);
    }
    out.extend(value_pool(ty, cfg));
    out.truncate(cfg.modal_pool_size.max(2));
    out
}

/// A program that is not a value but converges, when one is easy to give.
fn running_program(ty: &Type) -> Option<Term> {
    match ty {
        Type::Int => Some(crate::syntax::parse_term("1 + 2").unwrap()),
        Type::Bool => Some(crate::syntax::parse_term("not true").unwrap()),
        Type::Unit => Some(crate::syntax::parse_term("(\\z:Unit. z) ()").unwrap()),
        _ => None,
    }
}

/// Arguments used to probe functions for observational comparison.
pub fn arg_samples(ty: &Type, cfg: &BoundedConfig) -> Vec<Term> {
    let mut v = value_pool(ty, cfg);
    v.truncate(cfg.samples_per_function.max(1));
    v
}
