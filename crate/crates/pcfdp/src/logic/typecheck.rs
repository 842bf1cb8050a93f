use crate::syntax::typecheck::op_result_type;
use crate::syntax::{fresh_name, typecheck_term, Type, TypeError, TypingCtx};

use super::ast::{Expr, Formula, Judgement};
use super::vars::fv_expr;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FormulaTypeError {
    #[error(transparent)]
    Expr(#[from] TypeError),
    #[error("equality operands differ: {left} vs {right}")]
    EqMismatch { left: Type, right: Type },
    #[error("evaluation subject must be a function, found {found}")]
    SubjectNotFunction { found: Type },
    #[error("code evaluation subject must have a code type, found {found}")]
    SubjectNotCode { found: Type },
    #[error("evaluation argument has type {found}, subject expects {expected}")]
    EvalArgMismatch { expected: Type, found: Type },
    #[error("judgement anchor `{name}` already bound in the context")]
    AnchorInContext { name: String },
}

/// Type of an assertion expression under both context halves.
pub fn type_of_expr(ctx: &TypingCtx, e: &Expr) -> Result<Type, FormulaTypeError> {
    match e {
        Expr::Const(l) => Ok(l.ty()),
        Expr::Var(x) => match ctx.lookup(x) {
            Some((t, _)) => Ok(t.clone()),
            None => Err(TypeError::Unbound(x.clone()).into()),
        },
        Expr::Op(op, args) => {
            if args.len() != op.arity() {
                return Err(TypeError::OpArity {
                    op: op.symbol(),
                    expected: op.arity(),
                    found: args.len(),
                }
                .into());
            }
            let tys = args
                .iter()
                .map(|a| type_of_expr(ctx, a))
                .collect::<Result<Vec<_>, _>>()?;
            op_result_type(*op, &tys).map_err(Into::into)
        }
    }
}

/// Check `Γ; Δ ⊢ A`. Logical equality is permitted at every type; the
/// anchor of an evaluation form binds non-modally, that of a code
/// evaluation modally.
pub fn typecheck_formula(ctx: &TypingCtx, a: &Formula) -> Result<(), FormulaTypeError> {
    match a {
        Formula::TrueF | Formula::FalseF => Ok(()),
        Formula::Eq(l, r) => {
            let tl = type_of_expr(ctx, l)?;
            let tr = type_of_expr(ctx, r)?;
            if tl != tr {
                return Err(FormulaTypeError::EqMismatch { left: tl, right: tr });
            }
            Ok(())
        }
        Formula::Conv(e) => {
            type_of_expr(ctx, e)?;
            Ok(())
        }
        Formula::Not(b) => typecheck_formula(ctx, b),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            typecheck_formula(ctx, l)?;
            typecheck_formula(ctx, r)
        }
        Formula::Forall(x, ty, b) | Formula::Exists(x, ty, b) => {
            typecheck_formula(&ctx.bind(x, ty.clone()), b)
        }
        Formula::ForallModal(x, ty, b) | Formula::ExistsModal(x, ty, b) => {
            typecheck_formula(&ctx.bind_modal(x, ty.clone()), b)
        }
        Formula::OneEval { subj, arg, anchor, body } => {
            let ts = type_of_expr(ctx, subj)?;
            let (dom, cod) = match ts {
                Type::Arrow(d, c) => (*d, *c),
                other => return Err(FormulaTypeError::SubjectNotFunction { found: other }),
            };
            let ta = type_of_expr(ctx, arg)?;
            if ta != dom {
                return Err(FormulaTypeError::EvalArgMismatch { expected: dom, found: ta });
            }
            typecheck_formula(&ctx.bind(anchor, cod), body)
        }
        Formula::CodeEval { subj, anchor, body } => {
            let ts = type_of_expr(ctx, subj)?;
            let inner = match ts {
                Type::Code(t) => *t,
                other => return Err(FormulaTypeError::SubjectNotCode { found: other }),
            };
            typecheck_formula(&ctx.bind_modal(anchor, inner), body)
        }
    }
}

/// Check a judgement: the anchor must be new, the precondition well-typed
/// as is, the postcondition well-typed with the anchor bound non-modally
/// at the program's type. Returns that type.
pub fn typecheck_judgement(ctx: &TypingCtx, j: &Judgement) -> Result<Type, FormulaTypeError> {
    if ctx.contains(&j.anchor) {
        return Err(FormulaTypeError::AnchorInContext { name: j.anchor.clone() });
    }
    typecheck_formula(ctx, &j.pre)?;
    let ty = typecheck_term(ctx, &j.term)?;
    typecheck_formula(&ctx.bind(&j.anchor, ty.clone()), &j.post)?;
    Ok(ty)
}

/// Rewrite convergence assertions into their quantified form:
/// `conv(e)` becomes `exists y:ty. e == y` with `y` fresh and non-modal.
/// Idempotent; needs the context to type `e`.
pub fn expand_abbrev(ctx: &TypingCtx, a: &Formula) -> Result<Formula, FormulaTypeError> {
    match a {
        Formula::TrueF | Formula::FalseF | Formula::Eq(..) => Ok(a.clone()),
        Formula::Conv(e) => {
            let ty = type_of_expr(ctx, e)?;
            let mut avoid = fv_expr(e);
            avoid.extend(ctx.names().cloned());
            let y = if avoid.contains("y") { fresh_name("y", &avoid) } else { "y".to_string() };
            Ok(Formula::Exists(
                y.clone(),
                ty,
                Box::new(Formula::Eq(e.clone(), Expr::Var(y))),
            ))
        }
        Formula::Not(b) => Ok(Formula::not(expand_abbrev(ctx, b)?)),
        Formula::And(l, r) => {
            Ok(Formula::and(expand_abbrev(ctx, l)?, expand_abbrev(ctx, r)?))
        }
        Formula::Or(l, r) => {
            Ok(Formula::or(expand_abbrev(ctx, l)?, expand_abbrev(ctx, r)?))
        }
        Formula::Implies(l, r) => {
            Ok(Formula::implies(expand_abbrev(ctx, l)?, expand_abbrev(ctx, r)?))
        }
        Formula::Forall(x, ty, b) => Ok(Formula::Forall(
            x.clone(),
            ty.clone(),
            Box::new(expand_abbrev(&ctx.bind(x, ty.clone()), b)?),
        )),
        Formula::Exists(x, ty, b) => Ok(Formula::Exists(
            x.clone(),
            ty.clone(),
            Box::new(expand_abbrev(&ctx.bind(x, ty.clone()), b)?),
        )),
        Formula::ForallModal(x, ty, b) => Ok(Formula::ForallModal(
            x.clone(),
            ty.clone(),
            Box::new(expand_abbrev(&ctx.bind_modal(x, ty.clone()), b)?),
        )),
        Formula::ExistsModal(x, ty, b) => Ok(Formula::ExistsModal(
            x.clone(),
            ty.clone(),
            Box::new(expand_abbrev(&ctx.bind_modal(x, ty.clone()), b)?),
        )),
        Formula::OneEval { subj, arg, anchor, body } => {
            let ts = type_of_expr(ctx, subj)?;
            let cod = match ts {
                Type::Arrow(_, c) => *c,
                other => return Err(FormulaTypeError::SubjectNotFunction { found: other }),
            };
            Ok(Formula::OneEval {
                subj: subj.clone(),
                arg: arg.clone(),
                anchor: anchor.clone(),
                body: Box::new(expand_abbrev(&ctx.bind(anchor, cod), body)?),
            })
        }
        Formula::CodeEval { subj, anchor, body } => {
            let ts = type_of_expr(ctx, subj)?;
            let inner = match ts {
                Type::Code(t) => *t,
                other => return Err(FormulaTypeError::SubjectNotCode { found: other }),
            };
            Ok(Formula::CodeEval {
                subj: subj.clone(),
                anchor: anchor.clone(),
                body: Box::new(expand_abbrev(&ctx.bind_modal(anchor, inner), body)?),
            })
        }
    }
}

/// A context from name/type pairs, non-modal unless marked.
#[cfg(test)]
pub(crate) fn ctx_of(entries: &[(&str, &str, bool)]) -> TypingCtx {
    let mut ctx = TypingCtx::new();
    for (name, ty, modal) in entries {
        let ty = crate::syntax::parse_type(ty).unwrap();
        ctx = if *modal { ctx.bind_modal(name, ty) } else { ctx.bind(name, ty) };
    }
    ctx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::syntax::parse_term;

    fn check_in(entries: &[(&str, &str, bool)], src: &str) -> Result<(), FormulaTypeError> {
        typecheck_formula(&ctx_of(entries), &parse_formula(src).unwrap())
    }

    #[test]
    fn staged_lift_specification_typechecks() {
        // u names a function producing code of its argument
        let r = check_in(
            &[("u", "Int -> [| Int |]", false)],
            "forall n:Int. (0 <= n) == true => eval u n as m. unbox m as x. x == n",
        );
        assert!(r.is_ok());
    }

    #[test]
    fn equality_needs_agreeing_types() {
        let e = check_in(&[("x", "Int", false)], "x == true").unwrap_err();
        assert!(matches!(e, FormulaTypeError::EqMismatch { .. }));
    }

    #[test]
    fn logical_equality_allowed_at_code_and_function_types() {
        assert!(check_in(
            &[("x", "[| Int |]", false), ("y", "[| Int |]", false)],
            "x == y"
        )
        .is_ok());
        assert!(check_in(
            &[("f", "Int -> Int", false), ("g", "Int -> Int", false)],
            "f == g"
        )
        .is_ok());
    }

    #[test]
    fn operator_equality_still_base_only() {
        let e = check_in(
            &[("x", "[| Int |]", false), ("y", "[| Int |]", false)],
            "(x == y) == true",
        )
        .unwrap_err();
        assert!(matches!(e, FormulaTypeError::Expr(TypeError::EqAtNonBase { .. })));
    }

    #[test]
    fn code_eval_anchor_is_modal() {
        let r = check_in(&[("m", "[| Int |]", false)], "unbox m as x. conv(x)");
        assert!(r.is_ok());
    }

    #[test]
    fn eval_subject_must_be_function() {
        let e = check_in(&[("u", "Int", false)], "eval u 2 as z. T").unwrap_err();
        assert!(matches!(e, FormulaTypeError::SubjectNotFunction { .. }));
    }

    #[test]
    fn eval_argument_type_checked() {
        let e =
            check_in(&[("u", "Int -> Int", false)], "eval u true as z. T").unwrap_err();
        assert!(matches!(e, FormulaTypeError::EvalArgMismatch { .. }));
    }

    #[test]
    fn modal_quantifier_binds_modally() {
        assert!(check_in(&[], "forallc x:Int. x == x").is_ok());
    }

    #[test]
    fn judgement_anchor_must_be_new() {
        let j = Judgement {
            pre: Formula::TrueF,
            term: parse_term("1 + 2").unwrap(),
            anchor: "m".to_string(),
            post: parse_formula("m == 3").unwrap(),
        };
        assert_eq!(typecheck_judgement(&TypingCtx::new(), &j).unwrap(), Type::Int);
        let e = typecheck_judgement(&ctx_of(&[("m", "Int", false)]), &j).unwrap_err();
        assert!(matches!(e, FormulaTypeError::AnchorInContext { .. }));
    }

    #[test]
    fn conv_expands_to_an_existential_and_is_idempotent() {
        let ctx = ctx_of(&[("x", "[| Int |]", true)]);
        let a = parse_formula("conv(x)").unwrap();
        let e1 = expand_abbrev(&ctx, &a).unwrap();
        assert_eq!(e1, parse_formula("exists y:[| Int |]. x == y").unwrap());
        assert_eq!(expand_abbrev(&ctx, &e1).unwrap(), e1);
    }

    #[test]
    fn conv_expansion_avoids_captured_names() {
        let ctx = ctx_of(&[("y", "Int", false)]);
        let e = expand_abbrev(&ctx, &parse_formula("conv(y)").unwrap()).unwrap();
        assert_eq!(e, parse_formula("exists y':Int. y == y'").unwrap());
    }

    #[test]
    fn expansion_descends_under_binders() {
        let ctx = TypingCtx::new();
        let a = parse_formula("forallc x:Int. conv(x) => T").unwrap();
        let e = expand_abbrev(&ctx, &a).unwrap();
        assert_eq!(
            e,
            parse_formula("forallc x:Int. (exists y:Int. x == y) => T").unwrap()
        );
    }
}
