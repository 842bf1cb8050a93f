use std::collections::BTreeMap;

use super::ast::{OpKind, Term, Type};

/// Dual typing context: `gamma` holds ordinary (non-modal) variables,
/// `delta` holds modal variables bound by unquote. The two domains are
/// kept disjoint; binding shadows any previous entry for the name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypingCtx {
    gamma: BTreeMap<String, Type>,
    delta: BTreeMap<String, Type>,
}

impl TypingCtx {
    pub fn new() -> TypingCtx {
        TypingCtx::default()
    }

    /// Build from explicit maps; rejects overlapping domains.
    pub fn from_maps(
        gamma: BTreeMap<String, Type>,
        delta: BTreeMap<String, Type>,
    ) -> Result<TypingCtx, TypeError> {
        if let Some(name) = gamma.keys().find(|k| delta.contains_key(*k)) {
            return Err(TypeError::ContextOverlap { name: name.clone() });
        }
        Ok(TypingCtx { gamma, delta })
    }

    pub fn gamma(&self) -> &BTreeMap<String, Type> {
        &self.gamma
    }

    pub fn delta(&self) -> &BTreeMap<String, Type> {
        &self.delta
    }

    pub fn lookup(&self, name: &str) -> Option<(&Type, bool)> {
        if let Some(t) = self.gamma.get(name) {
            Some((t, false))
        } else {
            self.delta.get(name).map(|t| (t, true))
        }
    }

    pub fn is_modal(&self, name: &str) -> bool {
        self.delta.contains_key(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.gamma.contains_key(name) || self.delta.contains_key(name)
    }

    /// Bind a non-modal variable, shadowing any modal binding of the name.
    pub fn bind(&self, name: &str, ty: Type) -> TypingCtx {
        let mut c = self.clone();
        c.delta.remove(name);
        c.gamma.insert(name.to_string(), ty);
        c
    }

    /// Bind a modal variable, shadowing any non-modal binding of the name.
    pub fn bind_modal(&self, name: &str, ty: Type) -> TypingCtx {
        let mut c = self.clone();
        c.gamma.remove(name);
        c.delta.insert(name.to_string(), ty);
        c
    }

    /// The view inside a quotation: the non-modal context is emptied.
    pub fn quote_view(&self) -> TypingCtx {
        TypingCtx { gamma: BTreeMap::new(), delta: self.delta.clone() }
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty() && self.delta.is_empty()
    }

    /// All bound names, both kinds.
    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.gamma.keys().chain(self.delta.keys())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("non-modal free variable `{name}` under quote")]
    NonModalUnderQuote { name: String },
    #[error("context binds `{name}` both modally and non-modally")]
    ContextOverlap { name: String },
    #[error("application of a non-function of type {found}")]
    NotAFunction { found: Type },
    #[error("argument type mismatch: function expects {expected}, argument has {found}")]
    ArgMismatch { expected: Type, found: Type },
    #[error("recursion annotation must be a function type, found {found}")]
    RecNotArrow { found: Type },
    #[error("recursion body must be an abstraction")]
    RecBodyNotAbs,
    #[error("recursion body has type {found}, annotation says {expected}")]
    RecMismatch { expected: Type, found: Type },
    #[error("operator `{op}` expects {expected} at argument {index}, found {found}")]
    OpArgType { op: &'static str, index: usize, expected: &'static str, found: Type },
    #[error("operator `{op}` applied to {found} arguments, expects {expected}")]
    OpArity { op: &'static str, expected: usize, found: usize },
    #[error("equality is restricted to base types, found {found}")]
    EqAtNonBase { found: Type },
    #[error("equality operands differ: {left} vs {right}")]
    EqOperandsDiffer { left: Type, right: Type },
    #[error("if-condition must be Bool, found {found}")]
    CondNotBool { found: Type },
    #[error("if-branches differ: {then_ty} vs {else_ty}")]
    BranchMismatch { then_ty: Type, else_ty: Type },
    #[error("unquote right-hand side must have a code type, found {found}")]
    UnquoteRhsNotCode { found: Type },
}

/// Syntax-directed type checking of `Γ; Δ ⊢ M : α`.
///
/// Quotation retypes its body with the non-modal context emptied, so only
/// modal variables survive under a quote; unquote moves its binder into
/// the modal context; lambda and mu bind non-modally.
pub fn typecheck_term(ctx: &TypingCtx, m: &Term) -> Result<Type, TypeError> {
    // the public entry revalidates disjointness on externally built contexts
    if let Some(name) = ctx.gamma.keys().find(|k| ctx.delta.contains_key(*k)) {
        return Err(TypeError::ContextOverlap { name: name.clone() });
    }
    check(ctx, m, false)
}

fn check(ctx: &TypingCtx, m: &Term, under_quote: bool) -> Result<Type, TypeError> {
    match m {
        Term::Const(l) => Ok(l.ty()),
        Term::Var(x) => match ctx.lookup(x) {
            Some((t, _)) => Ok(t.clone()),
            None if under_quote => Err(TypeError::NonModalUnderQuote { name: x.clone() }),
            None => Err(TypeError::Unbound(x.clone())),
        },
        Term::Abs(x, ty, body) => {
            let inner = check(&ctx.bind(x, ty.clone()), body, under_quote)?;
            Ok(Type::arrow(ty.clone(), inner))
        }
        Term::Rec(g, ty, body) => {
            if !matches!(ty, Type::Arrow(..)) {
                return Err(TypeError::RecNotArrow { found: ty.clone() });
            }
            if !matches!(**body, Term::Abs(..)) {
                return Err(TypeError::RecBodyNotAbs);
            }
            let found = check(&ctx.bind(g, ty.clone()), body, under_quote)?;
            if found != *ty {
                return Err(TypeError::RecMismatch { expected: ty.clone(), found });
            }
            Ok(ty.clone())
        }
        Term::App(f, a) => {
            let tf = check(ctx, f, under_quote)?;
            let ta = check(ctx, a, under_quote)?;
            match tf {
                Type::Arrow(dom, cod) => {
                    if *dom == ta {
                        Ok(*cod)
                    } else {
                        Err(TypeError::ArgMismatch { expected: *dom, found: ta })
                    }
                }
                other => Err(TypeError::NotAFunction { found: other }),
            }
        }
        Term::Op(op, args) => {
            if args.len() != op.arity() {
                return Err(TypeError::OpArity {
                    op: op.symbol(),
                    expected: op.arity(),
                    found: args.len(),
                });
            }
            let tys: Vec<Type> = args
                .iter()
                .map(|a| check(ctx, a, under_quote))
                .collect::<Result<_, _>>()?;
            op_result_type(*op, &tys)
        }
        Term::If(c, t, e) => {
            let tc = check(ctx, c, under_quote)?;
            if tc != Type::Bool {
                return Err(TypeError::CondNotBool { found: tc });
            }
            let tt = check(ctx, t, under_quote)?;
            let te = check(ctx, e, under_quote)?;
            if tt != te {
                return Err(TypeError::BranchMismatch { then_ty: tt, else_ty: te });
            }
            Ok(tt)
        }
        Term::Quote(body) => {
            let inner = check(&ctx.quote_view(), body, true)?;
            Ok(Type::code(inner))
        }
        Term::Unquote(x, rhs, body) => {
            let trhs = check(ctx, rhs, under_quote)?;
            match trhs {
                Type::Code(inner) => check(&ctx.bind_modal(x, *inner), body, under_quote),
                other => Err(TypeError::UnquoteRhsNotCode { found: other }),
            }
        }
    }
}

pub(crate) fn op_result_type(op: OpKind, tys: &[Type]) -> Result<Type, TypeError> {
    let want = |index: usize, expected: Type, name: &'static str| -> Result<(), TypeError> {
        if tys[index] == expected {
            Ok(())
        } else {
            Err(TypeError::OpArgType {
                op: op.symbol(),
                index,
                expected: name,
                found: tys[index].clone(),
            })
        }
    };
    match op {
        OpKind::Add | OpKind::Sub | OpKind::Mul => {
            want(0, Type::Int, "Int")?;
            want(1, Type::Int, "Int")?;
            Ok(Type::Int)
        }
        OpKind::Le => {
            want(0, Type::Int, "Int")?;
            want(1, Type::Int, "Int")?;
            Ok(Type::Bool)
        }
        OpKind::Eq => {
            if tys[0] != tys[1] {
                return Err(TypeError::EqOperandsDiffer {
                    left: tys[0].clone(),
                    right: tys[1].clone(),
                });
            }
            if !tys[0].is_base() {
                return Err(TypeError::EqAtNonBase { found: tys[0].clone() });
            }
            Ok(Type::Bool)
        }
        OpKind::And | OpKind::Or => {
            want(0, Type::Bool, "Bool")?;
            want(1, Type::Bool, "Bool")?;
            Ok(Type::Bool)
        }
        OpKind::Not => {
            want(0, Type::Bool, "Bool")?;
            Ok(Type::Bool)
        }
    }
}
