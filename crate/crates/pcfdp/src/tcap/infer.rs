//! Characteristic pre/postcondition synthesis.
//!
//! One pass over a typed term computes, for every node, an assertion
//! pair whose shape is fixed by the node's construct.  Nothing is
//! simplified here; `simplify` is a separate, logged pass.

use std::collections::BTreeSet;

use crate::logic::{subst_formula, Expr, Formula, Judgement, NameSupply};
use crate::syntax::{substitute, typecheck_term, Term, Type, TypeError, TypingCtx};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TcapError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("anchor `{0}` is already bound in the context")]
    AnchorTaken(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleTag {
    Var,
    VarModal,
    Const,
    Op,
    Abs,
    App,
    If,
    Rec,
    Quote,
    Unquote,
}

impl RuleTag {
    pub fn name(self) -> &'static str {
        match self {
            RuleTag::Var => "var_t",
            RuleTag::VarModal => "var_m_t",
            RuleTag::Const => "const_t",
            RuleTag::Op => "op_t",
            RuleTag::Abs => "abs_t",
            RuleTag::App => "app_t",
            RuleTag::If => "if_t",
            RuleTag::Rec => "rec_t",
            RuleTag::Quote => "quote_t",
            RuleTag::Unquote => "unquote_t",
        }
    }
}

/// One node of the synthesis tree: the rule used, the subject's type,
/// the judgement concluded, and the premises in source order.
///
/// Premise judgements store the term actually analysed, which is an
/// alpha-renamed copy of the source whenever a bound name would have
/// clashed with the anchor or the ambient context.  `aux` lists the
/// names this node introduced beyond its premise anchors: the
/// effective binder for `Abs`/`Rec`, the result name for `App`, and
/// binder plus both guard anchors for `Unquote`.
#[derive(Debug, Clone)]
pub struct Deriv {
    pub tag: RuleTag,
    pub ty: Type,
    pub judgement: Judgement,
    pub aux: Vec<String>,
    pub premises: Vec<Deriv>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule: &'static str,
    pub judgement: String,
}

#[derive(Debug, Clone)]
pub struct TcapResult {
    pub pre: Formula,
    pub post: Formula,
    pub anchor: String,
    pub derivation: Vec<TraceEntry>,
}

/// Fresh names for anchors and renamed binders.  Counters are
/// per-base, and every candidate is checked against the context, the
/// whole subject term, the requested anchor, and anything handed out
/// earlier, so the output is deterministic for a given input.
pub(crate) struct TcapSupply {
    supply: NameSupply,
    avoid: BTreeSet<String>,
}

impl TcapSupply {
    pub(crate) fn new(ctx: &TypingCtx, term: &Term, anchor: &str) -> TcapSupply {
        let mut avoid: BTreeSet<String> = ctx.names().cloned().collect();
        all_names(term, &mut avoid);
        avoid.insert(anchor.to_string());
        TcapSupply { supply: NameSupply::new(), avoid }
    }

    pub(crate) fn fresh(&mut self, base: &str) -> String {
        loop {
            let name = self.supply.fresh(base);
            if self.avoid.insert(name.clone()) {
                return name;
            }
        }
    }
}

fn all_names(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Const(_) => {}
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Abs(x, _, b) | Term::Rec(x, _, b) => {
            out.insert(x.clone());
            all_names(b, out);
        }
        Term::App(f, a) => {
            all_names(f, out);
            all_names(a, out);
        }
        Term::Op(_, args) => {
            for a in args {
                all_names(a, out);
            }
        }
        Term::If(c, t1, t2) => {
            all_names(c, out);
            all_names(t1, out);
            all_names(t2, out);
        }
        Term::Quote(b) => all_names(b, out),
        Term::Unquote(x, rhs, b) => {
            out.insert(x.clone());
            all_names(rhs, out);
            all_names(b, out);
        }
    }
}

/// Compute the assertion pair of `term` at `anchor`, together with the
/// rule-by-rule trace in post order.
pub fn tcap_infer(ctx: &TypingCtx, term: &Term, anchor: &str) -> Result<TcapResult, TcapError> {
    let tree = infer_tree(ctx, term, anchor)?;
    let mut derivation = Vec::new();
    trace(&tree, &mut derivation);
    Ok(TcapResult {
        pre: tree.judgement.pre,
        post: tree.judgement.post,
        anchor: tree.judgement.anchor,
        derivation,
    })
}

/// Full synthesis tree, for consumers that need the premises (proof
/// script generation, consistency testing).
pub fn infer_tree(ctx: &TypingCtx, term: &Term, anchor: &str) -> Result<Deriv, TcapError> {
    if ctx.contains(anchor) {
        return Err(TcapError::AnchorTaken(anchor.to_string()));
    }
    typecheck_term(ctx, term)?;
    let mut supply = TcapSupply::new(ctx, term, anchor);
    let tree = infer(ctx, term, anchor, &mut supply)?;
    debug_assert!(crate::logic::typecheck_judgement(ctx, &tree.judgement).is_ok());
    Ok(tree)
}

fn trace(d: &Deriv, out: &mut Vec<TraceEntry>) {
    for p in &d.premises {
        trace(p, out);
    }
    out.push(TraceEntry { rule: d.tag.name(), judgement: d.judgement.to_string() });
}

fn leaf(tag: RuleTag, ty: Type, pre: Formula, term: Term, anchor: &str, post: Formula) -> Deriv {
    Deriv {
        tag,
        ty,
        judgement: Judgement { pre, term, anchor: anchor.to_string(), post },
        aux: Vec::new(),
        premises: Vec::new(),
    }
}

fn infer(ctx: &TypingCtx, term: &Term, anchor: &str, sup: &mut TcapSupply) -> Result<Deriv, TcapError> {
    let ty = typecheck_term(ctx, term)?;
    match term {
        Term::Const(l) => {
            let post = Formula::eq(Expr::var(anchor), Expr::Const(l.clone()));
            Ok(leaf(RuleTag::Const, ty, Formula::TrueF, term.clone(), anchor, post))
        }
        Term::Var(x) => {
            let post = Formula::eq(Expr::var(anchor), Expr::var(x));
            if ctx.is_modal(x) {
                let pre = Formula::Conv(Expr::var(x));
                Ok(leaf(RuleTag::VarModal, ty, pre, term.clone(), anchor, post))
            } else {
                Ok(leaf(RuleTag::Var, ty, Formula::TrueF, term.clone(), anchor, post))
            }
        }
        Term::Op(op, args) => {
            let names: Vec<String> = args.iter().map(|_| sup.fresh("a")).collect();
            let premises = args
                .iter()
                .zip(&names)
                .map(|(a, n)| infer(ctx, a, n, sup))
                .collect::<Result<Vec<_>, _>>()?;
            let pre = Formula::conj(premises.iter().map(|p| p.judgement.pre.clone()));
            let eq = Formula::eq(
                Expr::var(anchor),
                Expr::Op(*op, names.iter().map(|n| Expr::var(n)).collect()),
            );
            let mut post = Formula::conj(
                std::iter::once(eq).chain(premises.iter().map(|p| p.judgement.post.clone())),
            );
            for (n, p) in names.iter().zip(&premises).rev() {
                post = Formula::exists(n, p.ty.clone(), post);
            }
            let term_eff =
                Term::Op(*op, premises.iter().map(|p| p.judgement.term.clone()).collect());
            let judgement = Judgement { pre, term: term_eff, anchor: anchor.to_string(), post };
            Ok(Deriv { tag: RuleTag::Op, ty, judgement, aux: Vec::new(), premises })
        }
        Term::Abs(x, dom, body) => {
            let (x_eff, body_eff) = if x == anchor {
                let fresh = sup.fresh(x);
                let renamed = substitute(body, x, &Term::var(&fresh));
                (fresh, renamed)
            } else {
                (x.clone(), (**body).clone())
            };
            let c = sup.fresh("c");
            let p = infer(&ctx.bind(&x_eff, dom.clone()), &body_eff, &c, sup)?;
            let post = Formula::forall(
                &x_eff,
                dom.clone(),
                Formula::implies(
                    p.judgement.pre.clone(),
                    Formula::one_eval(
                        Expr::var(anchor),
                        Expr::var(&x_eff),
                        &c,
                        p.judgement.post.clone(),
                    ),
                ),
            );
            let term_eff = Term::abs(&x_eff, dom.clone(), p.judgement.term.clone());
            let judgement =
                Judgement { pre: Formula::TrueF, term: term_eff, anchor: anchor.to_string(), post };
            Ok(Deriv { tag: RuleTag::Abs, ty, judgement, aux: vec![x_eff], premises: vec![p] })
        }
        Term::App(fun, arg) => {
            let m = sup.fresh("m");
            let n = sup.fresh("n");
            let p1 = infer(ctx, fun, &m, sup)?;
            let p2 = infer(ctx, arg, &n, sup)?;
            let z = sup.fresh("z");
            let b1b2 = Formula::and(p1.judgement.post.clone(), p2.judgement.post.clone());
            let pre = Formula::and(
                Formula::and(p1.judgement.pre.clone(), p2.judgement.pre.clone()),
                Formula::forall(
                    &m,
                    p1.ty.clone(),
                    Formula::forall(
                        &n,
                        p2.ty.clone(),
                        Formula::implies(
                            b1b2.clone(),
                            Formula::one_eval(Expr::var(&m), Expr::var(&n), &z, Formula::TrueF),
                        ),
                    ),
                ),
            );
            let post = Formula::exists(
                &m,
                p1.ty.clone(),
                Formula::exists(
                    &n,
                    p2.ty.clone(),
                    Formula::one_eval(
                        Expr::var(&m),
                        Expr::var(&n),
                        &z,
                        Formula::and(b1b2, Formula::eq(Expr::var(&z), Expr::var(anchor))),
                    ),
                ),
            );
            let term_eff = Term::app(p1.judgement.term.clone(), p2.judgement.term.clone());
            let judgement = Judgement { pre, term: term_eff, anchor: anchor.to_string(), post };
            Ok(Deriv { tag: RuleTag::App, ty, judgement, aux: vec![z], premises: vec![p1, p2] })
        }
        Term::If(cond, tbr, fbr) => {
            let b = sup.fresh("b");
            let pc = infer(ctx, cond, &b, sup)?;
            let pt = infer(ctx, tbr, anchor, sup)?;
            let pf = infer(ctx, fbr, anchor, sup)?;
            let on = |val: bool| {
                subst_formula(&pc.judgement.post, &Expr::bool(val), &b)
                    .expect("boolean anchor cannot be an evaluation subject")
            };
            let (bt, bf) = (on(true), on(false));
            let pre = Formula::and(
                Formula::and(
                    pc.judgement.pre.clone(),
                    Formula::implies(bt.clone(), pt.judgement.pre.clone()),
                ),
                Formula::implies(bf.clone(), pf.judgement.pre.clone()),
            );
            let post = Formula::or(
                Formula::and(bt, pt.judgement.post.clone()),
                Formula::and(bf, pf.judgement.post.clone()),
            );
            let term_eff = Term::ite(
                pc.judgement.term.clone(),
                pt.judgement.term.clone(),
                pf.judgement.term.clone(),
            );
            let judgement = Judgement { pre, term: term_eff, anchor: anchor.to_string(), post };
            Ok(Deriv { tag: RuleTag::If, ty, judgement, aux: Vec::new(), premises: vec![pc, pt, pf] })
        }
        Term::Rec(g, rty, body) => {
            let (g_eff, body_eff) = if g == anchor {
                let fresh = sup.fresh(g);
                let renamed = substitute(body, g, &Term::var(&fresh));
                (fresh, renamed)
            } else {
                (g.clone(), (**body).clone())
            };
            let p = infer(&ctx.bind(&g_eff, rty.clone()), &body_eff, anchor, sup)?;
            let post = subst_formula(&p.judgement.post, &Expr::var(anchor), &g_eff)
                .expect("recursion binder cannot be an evaluation subject");
            let term_eff = Term::rec(&g_eff, rty.clone(), p.judgement.term.clone());
            let judgement = Judgement {
                pre: p.judgement.pre.clone(),
                term: term_eff,
                anchor: anchor.to_string(),
                post,
            };
            Ok(Deriv { tag: RuleTag::Rec, ty, judgement, aux: vec![g_eff], premises: vec![p] })
        }
        Term::Quote(body) => {
            let m = sup.fresh("m");
            let p = infer(&ctx.quote_view(), body, &m, sup)?;
            let post = Formula::implies(
                p.judgement.pre.clone(),
                Formula::code_eval(Expr::var(anchor), &m, p.judgement.post.clone()),
            );
            let term_eff = Term::quote(p.judgement.term.clone());
            let judgement =
                Judgement { pre: Formula::TrueF, term: term_eff, anchor: anchor.to_string(), post };
            Ok(Deriv { tag: RuleTag::Quote, ty, judgement, aux: Vec::new(), premises: vec![p] })
        }
        Term::Unquote(x, rhs, body) => {
            let m = sup.fresh("m");
            let p1 = infer(ctx, rhs, &m, sup)?;
            let alpha = match &p1.ty {
                Type::Code(t) => (**t).clone(),
                _ => unreachable!("splice source has code type"),
            };
            let (x_eff, body_eff) = if x == anchor || ctx.contains(x) {
                let fresh = sup.fresh(x);
                let renamed = substitute(body, x, &Term::var(&fresh));
                (fresh, renamed)
            } else {
                (x.clone(), (**body).clone())
            };
            let p2 = infer(&ctx.bind_modal(&x_eff, alpha.clone()), &body_eff, anchor, sup)?;
            let w = sup.fresh("w");
            let w2 = sup.fresh("w");
            let a2 = p2.judgement.pre.clone();
            let b1 = p1.judgement.post.clone();
            let pre = Formula::and(
                p1.judgement.pre.clone(),
                Formula::or(
                    Formula::forall_modal(&x_eff, alpha.clone(), a2.clone()),
                    Formula::forall(
                        &m,
                        Type::code(alpha.clone()),
                        Formula::implies(
                            b1.clone(),
                            Formula::code_eval(Expr::var(&m), &x_eff, a2),
                        ),
                    ),
                ),
            );
            let guard = Formula::implies(
                Formula::code_eval(Expr::var(&m), &w, Formula::TrueF),
                Formula::code_eval(
                    Expr::var(&m),
                    &w2,
                    Formula::eq(Expr::var(&w2), Expr::var(&x_eff)),
                ),
            );
            let post = Formula::exists(
                &m,
                Type::code(alpha.clone()),
                Formula::exists_modal(
                    &x_eff,
                    alpha,
                    Formula::and(Formula::and(guard, b1), p2.judgement.post.clone()),
                ),
            );
            let term_eff =
                Term::unquote(&x_eff, p1.judgement.term.clone(), p2.judgement.term.clone());
            let judgement = Judgement { pre, term: term_eff, anchor: anchor.to_string(), post };
            Ok(Deriv {
                tag: RuleTag::Unquote,
                ty,
                judgement,
                aux: vec![x_eff, w, w2],
                premises: vec![p1, p2],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{alpha_eq_formula, fv_formula, parse_formula};
    use crate::syntax::parse_term;

    fn go(ctx: &TypingCtx, src: &str, anchor: &str) -> TcapResult {
        tcap_infer(ctx, &parse_term(src).unwrap(), anchor).unwrap()
    }

    fn fml(src: &str) -> Formula {
        parse_formula(src).unwrap()
    }

    #[test]
    fn add_constants_pair() {
        let r = go(&TypingCtx::new(), "2 + 3", "c");
        assert!(alpha_eq_formula(&r.pre, &fml("T /\\ T")));
        let want = fml("exists a:Int. exists b:Int. ((c == a + b /\\ a == 2) /\\ b == 3)");
        assert!(alpha_eq_formula(&r.post, &want), "got {}", r.post);
    }

    #[test]
    fn modal_variable_needs_convergence() {
        let ctx = TypingCtx::new().bind_modal("x", Type::Int);
        let r = go(&ctx, "x", "u");
        assert_eq!(r.pre, Formula::Conv(Expr::var("x")));
        assert_eq!(r.post, fml("u == x"));
    }

    #[test]
    fn plain_variable_unconditional() {
        let ctx = TypingCtx::new().bind("x", Type::Int);
        let r = go(&ctx, "x", "u");
        assert_eq!(r.pre, Formula::TrueF);
        assert_eq!(r.post, fml("u == x"));
    }

    #[test]
    fn abstraction_post_shape() {
        let r = go(&TypingCtx::new(), "\\x:Int. x + 1", "u");
        assert_eq!(r.pre, Formula::TrueF);
        let want = fml(
            "forall x:Int. (T /\\ T => eval u x as c. \
             exists a:Int. exists b:Int. ((c == a + b /\\ a == x) /\\ b == 1))",
        );
        assert!(alpha_eq_formula(&r.post, &want), "got {}", r.post);
    }

    #[test]
    fn binder_clashing_with_anchor_renamed() {
        let r = go(&TypingCtx::new(), "\\u:Int. u", "u");
        let want = fml("forall y:Int. (T => eval u y as c. c == y)");
        assert!(alpha_eq_formula(&r.post, &want), "got {}", r.post);
    }

    #[test]
    fn splice_binder_clashing_with_outer_scope_renamed() {
        let ctx = TypingCtx::new().bind("x", Type::code(Type::Int));
        let r = go(&ctx, "let [| x |] = x in x", "u");
        // the equation from the source half must keep pointing at the
        // outer x, not get caught by the binder in the result
        let want = fml(
            "exists m:[| Int |]. existsc y:Int. \
             ((((unbox m as w. T) => unbox m as w2. w2 == y) /\\ m == x) /\\ u == y)",
        );
        assert!(alpha_eq_formula(&r.post, &want), "got {}", r.post);
    }

    #[test]
    fn application_pair() {
        let ctx = TypingCtx::new().bind("f", Type::arrow(Type::Int, Type::Int));
        let r = go(&ctx, "f 1", "u");
        let want_pre = fml(
            "(T /\\ T) /\\ forall m:Int -> Int. forall n:Int. \
             (m == f /\\ n == 1 => eval m n as z. T)",
        );
        let want_post = fml(
            "exists m:Int -> Int. exists n:Int. \
             eval m n as z. ((m == f /\\ n == 1) /\\ z == u)",
        );
        assert!(alpha_eq_formula(&r.pre, &want_pre), "got {}", r.pre);
        assert!(alpha_eq_formula(&r.post, &want_post), "got {}", r.post);
    }

    #[test]
    fn conditional_pair() {
        let r = go(&TypingCtx::new(), "if true then 1 else 2", "u");
        let want_pre = fml("(T /\\ (true == true => T)) /\\ (false == true => T)");
        let want_post =
            fml("(true == true /\\ u == 1) \\/ (false == true /\\ u == 2)");
        assert!(alpha_eq_formula(&r.pre, &want_pre), "got {}", r.pre);
        assert!(alpha_eq_formula(&r.post, &want_post), "got {}", r.post);
    }

    #[test]
    fn quote_wraps_body_pair() {
        let r = go(&TypingCtx::new(), "[| 3 |]", "u");
        assert_eq!(r.pre, Formula::TrueF);
        let want = fml("T => unbox u as m. m == 3");
        assert!(alpha_eq_formula(&r.post, &want), "got {}", r.post);
    }

    #[test]
    fn splice_of_quoted_constant() {
        let r = go(&TypingCtx::new(), "let [| x |] = [| 3 |] in x", "u");
        let want_pre = fml(
            "T /\\ ((forallc x:Int. conv(x)) \\/ \
             forall m:[| Int |]. ((T => unbox m as m2. m2 == 3) => unbox m as x. conv(x)))",
        );
        let want_post = fml(
            "exists m:[| Int |]. existsc x:Int. \
             ((((unbox m as w. T) => unbox m as w2. w2 == x) /\\ (T => unbox m as m2. m2 == 3)) \
             /\\ u == x)",
        );
        assert!(alpha_eq_formula(&r.pre, &want_pre), "got {}", r.pre);
        assert!(alpha_eq_formula(&r.post, &want_post), "got {}", r.post);
    }

    #[test]
    fn recursion_replaces_self_reference() {
        let r = go(&TypingCtx::new(), "mu g:Int -> Int. \\x:Int. g x", "u");
        assert_eq!(r.pre, Formula::TrueF);
        let want = fml(
            "forall x:Int. ((T /\\ T) /\\ (forall m:Int -> Int. forall n:Int. \
             (m == u /\\ n == x) => eval m n as z. T) \
             => eval u x as c. exists m:Int -> Int. exists n:Int. \
             eval m n as z. ((m == u /\\ n == x) /\\ z == c))",
        );
        assert!(alpha_eq_formula(&r.post, &want), "got {}", r.post);
    }

    #[test]
    fn trace_is_post_order() {
        let r = go(&TypingCtx::new(), "2 + 3", "c");
        let rules: Vec<&str> = r.derivation.iter().map(|e| e.rule).collect();
        assert_eq!(rules, ["const_t", "const_t", "op_t"]);
        assert!(r.derivation[2].judgement.starts_with("{T /\\ T} 2 + 3 :c"));
        assert!(r.derivation[0].judgement.contains(":a1"));
    }

    #[test]
    fn anchor_already_bound_rejected() {
        let ctx = TypingCtx::new().bind("x", Type::Int);
        let err = tcap_infer(&ctx, &Term::int(1), "x").unwrap_err();
        assert_eq!(err, TcapError::AnchorTaken("x".into()));
    }

    #[test]
    fn type_errors_propagate() {
        let err = tcap_infer(&TypingCtx::new(), &parse_term("1 + true").unwrap(), "u").unwrap_err();
        assert!(matches!(err, TcapError::Type(_)));
    }

    #[test]
    fn free_variables_stay_within_scope() {
        let ctx = TypingCtx::new()
            .bind("f", Type::arrow(Type::Int, Type::Int))
            .bind_modal("y", Type::Int);
        for src in ["f y", "\\x:Int. f (x + y)", "[| y + 1 |]", "if f 0 <= y == true then y else 0"] {
            let r = go(&ctx, src, "u");
            let mut allowed: BTreeSet<String> = ctx.names().cloned().collect();
            assert!(fv_formula(&r.pre).is_subset(&allowed), "pre of {src}");
            allowed.insert("u".into());
            assert!(fv_formula(&r.post).is_subset(&allowed), "post of {src}");
        }
    }
}
