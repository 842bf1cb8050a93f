use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::logic::{
    alpha_eq_formula, fv_formula, subst_formula, typecheck_judgement, Expr, Formula, Judgement,
};
use crate::syntax::{alpha_eq, free_vars, fresh_name, typecheck_term, Term, Type, TypingCtx};

use super::entail::Discharge;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleName {
    Var,
    VarM,
    Const,
    Op,
    Rec,
    Abs,
    App,
    If,
    Quote,
    UnquotePlus,
    ConseqKl,
    AndImp,
    ImpAnd,
    AndFalse,
    OrPre,
    AndPost,
    AuxExists,
    AuxForall,
    Invar,
    Let,
    Unquote,
    RecPrime,
    Conseq,
}

impl RuleName {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::Var => "var",
            RuleName::VarM => "var_m",
            RuleName::Const => "const",
            RuleName::Op => "op",
            RuleName::Rec => "rec",
            RuleName::Abs => "abs",
            RuleName::App => "app",
            RuleName::If => "if",
            RuleName::Quote => "quote",
            RuleName::UnquotePlus => "unquote_plus",
            RuleName::ConseqKl => "conseq_kl",
            RuleName::AndImp => "and_imp",
            RuleName::ImpAnd => "imp_and",
            RuleName::AndFalse => "and_false",
            RuleName::OrPre => "or_pre",
            RuleName::AndPost => "and_post",
            RuleName::AuxExists => "aux_exists",
            RuleName::AuxForall => "aux_forall",
            RuleName::Invar => "invar",
            RuleName::Let => "let",
            RuleName::Unquote => "unquote",
            RuleName::RecPrime => "rec_prime",
            RuleName::Conseq => "conseq",
        }
    }

    /// Derived rules have native checkers and also expand into trees of
    /// primitive rules.
    pub fn is_derived(self) -> bool {
        matches!(self, RuleName::Let | RuleName::Unquote | RuleName::RecPrime | RuleName::Conseq)
    }

    pub const ALL: [RuleName; 23] = [
        RuleName::Var,
        RuleName::VarM,
        RuleName::Const,
        RuleName::Op,
        RuleName::Rec,
        RuleName::Abs,
        RuleName::App,
        RuleName::If,
        RuleName::Quote,
        RuleName::UnquotePlus,
        RuleName::ConseqKl,
        RuleName::AndImp,
        RuleName::ImpAnd,
        RuleName::AndFalse,
        RuleName::OrPre,
        RuleName::AndPost,
        RuleName::AuxExists,
        RuleName::AuxForall,
        RuleName::Invar,
        RuleName::Let,
        RuleName::Unquote,
        RuleName::RecPrime,
        RuleName::Conseq,
    ];
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = String;

    fn from_str(s: &str) -> Result<RuleName, String> {
        RuleName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown rule name {:?}", s))
    }
}

/// An auxiliary variable brought into scope for a node's subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxDecl {
    pub name: String,
    pub ty: Type,
    pub modal: bool,
}

/// One application of a rule: the claimed conclusion, the premise
/// subtrees, one discharge method per side obligation (in schema order),
/// and optional named hints that are verified against the checker's own
/// reconstruction.
#[derive(Debug, Clone)]
pub struct ProofNode {
    pub rule: RuleName,
    pub conclusion: Judgement,
    pub premises: Vec<ProofNode>,
    pub side: Vec<Discharge>,
    pub hints: BTreeMap<String, Formula>,
    pub aux: Vec<AuxDecl>,
}

impl ProofNode {
    pub fn count(&self) -> usize {
        1 + self.premises.iter().map(ProofNode::count).sum::<usize>()
    }
}

/// A side obligation produced by schema validation, to be discharged in
/// its own context.
#[derive(Debug, Clone)]
pub struct Obligation {
    pub ctx: TypingCtx,
    pub hypothesis: Formula,
    pub conclusion: Formula,
}

/// Everything the checker needs after a node's schema has been accepted:
/// the context each premise must be checked in, plus the obligations.
#[derive(Debug, Clone)]
pub struct NodeCheck {
    pub ctx: TypingCtx,
    pub premise_ctxs: Vec<TypingCtx>,
    pub obligations: Vec<Obligation>,
}

/// Validate one node against its rule schema: conclusion typing, premise
/// judgement shapes, freshness conditions, hint agreement, obligation
/// arity. Premise subtrees are not entered here.
pub fn validate_node(ctx: &TypingCtx, node: &ProofNode) -> Result<NodeCheck, String> {
    let mut ctx = ctx.clone();
    for aux in &node.aux {
        if ctx.contains(&aux.name) {
            return Err(format!("auxiliary {} shadows the context", aux.name));
        }
        if free_vars(&node.conclusion.term).contains(&aux.name) {
            return Err(format!("auxiliary {} occurs in the program", aux.name));
        }
        if aux.name == node.conclusion.anchor {
            return Err(format!("auxiliary {} clashes with the anchor", aux.name));
        }
        ctx = if aux.modal {
            ctx.bind_modal(&aux.name, aux.ty.clone())
        } else {
            ctx.bind(&aux.name, aux.ty.clone())
        };
    }

    let ty = typecheck_judgement(&ctx, &node.conclusion)
        .map_err(|e| format!("conclusion does not typecheck: {}", e))?;

    let arity = rule_arity(node.rule, &node.conclusion.term);
    if node.premises.len() != arity {
        return Err(format!(
            "{} expects {} premise(s), found {}",
            node.rule,
            arity,
            node.premises.len()
        ));
    }

    let mut out = NodeCheck { ctx: ctx.clone(), premise_ctxs: Vec::new(), obligations: Vec::new() };
    let mut hints: Vec<(&'static str, Formula)> = Vec::new();

    let concl = &node.conclusion;
    let prem = |i: usize| -> &Judgement { &node.premises[i].conclusion };

    match node.rule {
        RuleName::Var => {
            let x = var_name(&concl.term)?;
            ctx.lookup(x).ok_or_else(|| format!("{} is not in the context", x))?;
            let substituted = subst_formula(&concl.post, &Expr::var(x), &concl.anchor)
                .map_err(|e| format!("postcondition blocks the variable substitution: {}", e))?;
            let expected = Formula::and(substituted, Formula::Conv(Expr::var(x)));
            expect_formula("precondition", &concl.pre, &expected)?;
        }
        RuleName::VarM => {
            let x = var_name(&concl.term)?;
            if !ctx.is_modal(x) {
                return Err(format!("{} must be a modal variable", x));
            }
            expect_formula("precondition", &concl.pre, &Formula::Conv(Expr::var(x)))?;
            expect_formula(
                "postcondition",
                &concl.post,
                &Formula::eq(Expr::var(&concl.anchor), Expr::var(x)),
            )?;
        }
        RuleName::Const => {
            let lit = match &concl.term {
                Term::Const(l) => l.clone(),
                other => return Err(format!("program must be a constant, found {}", other)),
            };
            let expected = subst_formula(&concl.post, &Expr::Const(lit), &concl.anchor)
                .map_err(|e| format!("postcondition blocks the constant substitution: {}", e))?;
            expect_formula("precondition", &concl.pre, &expected)?;
        }
        RuleName::Op => {
            let (kind, args) = match &concl.term {
                Term::Op(k, a) => (*k, a),
                other => return Err(format!("program must be an operator node, found {}", other)),
            };
            let mut pre = concl.pre.clone();
            let mut pctx = ctx.clone();
            let mut anchors = Vec::new();
            for (i, arg) in args.iter().enumerate() {
                let p = prem(i);
                expect_term(&p.term, arg)?;
                expect_formula(&format!("premise {} precondition", i + 1), &p.pre, &pre)?;
                let aty = typecheck_term(&pctx, arg)
                    .map_err(|e| format!("operand {} does not typecheck: {}", i + 1, e))?;
                out.premise_ctxs.push(pctx.clone());
                anchors.push(Expr::var(&p.anchor));
                pre = p.post.clone();
                pctx = pctx.bind(&p.anchor, aty);
            }
            let combined = Expr::Op(kind, anchors);
            let expected_last = subst_formula(&concl.post, &combined, &concl.anchor)
                .map_err(|e| format!("postcondition blocks the operator substitution: {}", e))?;
            let last = prem(args.len() - 1);
            expect_formula("final premise postcondition", &last.post, &expected_last)?;
            hints.push(("C", concl.post.clone()));
        }
        RuleName::Rec => {
            let (g, gty, body) = match &concl.term {
                Term::Rec(g, t, b) => (g.clone(), t.clone(), (**b).clone()),
                other => return Err(format!("program must be a recursion, found {}", other)),
            };
            if ctx.contains(&g) {
                return Err(format!("recursion binder {} shadows the context", g));
            }
            let p = prem(0);
            expect_term(&p.term, &body)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            expect_formula("premise precondition", &p.pre, &concl.pre)?;
            if fv_formula(&concl.pre).contains(&g) {
                return Err(format!("precondition mentions the recursion binder {}", g));
            }
            let expected = subst_formula(&p.post, &Expr::var(&concl.anchor), &g)
                .map_err(|e| format!("premise postcondition blocks the unrolling: {}", e))?;
            expect_formula("postcondition", &concl.post, &expected)?;
            out.premise_ctxs.push(ctx.bind(&g, gty));
        }
        RuleName::Abs => {
            let (x, xty, body) = match &concl.term {
                Term::Abs(x, t, b) => (x.clone(), t.clone(), (**b).clone()),
                other => return Err(format!("program must be an abstraction, found {}", other)),
            };
            if ctx.contains(&x) {
                return Err(format!("abstraction binder {} shadows the context", x));
            }
            let (qx, qty, inner) = match &concl.post {
                Formula::Forall(qx, qty, inner) => (qx.clone(), qty.clone(), (**inner).clone()),
                other => {
                    return Err(format!("postcondition must quantify the argument, found {}", other))
                }
            };
            if qx != x {
                return Err(format!(
                    "postcondition quantifier {} must reuse the binder {}",
                    qx, x
                ));
            }
            if qty != xty {
                return Err(format!("quantifier type {} differs from the binder's {}", qty, xty));
            }
            let (b, oe) = match inner {
                Formula::Implies(b, oe) => (*b, *oe),
                other => {
                    return Err(format!(
                        "quantified body must be an implication into an application formula, found {}",
                        other
                    ))
                }
            };
            let (subj, arg, m, c) = match oe {
                Formula::OneEval { subj, arg, anchor, body } => (subj, arg, anchor, *body),
                other => {
                    return Err(format!("implication target must apply the result, found {}", other))
                }
            };
            if subj != Expr::var(&concl.anchor) {
                return Err("application formula must apply the anchor".to_string());
            }
            if arg != Expr::var(&x) {
                return Err(format!("application formula must feed the binder {}", x));
            }
            if fv_formula(&concl.pre).contains(&x) {
                return Err(format!("precondition mentions the binder {}", x));
            }
            let p = prem(0);
            expect_term(&p.term, &body)?;
            expect_anchor(&p.anchor, &m)?;
            expect_formula(
                "premise precondition",
                &p.pre,
                &Formula::and(concl.pre.clone(), b.clone()),
            )?;
            expect_formula("premise postcondition", &p.post, &c)?;
            out.premise_ctxs.push(ctx.bind(&x, xty));
            hints.push(("B", b));
            hints.push(("C", c));
        }
        RuleName::App => {
            let (fun, arg) = match &concl.term {
                Term::App(f, a) => ((**f).clone(), (**a).clone()),
                other => return Err(format!("program must be an application, found {}", other)),
            };
            let (p1, p2) = (prem(0), prem(1));
            expect_term(&p1.term, &fun)?;
            expect_term(&p2.term, &arg)?;
            expect_formula("first premise precondition", &p1.pre, &concl.pre)?;
            expect_formula("second premise precondition", &p2.pre, &p1.post)?;
            let (subj, oarg, u, c) = match &p2.post {
                Formula::OneEval { subj, arg, anchor, body } => {
                    (subj.clone(), arg.clone(), anchor.clone(), (**body).clone())
                }
                other => {
                    return Err(format!(
                        "second premise postcondition must be an application formula, found {}",
                        other
                    ))
                }
            };
            if subj != Expr::var(&p1.anchor) {
                return Err("application formula must apply the function's anchor".to_string());
            }
            if oarg != Expr::var(&p2.anchor) {
                return Err("application formula must feed the argument's anchor".to_string());
            }
            expect_anchor(&u, &concl.anchor)?;
            expect_formula("postcondition", &concl.post, &c)?;
            let fty = typecheck_term(&ctx, &fun)
                .map_err(|e| format!("function part does not typecheck: {}", e))?;
            out.premise_ctxs.push(ctx.clone());
            out.premise_ctxs.push(ctx.bind(&p1.anchor, fty));
            hints.push(("B", p1.post.clone()));
        }
        RuleName::If => {
            let (cond, thn, els) = match &concl.term {
                Term::If(c, t, e) => ((**c).clone(), (**t).clone(), (**e).clone()),
                other => return Err(format!("program must be a conditional, found {}", other)),
            };
            let (p1, p2, p3) = (prem(0), prem(1), prem(2));
            expect_term(&p1.term, &cond)?;
            expect_term(&p2.term, &thn)?;
            expect_term(&p3.term, &els)?;
            expect_formula("guard premise precondition", &p1.pre, &concl.pre)?;
            let b = &p1.anchor;
            let then_pre = subst_formula(&p1.post, &Expr::bool(true), b)
                .map_err(|e| format!("guard postcondition blocks the true branch: {}", e))?;
            let else_pre = subst_formula(&p1.post, &Expr::bool(false), b)
                .map_err(|e| format!("guard postcondition blocks the false branch: {}", e))?;
            expect_formula("then-branch precondition", &p2.pre, &then_pre)?;
            expect_formula("else-branch precondition", &p3.pre, &else_pre)?;
            expect_anchor(&p2.anchor, &concl.anchor)?;
            expect_anchor(&p3.anchor, &concl.anchor)?;
            expect_formula("then-branch postcondition", &p2.post, &concl.post)?;
            expect_formula("else-branch postcondition", &p3.post, &concl.post)?;
            out.premise_ctxs.extend([ctx.clone(), ctx.clone(), ctx.clone()]);
            hints.push(("B", p1.post.clone()));
        }
        RuleName::Quote => {
            let body = match &concl.term {
                Term::Quote(b) => (**b).clone(),
                other => return Err(format!("program must be a quotation, found {}", other)),
            };
            if concl.pre != Formula::TrueF {
                return Err("quotation precondition must be T".to_string());
            }
            let (a, ce) = match &concl.post {
                Formula::Implies(a, ce) => ((**a).clone(), (**ce).clone()),
                other => {
                    return Err(format!(
                        "postcondition must be an implication into a code formula, found {}",
                        other
                    ))
                }
            };
            let (subj, m, b) = match ce {
                Formula::CodeEval { subj, anchor, body } => (subj, anchor, *body),
                other => {
                    return Err(format!("implication target must open the result, found {}", other))
                }
            };
            if subj != Expr::var(&concl.anchor) {
                return Err("code formula must open the anchor".to_string());
            }
            let p = prem(0);
            expect_term(&p.term, &body)?;
            expect_anchor(&p.anchor, &m)?;
            expect_formula("premise precondition", &p.pre, &a)?;
            expect_formula("premise postcondition", &p.post, &b)?;
            out.premise_ctxs.push(ctx.clone());
            hints.push(("A", a));
            hints.push(("B", b));
        }
        RuleName::UnquotePlus | RuleName::Unquote => {
            let (x, m_term, n_term) = match &concl.term {
                Term::Unquote(x, m, n) => (x.clone(), (**m).clone(), (**n).clone()),
                other => return Err(format!("program must be a splice, found {}", other)),
            };
            if ctx.contains(&x) {
                return Err(format!("splice binder {} shadows the context", x));
            }
            let p1 = prem(0);
            expect_term(&p1.term, &m_term)?;
            expect_formula("first premise precondition", &p1.pre, &concl.pre)?;
            let m = p1.anchor.clone();
            if m == x {
                return Err("first premise anchor clashes with the splice binder".to_string());
            }
            let (e, rest) = match &p1.post {
                Formula::And(e, rest) => ((**e).clone(), (**rest).clone()),
                other => {
                    return Err(format!(
                        "first premise postcondition must pair a frame with a guarded code formula, found {}",
                        other
                    ))
                }
            };
            let (b, ce) = match rest {
                Formula::Implies(b, ce) => (*b, *ce),
                other => {
                    return Err(format!(
                        "second conjunct must be an implication into a code formula, found {}",
                        other
                    ))
                }
            };
            let (subj, ce_anchor, c_raw) = match ce {
                Formula::CodeEval { subj, anchor, body } => (subj, anchor, *body),
                other => {
                    return Err(format!("implication target must open the code, found {}", other))
                }
            };
            if subj != Expr::var(&m) {
                return Err("code formula must open the first premise's anchor".to_string());
            }
            let c = if ce_anchor == x {
                c_raw
            } else {
                if fv_formula(&c_raw).contains(&x) {
                    return Err(format!(
                        "code body already mentions {} besides its own anchor",
                        x
                    ));
                }
                subst_formula(&c_raw, &Expr::var(&x), &ce_anchor)
                    .map_err(|e| format!("code body blocks renaming to the binder: {}", e))?
            };
            for (label, f) in [("frame", &e), ("hypothesis", &b)] {
                if fv_formula(f).contains(&x) {
                    return Err(format!("{} mentions the splice binder {}", label, x));
                }
            }
            if fv_formula(&c).contains(&m) {
                return Err(format!("code body mentions the first premise's anchor {}", m));
            }
            for who in [&x, &m] {
                if fv_formula(&concl.post).contains(who.as_str()) {
                    return Err(format!("conclusion postcondition mentions {}", who));
                }
            }
            let inner = match typecheck_term(&ctx, &m_term)
                .map_err(|e| format!("spliced program does not typecheck: {}", e))?
            {
                Type::Code(t) => (*t).clone(),
                other => return Err(format!("spliced program has type {}, not code", other)),
            };
            let base = Formula::and(e.clone(), Formula::implies(b.clone(), c.clone()));
            let expected_pre = if node.rule == RuleName::UnquotePlus {
                let mut avoid: std::collections::BTreeSet<String> =
                    ctx.names().cloned().collect();
                avoid.extend(fv_formula(&base));
                avoid.insert(x.clone());
                avoid.insert(m.clone());
                let fa = fresh_name("f", &avoid);
                avoid.insert(fa.clone());
                let ya = fresh_name("y", &avoid);
                let guard = Formula::implies(
                    Formula::code_eval(Expr::var(&m), &fa, Formula::TrueF),
                    Formula::code_eval(
                        Expr::var(&m),
                        &ya,
                        Formula::eq(Expr::var(&ya), Expr::var(&x)),
                    ),
                );
                Formula::and(base, guard)
            } else {
                base
            };
            let p2 = prem(1);
            expect_formula("second premise precondition", &p2.pre, &expected_pre)?;
            expect_term(&p2.term, &n_term)?;
            expect_anchor(&p2.anchor, &concl.anchor)?;
            expect_formula("second premise postcondition", &p2.post, &concl.post)?;
            out.premise_ctxs.push(ctx.clone());
            out.premise_ctxs.push(ctx.bind(&m, Type::code(inner.clone())).bind_modal(&x, inner));
            hints.push(("E", e));
            hints.push(("B", b));
            hints.push(("C", c));
        }
        RuleName::ConseqKl => {
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            out.premise_ctxs.push(ctx.clone());
            out.obligations.push(Obligation {
                ctx: ctx.bind(&concl.anchor, ty.clone()),
                hypothesis: concl.pre.clone(),
                conclusion: Formula::and(
                    p.pre.clone(),
                    Formula::implies(p.post.clone(), concl.post.clone()),
                ),
            });
        }
        RuleName::AndImp => {
            if !concl.term.is_value() {
                return Err("rule applies to values only".to_string());
            }
            let (b, c) = match &concl.post {
                Formula::Implies(b, c) => ((**b).clone(), (**c).clone()),
                other => {
                    return Err(format!("postcondition must be an implication, found {}", other))
                }
            };
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            expect_formula(
                "premise precondition",
                &p.pre,
                &Formula::and(concl.pre.clone(), b),
            )?;
            expect_formula("premise postcondition", &p.post, &c)?;
            out.premise_ctxs.push(ctx.clone());
        }
        RuleName::ImpAnd => {
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            let (b, c) = match &p.post {
                Formula::Implies(b, c) => ((**b).clone(), (**c).clone()),
                other => {
                    return Err(format!(
                        "premise postcondition must be an implication, found {}",
                        other
                    ))
                }
            };
            expect_formula("precondition", &concl.pre, &Formula::and(p.pre.clone(), b))?;
            expect_formula("postcondition", &concl.post, &c)?;
            out.premise_ctxs.push(ctx.clone());
        }
        RuleName::AndFalse => {
            if concl.pre != Formula::FalseF {
                return Err("conclusion precondition must be F".to_string());
            }
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            let a = match &p.pre {
                Formula::And(f, a) if **f == Formula::FalseF => (**a).clone(),
                other => {
                    return Err(format!(
                        "premise precondition must conjoin F on the left, found {}",
                        other
                    ))
                }
            };
            expect_formula(
                "postcondition",
                &concl.post,
                &Formula::and(a, p.post.clone()),
            )?;
            out.premise_ctxs.push(ctx.clone());
        }
        RuleName::OrPre => {
            let (a1, a2) = match &concl.pre {
                Formula::Or(a, b) => ((**a).clone(), (**b).clone()),
                other => {
                    return Err(format!("precondition must be a disjunction, found {}", other))
                }
            };
            for (p, a, label) in [(prem(0), a1, "first"), (prem(1), a2, "second")] {
                expect_term(&p.term, &concl.term)?;
                expect_anchor(&p.anchor, &concl.anchor)?;
                expect_formula(&format!("{} premise precondition", label), &p.pre, &a)?;
                expect_formula(&format!("{} premise postcondition", label), &p.post, &concl.post)?;
                out.premise_ctxs.push(ctx.clone());
            }
        }
        RuleName::AndPost => {
            let (b1, b2) = match &concl.post {
                Formula::And(a, b) => ((**a).clone(), (**b).clone()),
                other => {
                    return Err(format!("postcondition must be a conjunction, found {}", other))
                }
            };
            for (p, b, label) in [(prem(0), b1, "first"), (prem(1), b2, "second")] {
                expect_term(&p.term, &concl.term)?;
                expect_anchor(&p.anchor, &concl.anchor)?;
                expect_formula(&format!("{} premise precondition", label), &p.pre, &concl.pre)?;
                expect_formula(&format!("{} premise postcondition", label), &p.post, &b)?;
                out.premise_ctxs.push(ctx.clone());
            }
        }
        RuleName::AuxExists => {
            let (i, ity, modal, a) = match &concl.pre {
                Formula::Exists(i, t, a) => (i.clone(), t.clone(), false, (**a).clone()),
                Formula::ExistsModal(i, t, a) => (i.clone(), t.clone(), true, (**a).clone()),
                other => {
                    return Err(format!(
                        "precondition must existentially bind the auxiliary, found {}",
                        other
                    ))
                }
            };
            check_aux_var(&ctx, concl, &i)?;
            if fv_formula(&concl.post).contains(&i) {
                return Err(format!("postcondition mentions the auxiliary {}", i));
            }
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            expect_formula("premise precondition", &p.pre, &a)?;
            expect_formula("premise postcondition", &p.post, &concl.post)?;
            out.premise_ctxs
                .push(if modal { ctx.bind_modal(&i, ity) } else { ctx.bind(&i, ity) });
        }
        RuleName::AuxForall => {
            let (i, ity, modal, b) = match &concl.post {
                Formula::Forall(i, t, b) => (i.clone(), t.clone(), false, (**b).clone()),
                Formula::ForallModal(i, t, b) => (i.clone(), t.clone(), true, (**b).clone()),
                other => {
                    return Err(format!(
                        "postcondition must universally bind the auxiliary, found {}",
                        other
                    ))
                }
            };
            check_aux_var(&ctx, concl, &i)?;
            if fv_formula(&concl.pre).contains(&i) {
                return Err(format!("precondition mentions the auxiliary {}", i));
            }
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            expect_formula("premise precondition", &p.pre, &concl.pre)?;
            expect_formula("premise postcondition", &p.post, &b)?;
            out.premise_ctxs
                .push(if modal { ctx.bind_modal(&i, ity) } else { ctx.bind(&i, ity) });
        }
        RuleName::Invar => {
            let (a, c) = match &concl.pre {
                Formula::And(a, c) => ((**a).clone(), (**c).clone()),
                other => {
                    return Err(format!("precondition must carry the invariant, found {}", other))
                }
            };
            let (b, c2) = match &concl.post {
                Formula::And(b, c2) => ((**b).clone(), (**c2).clone()),
                other => {
                    return Err(format!("postcondition must carry the invariant, found {}", other))
                }
            };
            expect_formula("invariant", &c2, &c)?;
            if fv_formula(&c).contains(&concl.anchor) {
                return Err("invariant mentions the anchor".to_string());
            }
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            expect_formula("premise precondition", &p.pre, &a)?;
            expect_formula("premise postcondition", &p.post, &b)?;
            out.premise_ctxs.push(ctx.clone());
        }
        RuleName::Let => {
            let (x, xty, n_term, m_term) = match &concl.term {
                Term::App(f, a) => match &**f {
                    Term::Abs(x, t, body) => (x.clone(), t.clone(), (**body).clone(), (**a).clone()),
                    other => {
                        return Err(format!(
                            "program must immediately apply an abstraction, found {}",
                            other
                        ))
                    }
                },
                other => {
                    return Err(format!("program must be a binding application, found {}", other))
                }
            };
            let (p1, p2) = (prem(0), prem(1));
            expect_anchor(&p1.anchor, &x)?;
            expect_term(&p1.term, &m_term)?;
            expect_formula("first premise precondition", &p1.pre, &concl.pre)?;
            expect_term(&p2.term, &n_term)?;
            expect_anchor(&p2.anchor, &concl.anchor)?;
            expect_formula("second premise precondition", &p2.pre, &p1.post)?;
            expect_formula("second premise postcondition", &p2.post, &concl.post)?;
            out.premise_ctxs.push(ctx.clone());
            out.premise_ctxs.push(ctx.bind(&x, xty));
        }
        RuleName::RecPrime => {
            let (g, gty, lam) = match &concl.term {
                Term::Rec(g, t, b) => (g.clone(), t.clone(), (**b).clone()),
                other => return Err(format!("program must be a recursion, found {}", other)),
            };
            if ctx.contains(&g) {
                return Err(format!("recursion binder {} shadows the context", g));
            }
            let (n, b) = match &concl.post {
                Formula::Forall(n, t, body) if *t == Type::Int => match &**body {
                    Formula::Implies(guard, b) => {
                        expect_formula("index guard", guard, &nonneg(n))?;
                        (n.clone(), (**b).clone())
                    }
                    other => {
                        return Err(format!(
                            "quantified postcondition must guard the index, found {}",
                            other
                        ))
                    }
                },
                other => {
                    return Err(format!(
                        "postcondition must quantify an integer index, found {}",
                        other
                    ))
                }
            };
            if ctx.contains(&n) || n == g {
                return Err(format!("index {} shadows the context", n));
            }
            let p = prem(0);
            let (a, i, b_inst) = match &p.pre {
                Formula::And(a, ih) => match &**ih {
                    Formula::Forall(i, t, body) if *t == Type::Int => match &**body {
                        Formula::Implies(guard, b_inst) => {
                            let expected_guard =
                                Formula::and(nonneg(i), strictly_below(i, &n));
                            expect_formula("induction guard", guard, &expected_guard)?;
                            ((**a).clone(), i.clone(), (**b_inst).clone())
                        }
                        other => {
                            return Err(format!(
                                "induction hypothesis must guard its index, found {}",
                                other
                            ))
                        }
                    },
                    other => {
                        return Err(format!(
                            "premise must carry a quantified induction hypothesis, found {}",
                            other
                        ))
                    }
                },
                other => {
                    return Err(format!(
                        "premise precondition must pair the frame with the induction hypothesis, found {}",
                        other
                    ))
                }
            };
            if i == n || i == g || i == concl.anchor || fv_formula(&b).contains(&i) {
                return Err(format!("induction index {} is not fresh", i));
            }
            expect_formula("frame", &a, &concl.pre)?;
            for bad in [&g, &n] {
                if fv_formula(&concl.pre).contains(bad.as_str()) {
                    return Err(format!("frame mentions {}", bad));
                }
            }
            if fv_formula(&b).contains(&g) {
                return Err(format!("specification mentions the recursion binder {}", g));
            }
            let shifted = subst_formula(&b, &Expr::var(&i), &n)
                .map_err(|e| format!("specification blocks the index shift: {}", e))?;
            let expected_inst = subst_formula(&shifted, &Expr::var(&g), &concl.anchor)
                .map_err(|e| format!("specification blocks the recursion transfer: {}", e))?;
            expect_formula("induction hypothesis body", &b_inst, &expected_inst)?;
            expect_term(&p.term, &lam)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            expect_formula("premise postcondition", &p.post, &b)?;
            out.premise_ctxs.push(ctx.bind(&g, gty).bind(&n, Type::Int));
        }
        RuleName::Conseq => {
            let p = prem(0);
            expect_term(&p.term, &concl.term)?;
            expect_anchor(&p.anchor, &concl.anchor)?;
            out.premise_ctxs.push(ctx.clone());
            out.obligations.push(Obligation {
                ctx: ctx.clone(),
                hypothesis: concl.pre.clone(),
                conclusion: p.pre.clone(),
            });
            out.obligations.push(Obligation {
                ctx: ctx.bind(&concl.anchor, ty.clone()),
                hypothesis: p.post.clone(),
                conclusion: concl.post.clone(),
            });
        }
    }

    if node.side.len() != out.obligations.len() {
        return Err(format!(
            "{} produces {} obligation(s), {} discharge(s) given",
            node.rule,
            out.obligations.len(),
            node.side.len()
        ));
    }

    for (key, supplied) in &node.hints {
        match hints.iter().find(|(k, _)| k == key) {
            Some((_, computed)) => {
                if !alpha_eq_formula(supplied, computed) {
                    return Err(format!(
                        "hint {} disagrees with the reconstructed formula {}",
                        key, computed
                    ));
                }
            }
            None => return Err(format!("hint {} is not meaningful for {}", key, node.rule)),
        }
    }

    Ok(out)
}

fn rule_arity(rule: RuleName, term: &Term) -> usize {
    match rule {
        RuleName::Var | RuleName::VarM | RuleName::Const => 0,
        RuleName::Op => match term {
            Term::Op(k, _) => k.arity(),
            _ => 1,
        },
        RuleName::If => 3,
        RuleName::App
        | RuleName::OrPre
        | RuleName::AndPost
        | RuleName::Let
        | RuleName::Unquote
        | RuleName::UnquotePlus => 2,
        _ => 1,
    }
}

fn var_name(term: &Term) -> Result<&str, String> {
    match term {
        Term::Var(x) => Ok(x),
        other => Err(format!("program must be a variable, found {}", other)),
    }
}

fn expect_formula(what: &str, found: &Formula, expected: &Formula) -> Result<(), String> {
    if alpha_eq_formula(found, expected) {
        Ok(())
    } else {
        Err(format!("{} must be {}, found {}", what, expected, found))
    }
}

fn expect_term(found: &Term, expected: &Term) -> Result<(), String> {
    if alpha_eq(found, expected) {
        Ok(())
    } else {
        Err(format!("premise program must be {}, found {}", expected, found))
    }
}

fn expect_anchor(found: &str, expected: &str) -> Result<(), String> {
    if found == expected {
        Ok(())
    } else {
        Err(format!("anchor must be {}, found {}", expected, found))
    }
}

fn check_aux_var(ctx: &TypingCtx, concl: &Judgement, i: &str) -> Result<(), String> {
    if ctx.contains(i) {
        return Err(format!("auxiliary {} shadows the context", i));
    }
    if free_vars(&concl.term).contains(i) {
        return Err(format!("auxiliary {} occurs in the program", i));
    }
    if i == concl.anchor {
        return Err(format!("auxiliary {} clashes with the anchor", i));
    }
    Ok(())
}

fn nonneg(n: &str) -> Formula {
    Formula::eq(Expr::le(Expr::int(0), Expr::var(n)), Expr::bool(true))
}

fn strictly_below(i: &str, n: &str) -> Formula {
    Formula::eq(
        Expr::le(Expr::add(Expr::var(i), Expr::int(1)), Expr::var(n)),
        Expr::bool(true),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::syntax::parse_term;

    fn node(rule: RuleName, pre: &str, term: &str, anchor: &str, post: &str) -> ProofNode {
        ProofNode {
            rule,
            conclusion: Judgement {
                pre: parse_formula(pre).unwrap(),
                term: parse_term(term).unwrap(),
                anchor: anchor.to_string(),
                post: parse_formula(post).unwrap(),
            },
            premises: Vec::new(),
            side: Vec::new(),
            hints: BTreeMap::new(),
            aux: Vec::new(),
        }
    }

    #[test]
    fn const_schema_checks_the_substitution() {
        let ctx = TypingCtx::new();
        let good = node(RuleName::Const, "3 == 3", "3", "m", "m == 3");
        assert!(validate_node(&ctx, &good).is_ok());

        let bad = node(RuleName::Const, "T", "3", "m", "m == 3");
        let err = validate_node(&ctx, &bad).unwrap_err();
        assert!(err.contains("precondition"), "{}", err);
    }

    #[test]
    fn var_schema_requires_convergence_conjunct() {
        let ctx = TypingCtx::new().bind_modal("x", Type::Int);
        let good = node(RuleName::Var, "x == 1 /\\ conv(x)", "x", "m", "m == 1");
        assert!(validate_node(&ctx, &good).is_ok());

        let missing = node(RuleName::Var, "x == 1", "x", "m", "m == 1");
        assert!(validate_node(&ctx, &missing).is_err());
    }

    #[test]
    fn var_m_is_modal_only() {
        let modal = TypingCtx::new().bind_modal("x", Type::Int);
        let good = node(RuleName::VarM, "conv(x)", "x", "m", "m == x");
        assert!(validate_node(&modal, &good).is_ok());

        let plain = TypingCtx::new().bind("x", Type::Int);
        assert!(validate_node(&plain, &good).is_err());
    }

    #[test]
    fn quote_requires_true_precondition() {
        let ctx = TypingCtx::new();
        let mut n = node(
            RuleName::Quote,
            "T",
            "[| 3 |]",
            "u",
            "T => unbox u as m. m == 3",
        );
        n.premises.push(node(RuleName::Const, "T", "3", "m", "m == 3"));
        assert!(validate_node(&ctx, &n).is_ok());

        n.conclusion.pre = parse_formula("3 == 3").unwrap();
        assert!(validate_node(&ctx, &n).unwrap_err().contains("must be T"));
    }

    #[test]
    fn and_imp_rejects_non_values() {
        let ctx = TypingCtx::new();
        let omega = "(mu g:Unit -> Unit. \\x:Unit. g x) ()";
        let mut n = node(RuleName::AndImp, "T", omega, "m", "F => T");
        n.premises.push(node(RuleName::ConseqKl, "T /\\ F", omega, "m", "T"));
        let err = validate_node(&ctx, &n).unwrap_err();
        assert!(err.contains("values only"), "{}", err);

        let mut v = node(RuleName::AndImp, "T", "3", "m", "F => T");
        v.premises.push(node(RuleName::ConseqKl, "T /\\ F", "3", "m", "T"));
        assert!(validate_node(&ctx, &v).is_ok());
    }

    #[test]
    fn conseq_kl_produces_one_obligation() {
        let ctx = TypingCtx::new();
        let mut n = node(RuleName::ConseqKl, "T", "3", "m", "m == 3");
        n.premises.push(node(RuleName::Const, "3 == 3", "3", "m", "m == 3"));
        n.side.push(Discharge::Bounded { models: 10, seed: 42 });
        let check = validate_node(&ctx, &n).unwrap();
        assert_eq!(check.obligations.len(), 1);
        let ob = &check.obligations[0];
        assert_eq!(ob.hypothesis, Formula::TrueF);
        assert_eq!(ob.conclusion.to_string(), "3 == 3 /\\ (m == 3 => m == 3)");
        assert!(ob.ctx.contains("m"));
    }

    #[test]
    fn hint_agreement_is_enforced() {
        let ctx = TypingCtx::new();
        let mut n = node(RuleName::Op, "T", "1 + 2", "u", "u == 3");
        n.premises.push(node(RuleName::Const, "T", "1", "a", "a == 1"));
        n.premises.push(node(RuleName::Const, "a == 1", "2", "b", "a == 1 /\\ a + b == 3"));
        // the final premise post must be (u == 3)[a+b/u]
        n.premises[1].conclusion.post = parse_formula("a + b == 3").unwrap();
        n.premises[1].conclusion.pre = parse_formula("a == 1").unwrap();
        assert!(validate_node(&ctx, &n).is_ok());

        n.hints.insert("C".to_string(), parse_formula("u == 3").unwrap());
        assert!(validate_node(&ctx, &n).is_ok());

        n.hints.insert("C".to_string(), parse_formula("u == 4").unwrap());
        assert!(validate_node(&ctx, &n).unwrap_err().contains("hint"));
    }

    #[test]
    fn aux_forall_checks_freshness() {
        let ctx = TypingCtx::new();
        let mut n = node(RuleName::AuxForall, "T", "3", "m", "forall i:Int. m == m");
        n.premises.push(node(RuleName::ConseqKl, "T", "3", "m", "m == m"));
        let check = validate_node(&ctx, &n).unwrap();
        assert!(check.premise_ctxs[0].contains("i"));

        let taken = TypingCtx::new().bind("i", Type::Int);
        let mut bad = node(RuleName::AuxForall, "i == 0", "3", "m", "forall i:Int. m == m");
        bad.premises.push(node(RuleName::ConseqKl, "i == 0", "3", "m", "m == m"));
        assert!(validate_node(&taken, &bad).unwrap_err().contains("shadows the context"));
    }

    #[test]
    fn rule_names_round_trip() {
        for r in RuleName::ALL {
            assert_eq!(r.as_str().parse::<RuleName>().unwrap(), r);
        }
        assert!("frobnicate".parse::<RuleName>().is_err());
    }
}
