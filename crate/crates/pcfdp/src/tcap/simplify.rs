//! Logged, equivalence-preserving cleanup of synthesized assertions.
//!
//! The rewriter applies one rule instance per iteration, innermost and
//! leftmost first, until no rule fires or the step cap is reached.
//! Every rule preserves the bounded satisfaction verdict; when the
//! input typechecks, each candidate step is additionally re-checked
//! against a small model suite and abandoned if a clear verdict flips.

use std::collections::BTreeMap;

use crate::eval::apply_op;
use crate::logic::{
    alpha_eq_formula, fv_expr, fv_formula, subst_formula, typecheck_formula, Expr, Formula,
};
use crate::semantics::{gen_models, sat, BoundedConfig, Model};
use crate::syntax::{Type, TypingCtx};

const MAX_STEPS: usize = 512;

#[derive(Debug, Clone)]
pub struct SimplifyStep {
    pub rule: &'static str,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default)]
pub struct SimplifyLog {
    pub steps: Vec<SimplifyStep>,
    /// The step cap stopped rewriting before a fixpoint.
    pub capped: bool,
    /// A candidate step flipped a clear verdict and everything from
    /// that step on was discarded.  Defensive; no shipped rule does this.
    pub rejection: Option<String>,
}

/// Simplify a closed-context formula.
pub fn simplify(a: &Formula, cfg: &BoundedConfig) -> Formula {
    simplify_traced(&TypingCtx::new(), a, cfg).0
}

/// Simplify under an ambient context (free variables of `a` and, for a
/// postcondition, its anchor must be bound there).  The context feeds
/// the convergence-sensitive rules and the per-step verdict check.
pub fn simplify_traced(
    ctx: &TypingCtx,
    a: &Formula,
    cfg: &BoundedConfig,
) -> (Formula, SimplifyLog) {
    let mut log = SimplifyLog::default();
    let models = if typecheck_formula(ctx, a).is_ok() {
        let check = check_config(cfg);
        Some((gen_models(ctx, &check, check.seed, 4), check))
    } else {
        None
    };
    let env: Env = ctx
        .gamma()
        .keys()
        .map(|k| (k.clone(), true))
        .chain(ctx.delta().keys().map(|k| (k.clone(), false)))
        .collect();
    let mut cur = a.clone();
    for _ in 0..MAX_STEPS {
        let Some((next, step)) = rewrite_once(&cur, &env) else {
            return (cur, log);
        };
        if let Some((models, check)) = &models {
            if let Some(why) = clear_flip(models, &cur, &next, check) {
                log.rejection = Some(format!("{} on {}: {}", step.rule, step.before, why));
                return (cur, log);
            }
        }
        log.steps.push(step);
        cur = next;
    }
    log.capped = true;
    (cur, log)
}

fn check_config(cfg: &BoundedConfig) -> BoundedConfig {
    BoundedConfig {
        int_bound: 2,
        fuel: 400,
        fn_pool_size: 3,
        code_pool_size: 3,
        modal_pool_size: 3,
        samples_per_function: 2,
        seed: cfg.seed,
    }
}

fn clear_flip(
    models: &[Model],
    before: &Formula,
    after: &Formula,
    cfg: &BoundedConfig,
) -> Option<String> {
    for (i, m) in models.iter().enumerate() {
        let vb = sat(m, before, cfg);
        let va = sat(m, after, cfg);
        let flipped = (vb.is_clear_true() && va.is_clear_false())
            || (vb.is_clear_false() && va.is_clear_true());
        if flipped {
            return Some(format!("verdict flipped under model {i}"));
        }
    }
    None
}

/// Which in-scope names are known to denote values: non-modal context
/// variables, value-style quantifier binders, and evaluation anchors
/// (both kinds bind the already-computed result).
type Env = BTreeMap<String, bool>;

fn with(env: &Env, x: &str, convergent: bool) -> Env {
    let mut e = env.clone();
    e.insert(x.to_string(), convergent);
    e
}

fn rewrite_once(f: &Formula, env: &Env) -> Option<(Formula, SimplifyStep)> {
    let rebuilt = match f {
        Formula::TrueF | Formula::FalseF | Formula::Eq(..) | Formula::Conv(_) => None,
        Formula::Not(a) => rewrite_once(a, env).map(|(a, s)| (Formula::not(a), s)),
        Formula::And(a, b) => child2(a, b, env, Formula::and),
        Formula::Or(a, b) => child2(a, b, env, Formula::or),
        Formula::Implies(a, b) => child2(a, b, env, Formula::implies),
        Formula::Forall(x, ty, b) => rewrite_once(b, &with(env, x, true))
            .map(|(b, s)| (Formula::forall(x, ty.clone(), b), s)),
        Formula::Exists(x, ty, b) => rewrite_once(b, &with(env, x, true))
            .map(|(b, s)| (Formula::exists(x, ty.clone(), b), s)),
        Formula::ForallModal(x, ty, b) => rewrite_once(b, &with(env, x, false))
            .map(|(b, s)| (Formula::forall_modal(x, ty.clone(), b), s)),
        Formula::ExistsModal(x, ty, b) => rewrite_once(b, &with(env, x, false))
            .map(|(b, s)| (Formula::exists_modal(x, ty.clone(), b), s)),
        Formula::OneEval { subj, arg, anchor, body } => rewrite_once(body, &with(env, anchor, true))
            .map(|(b, s)| (Formula::one_eval(subj.clone(), arg.clone(), anchor, b), s)),
        Formula::CodeEval { subj, anchor, body } => rewrite_once(body, &with(env, anchor, true))
            .map(|(b, s)| (Formula::code_eval(subj.clone(), anchor, b), s)),
    };
    if rebuilt.is_some() {
        return rebuilt;
    }
    for (name, rule) in RULES {
        if let Some(g) = rule(f, env) {
            if g != *f {
                let step =
                    SimplifyStep { rule: name, before: f.to_string(), after: g.to_string() };
                return Some((g, step));
            }
        }
    }
    None
}

fn child2(
    a: &Formula,
    b: &Formula,
    env: &Env,
    mk: fn(Formula, Formula) -> Formula,
) -> Option<(Formula, SimplifyStep)> {
    if let Some((a2, s)) = rewrite_once(a, env) {
        return Some((mk(a2, b.clone()), s));
    }
    rewrite_once(b, env).map(|(b2, s)| (mk(a.clone(), b2), s))
}

type Rule = fn(&Formula, &Env) -> Option<Formula>;

/// Rule roster in priority order; the first hit at a node wins.
const RULES: &[(&'static str, Rule)] = &[
    ("const_fold", const_fold),
    ("refl_eq", refl_eq),
    ("bool_simp", bool_simp),
    ("imp_self", imp_self),
    ("known_conv", known_conv),
    ("drop_quant", drop_quant),
    ("one_point_exists", one_point_exists),
    ("one_point_forall", one_point_forall),
    ("eq_prop", eq_prop),
    ("pull_unbox", pull_unbox),
    ("pull_eval", pull_eval),
    ("merge_unbox", merge_unbox),
    ("merge_eval", merge_eval),
    ("collapse_eval", collapse_eval),
    ("collapse_unbox", collapse_unbox),
    ("guard_discharge", guard_discharge),
    ("weaken_unbox", weaken_unbox),
    ("weaken_eval", weaken_eval),
    ("no_total_code", no_total_code),
    ("no_total_modal", no_total_modal),
    ("no_total_fn", no_total_fn),
    ("quote_witness", quote_witness),
];

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        if let Formula::And(a, b) = f {
            go(a, out);
            go(b, out);
        } else {
            out.push(f);
        }
    }
    let mut out = Vec::new();
    go(f, &mut out);
    out
}

fn atomic(e: &Expr) -> bool {
    matches!(e, Expr::Var(_) | Expr::Const(_))
}

fn known_value(e: &Expr, env: &Env) -> bool {
    fv_expr(e).iter().all(|v| env.get(v) == Some(&true))
}

/// Fold a closed operator application, innermost-leftmost first, or
/// decide a constant equation.
fn const_fold(f: &Formula, _env: &Env) -> Option<Formula> {
    fn fold_expr(e: &Expr) -> Option<Expr> {
        if let Expr::Op(op, args) = e {
            for (i, a) in args.iter().enumerate() {
                if let Some(a2) = fold_expr(a) {
                    let mut args = args.clone();
                    args[i] = a2;
                    return Some(Expr::Op(*op, args));
                }
            }
            let lits: Option<Vec<_>> = args
                .iter()
                .map(|a| if let Expr::Const(l) = a { Some(l) } else { None })
                .collect();
            return apply_op(*op, &lits?).map(Expr::Const);
        }
        None
    }
    match f {
        Formula::Eq(Expr::Const(a), Expr::Const(b)) => {
            Some(if a == b { Formula::TrueF } else { Formula::FalseF })
        }
        Formula::Eq(l, r) => {
            if let Some(l2) = fold_expr(l) {
                return Some(Formula::Eq(l2, r.clone()));
            }
            fold_expr(r).map(|r2| Formula::Eq(l.clone(), r2))
        }
        Formula::Conv(e) => fold_expr(e).map(Formula::Conv),
        Formula::OneEval { subj, arg, anchor, body } => fold_expr(arg)
            .map(|a2| Formula::one_eval(subj.clone(), a2, anchor, (**body).clone())),
        _ => None,
    }
}

fn refl_eq(f: &Formula, _env: &Env) -> Option<Formula> {
    match f {
        Formula::Eq(l, r) if l == r => Some(Formula::TrueF),
        _ => None,
    }
}

/// Truth-value propagation through every connective.  Quantified types
/// are all inhabited, so a constant body decides the quantifier; a
/// false body refutes an evaluation form outright.
fn bool_simp(f: &Formula, _env: &Env) -> Option<Formula> {
    use Formula::{FalseF as F, TrueF as T};
    Some(match f {
        Formula::Not(a) => match **a {
            T => F,
            F => T,
            _ => return None,
        },
        Formula::And(a, b) => match (&**a, &**b) {
            (F, _) | (_, F) => F,
            (T, x) | (x, T) => x.clone(),
            _ => return None,
        },
        Formula::Or(a, b) => match (&**a, &**b) {
            (T, _) | (_, T) => T,
            (F, x) | (x, F) => x.clone(),
            _ => return None,
        },
        Formula::Implies(a, b) => match (&**a, &**b) {
            (F, _) | (_, T) => T,
            (T, x) => x.clone(),
            _ => return None,
        },
        Formula::Forall(_, _, b)
        | Formula::Exists(_, _, b)
        | Formula::ForallModal(_, _, b)
        | Formula::ExistsModal(_, _, b) => match **b {
            T => T,
            F => F,
            _ => return None,
        },
        Formula::OneEval { body, .. } | Formula::CodeEval { body, .. } if **body == F => F,
        _ => return None,
    })
}

fn imp_self(f: &Formula, _env: &Env) -> Option<Formula> {
    match f {
        Formula::Implies(a, b) if alpha_eq_formula(a, b) => Some(Formula::TrueF),
        _ => None,
    }
}

/// A term built from names that denote values always converges (every
/// operator is total).
fn known_conv(f: &Formula, env: &Env) -> Option<Formula> {
    match f {
        Formula::Conv(e) if known_value(e, env) => Some(Formula::TrueF),
        _ => None,
    }
}

fn drop_quant(f: &Formula, _env: &Env) -> Option<Formula> {
    match f {
        Formula::Forall(x, _, b)
        | Formula::Exists(x, _, b)
        | Formula::ForallModal(x, _, b)
        | Formula::ExistsModal(x, _, b)
            if !fv_formula(b).contains(x) =>
        {
            Some((**b).clone())
        }
        _ => None,
    }
}

/// Find a conjunct equating `x` with an `x`-free term denoting a value.
fn defining_eq<'a>(cs: &[&'a Formula], x: &str, env: &Env) -> Option<(usize, &'a Expr)> {
    cs.iter().enumerate().find_map(|(i, c)| {
        let e = match c {
            Formula::Eq(Expr::Var(v), r) if v == x && !fv_expr(r).contains(x) => r,
            Formula::Eq(l, Expr::Var(v)) if v == x && !fv_expr(l).contains(x) => l,
            _ => return None,
        };
        known_value(e, env).then_some((i, e))
    })
}

fn one_point_exists(f: &Formula, env: &Env) -> Option<Formula> {
    let (x, body) = match f {
        Formula::Exists(x, _, b) | Formula::ExistsModal(x, _, b) => (x, b),
        _ => return None,
    };
    let cs = conjuncts(body);
    let (i, e) = defining_eq(&cs, x, env)?;
    let rest: Result<Vec<Formula>, _> = cs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, c)| subst_formula(c, e, x))
        .collect();
    Some(Formula::conj(rest.ok()?))
}

fn one_point_forall(f: &Formula, env: &Env) -> Option<Formula> {
    let (x, body) = match f {
        Formula::Forall(x, _, b) | Formula::ForallModal(x, _, b) => (x, b),
        _ => return None,
    };
    let Formula::Implies(ant, q) = &**body else { return None };
    let cs = conjuncts(ant);
    let (i, e) = defining_eq(&cs, x, env)?;
    let rest: Result<Vec<Formula>, _> = cs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, c)| subst_formula(c, e, x))
        .collect();
    let rest = rest.ok()?;
    let q = subst_formula(q, e, x).ok()?;
    Some(if rest.is_empty() { q } else { Formula::implies(Formula::conj(rest), q) })
}

/// Use an atomic equation to rewrite the conjuncts to its right.
fn eq_prop(f: &Formula, _env: &Env) -> Option<Formula> {
    if !matches!(f, Formula::And(..)) {
        return None;
    }
    let cs = conjuncts(f);
    for i in 0..cs.len() {
        let (a, e) = match cs[i] {
            Formula::Eq(Expr::Var(v), r) if atomic(r) && !fv_expr(r).contains(v) => (v, r),
            Formula::Eq(l, Expr::Var(v)) if atomic(l) && !fv_expr(l).contains(v) => (v, l),
            _ => continue,
        };
        let mut out: Vec<Formula> = cs.iter().map(|c| (*c).clone()).collect();
        let mut changed = false;
        for j in i + 1..cs.len() {
            if fv_formula(cs[j]).contains(a) {
                if let Ok(s) = subst_formula(cs[j], e, a) {
                    if s != *cs[j] {
                        out[j] = s;
                        changed = true;
                    }
                }
            }
        }
        if changed {
            return Some(Formula::conj(out));
        }
    }
    None
}

/// Move anchor-free conjuncts out of a code-evaluation body; the
/// remaining form still asserts that the content converges.
fn pull_unbox(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::CodeEval { subj, anchor, body } = f else { return None };
    pull(body, anchor, |rest| Formula::code_eval(subj.clone(), anchor, rest))
}

fn pull_eval(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::OneEval { subj, arg, anchor, body } = f else { return None };
    pull(body, anchor, |rest| Formula::one_eval(subj.clone(), arg.clone(), anchor, rest))
}

fn pull(body: &Formula, anchor: &str, wrap: impl Fn(Formula) -> Formula) -> Option<Formula> {
    if *body == Formula::TrueF {
        return None;
    }
    let (free, dep): (Vec<&Formula>, Vec<&Formula>) =
        conjuncts(body).into_iter().partition(|c| !fv_formula(c).contains(anchor));
    if free.is_empty() {
        return None;
    }
    let rest =
        if dep.is_empty() { Formula::TrueF } else { Formula::conj(dep.into_iter().cloned()) };
    Some(Formula::conj(free.into_iter().cloned().chain(std::iter::once(wrap(rest)))))
}

/// Two code evaluations of the same subject describe the same content;
/// fuse them under the first anchor.
fn merge_unbox(f: &Formula, _env: &Env) -> Option<Formula> {
    merge(f, |c| match c {
        Formula::CodeEval { subj, anchor, body } => Some((subj, None, anchor, body)),
        _ => None,
    })
}

fn merge_eval(f: &Formula, _env: &Env) -> Option<Formula> {
    merge(f, |c| match c {
        Formula::OneEval { subj, arg, anchor, body } => Some((subj, Some(arg), anchor, body)),
        _ => None,
    })
}

type EvalParts<'a> = (&'a Expr, Option<&'a Expr>, &'a String, &'a Formula);

fn merge(f: &Formula, part: impl Fn(&Formula) -> Option<EvalParts>) -> Option<Formula> {
    if !matches!(f, Formula::And(..)) {
        return None;
    }
    let cs = conjuncts(f);
    for i in 0..cs.len() {
        let Some((s1, a1, x1, b1)) = part(cs[i]) else { continue };
        for j in i + 1..cs.len() {
            let Some((s2, a2, x2, b2)) = part(cs[j]) else { continue };
            if s1 != s2 || a1 != a2 {
                continue;
            }
            let Ok(b2) = subst_formula(b2, &Expr::var(x1), x2) else { continue };
            let fused = Formula::and(b1.clone(), b2);
            let merged = match a1 {
                None => Formula::code_eval(s1.clone(), x1, fused),
                Some(arg) => Formula::one_eval(s1.clone(), arg.clone(), x1, fused),
            };
            let out = cs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(k, c)| if k == i { merged.clone() } else { (*c).clone() });
            return Some(Formula::conj(out.collect::<Vec<_>>()));
        }
    }
    None
}

/// Evaluation is deterministic: a nested evaluation of the same
/// subject and argument inside the body rebinds the same result, so
/// its body can be lifted with the outer anchor substituted in.
fn collapse_eval(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::OneEval { subj, arg, anchor, body } = f else { return None };
    if fv_expr(subj).contains(anchor) || fv_expr(arg).contains(anchor) {
        return None;
    }
    let cs = conjuncts(body);
    for (i, c) in cs.iter().enumerate() {
        if let Formula::OneEval { subj: s2, arg: a2, anchor: z, body: b } = c {
            if s2 == subj && a2 == arg {
                let Ok(lifted) = subst_formula(b, &Expr::var(anchor), z) else { continue };
                let out = cs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k == i { lifted.clone() } else { (*c).clone() });
                let body = Formula::conj(out.collect::<Vec<_>>());
                return Some(Formula::one_eval(subj.clone(), arg.clone(), anchor, body));
            }
        }
    }
    None
}

fn collapse_unbox(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::CodeEval { subj, anchor, body } = f else { return None };
    if fv_expr(subj).contains(anchor) {
        return None;
    }
    let cs = conjuncts(body);
    for (i, c) in cs.iter().enumerate() {
        if let Formula::CodeEval { subj: s2, anchor: z, body: b } = c {
            if s2 == subj {
                let Ok(lifted) = subst_formula(b, &Expr::var(anchor), z) else { continue };
                let out = cs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k == i { lifted.clone() } else { (*c).clone() });
                let body = Formula::conj(out.collect::<Vec<_>>());
                return Some(Formula::code_eval(subj.clone(), anchor, body));
            }
        }
    }
    None
}

/// A sibling code evaluation of the same subject witnesses the
/// trivial-body antecedent of a guard implication.
fn guard_discharge(f: &Formula, _env: &Env) -> Option<Formula> {
    if !matches!(f, Formula::And(..)) {
        return None;
    }
    let cs = conjuncts(f);
    let evidence: Vec<&Expr> = cs
        .iter()
        .filter_map(|c| match c {
            Formula::CodeEval { subj, .. } => Some(subj),
            _ => None,
        })
        .collect();
    for (i, c) in cs.iter().enumerate() {
        if let Formula::Implies(ant, conc) = c {
            if let Formula::CodeEval { subj, body, .. } = &**ant {
                if **body == Formula::TrueF && evidence.contains(&subj) {
                    let out = cs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| if k == i { (**conc).clone() } else { (*c).clone() });
                    return Some(Formula::conj(out.collect::<Vec<_>>()));
                }
            }
        }
    }
    None
}

/// An evaluation form entails the same form with a trivial body.
fn weaken_unbox(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::Implies(a, b) = f else { return None };
    match (&**a, &**b) {
        (
            Formula::CodeEval { subj: s1, .. },
            Formula::CodeEval { subj: s2, body, .. },
        ) if s1 == s2 && **body == Formula::TrueF => Some(Formula::TrueF),
        _ => None,
    }
}

fn weaken_eval(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::Implies(a, b) = f else { return None };
    match (&**a, &**b) {
        (
            Formula::OneEval { subj: s1, arg: a1, .. },
            Formula::OneEval { subj: s2, arg: a2, body, .. },
        ) if s1 == s2 && a1 == a2 && **body == Formula::TrueF => Some(Formula::TrueF),
        _ => None,
    }
}

/// Not every code value has convergent content (quoted divergence is a
/// counterexample at every type), so this universal claim is false.
fn no_total_code(f: &Formula, _env: &Env) -> Option<Formula> {
    match f {
        Formula::Forall(m, Type::Code(_), b) => match &**b {
            Formula::CodeEval { subj: Expr::Var(s), .. } if s == m => Some(Formula::FalseF),
            _ => None,
        },
        _ => None,
    }
}

/// Not every program converges, so universal convergence claims over
/// program variables are false.
fn no_total_modal(f: &Formula, _env: &Env) -> Option<Formula> {
    let Formula::ForallModal(x, _, b) = f else { return None };
    let refuted = match &**b {
        Formula::Conv(Expr::Var(v)) => v == x,
        Formula::Exists(y, _, eq) if y != x => match &**eq {
            Formula::Eq(Expr::Var(l), Expr::Var(r)) => {
                (l == x && r == y) || (l == y && r == x)
            }
            _ => false,
        },
        _ => false,
    };
    refuted.then_some(Formula::FalseF)
}

/// Not every function converges on a fixed argument: one with an
/// everywhere-diverging body refutes the claim.
fn no_total_fn(f: &Formula, _env: &Env) -> Option<Formula> {
    match f {
        Formula::Forall(m, Type::Arrow(..), b) => match &**b {
            Formula::OneEval { subj: Expr::Var(s), arg, body, .. }
                if s == m && **body == Formula::TrueF && !fv_expr(arg).contains(m) =>
            {
                Some(Formula::FalseF)
            }
            _ => None,
        },
        _ => None,
    }
}

/// An existential code variable constrained only to quote a known
/// value always has a witness; drop it.
fn quote_witness(f: &Formula, env: &Env) -> Option<Formula> {
    let Formula::Exists(m, Type::Code(_), body) = f else { return None };
    let cs = conjuncts(body);
    for (i, c) in cs.iter().enumerate() {
        let Formula::CodeEval { subj: Expr::Var(s), anchor, body: b } = c else { continue };
        if s != m {
            continue;
        }
        let e = match &**b {
            Formula::Eq(Expr::Var(w), e) if w == anchor => e,
            Formula::Eq(e, Expr::Var(w)) if w == anchor => e,
            _ => continue,
        };
        let independent = !fv_expr(e).contains(m)
            && !fv_expr(e).contains(anchor)
            && known_value(e, env)
            && cs
                .iter()
                .enumerate()
                .all(|(k, c)| k == i || !fv_formula(c).contains(m));
        if independent {
            let rest = cs.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, c)| (*c).clone());
            return Some(Formula::conj(rest.collect::<Vec<_>>()));
        }
    }
    None
}
