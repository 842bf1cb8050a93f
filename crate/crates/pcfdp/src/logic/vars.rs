use std::collections::BTreeSet;

use crate::syntax::fresh_name;

use super::ast::{Expr, Formula};

pub fn fv_expr(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_expr(e, &mut out);
    out
}

fn collect_expr(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(x) => {
            out.insert(x.clone());
        }
        Expr::Op(_, args) => args.iter().for_each(|a| collect_expr(a, out)),
    }
}

pub fn fv_formula(a: &Formula) -> BTreeSet<String> {
    match a {
        Formula::TrueF | Formula::FalseF => BTreeSet::new(),
        Formula::Eq(l, r) => {
            let mut s = fv_expr(l);
            s.extend(fv_expr(r));
            s
        }
        Formula::Conv(e) => fv_expr(e),
        Formula::Not(b) => fv_formula(b),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            let mut s = fv_formula(l);
            s.extend(fv_formula(r));
            s
        }
        Formula::Forall(x, _, b)
        | Formula::Exists(x, _, b)
        | Formula::ForallModal(x, _, b)
        | Formula::ExistsModal(x, _, b) => {
            let mut s = fv_formula(b);
            s.remove(x);
            s
        }
        Formula::OneEval { subj, arg, anchor, body } => {
            let mut s = fv_formula(body);
            s.remove(anchor);
            s.extend(fv_expr(subj));
            s.extend(fv_expr(arg));
            s
        }
        Formula::CodeEval { subj, anchor, body } => {
            let mut s = fv_formula(body);
            s.remove(anchor);
            s.extend(fv_expr(subj));
            s
        }
    }
}

/// Every name occurring in `a`, bound or free; used to pick fresh names.
fn all_names(a: &Formula, out: &mut BTreeSet<String>) {
    match a {
        Formula::TrueF | Formula::FalseF => {}
        Formula::Eq(l, r) => {
            collect_expr(l, out);
            collect_expr(r, out);
        }
        Formula::Conv(e) => collect_expr(e, out),
        Formula::Not(b) => all_names(b, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            all_names(l, out);
            all_names(r, out);
        }
        Formula::Forall(x, _, b)
        | Formula::Exists(x, _, b)
        | Formula::ForallModal(x, _, b)
        | Formula::ExistsModal(x, _, b) => {
            out.insert(x.clone());
            all_names(b, out);
        }
        Formula::OneEval { subj, arg, anchor, body } => {
            collect_expr(subj, out);
            collect_expr(arg, out);
            out.insert(anchor.clone());
            all_names(body, out);
        }
        Formula::CodeEval { subj, anchor, body } => {
            collect_expr(subj, out);
            out.insert(anchor.clone());
            all_names(body, out);
        }
    }
}

pub fn subst_expr(e: &Expr, r: &Expr, x: &str) -> Expr {
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(y) if y == x => r.clone(),
        Expr::Var(_) => e.clone(),
        Expr::Op(op, args) => {
            Expr::Op(*op, args.iter().map(|a| subst_expr(a, r, x)).collect())
        }
    }
}

/// Replacing the subject of an evaluation form requires a variable, since
/// subjects are predicate positions, not computed expressions.
#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("illegal substitution: evaluation subject `{subject}` can only be replaced by a variable, not by `{replacement}`")]
pub struct IllegalSubstitution {
    pub subject: String,
    pub replacement: String,
}

/// Capture-avoiding `a[r/x]`; quantified variables and anchors are renamed
/// as needed.
pub fn subst_formula(a: &Formula, r: &Expr, x: &str) -> Result<Formula, IllegalSubstitution> {
    let r_free = fv_expr(r);
    go(a, r, x, &r_free)
}

fn go(
    a: &Formula,
    r: &Expr,
    x: &str,
    r_free: &BTreeSet<String>,
) -> Result<Formula, IllegalSubstitution> {
    let subst_subject = |subj: &Expr| -> Result<Expr, IllegalSubstitution> {
        if subj.as_var() == Some(x) {
            if r.as_var().is_none() {
                return Err(IllegalSubstitution {
                    subject: x.to_string(),
                    replacement: r.to_string(),
                });
            }
            Ok(r.clone())
        } else {
            Ok(subst_expr(subj, r, x))
        }
    };
    Ok(match a {
        Formula::TrueF | Formula::FalseF => a.clone(),
        Formula::Eq(l, rr) => Formula::Eq(subst_expr(l, r, x), subst_expr(rr, r, x)),
        Formula::Conv(e) => Formula::Conv(subst_expr(e, r, x)),
        Formula::Not(b) => Formula::not(go(b, r, x, r_free)?),
        Formula::And(l, rr) => Formula::and(go(l, r, x, r_free)?, go(rr, r, x, r_free)?),
        Formula::Or(l, rr) => Formula::or(go(l, r, x, r_free)?, go(rr, r, x, r_free)?),
        Formula::Implies(l, rr) => {
            Formula::implies(go(l, r, x, r_free)?, go(rr, r, x, r_free)?)
        }
        Formula::Forall(y, ty, b)
        | Formula::Exists(y, ty, b)
        | Formula::ForallModal(y, ty, b)
        | Formula::ExistsModal(y, ty, b) => {
            let rebuild = |y: String, b: Formula| match a {
                Formula::Forall(..) => Formula::Forall(y, ty.clone(), Box::new(b)),
                Formula::Exists(..) => Formula::Exists(y, ty.clone(), Box::new(b)),
                Formula::ForallModal(..) => Formula::ForallModal(y, ty.clone(), Box::new(b)),
                _ => Formula::ExistsModal(y, ty.clone(), Box::new(b)),
            };
            if y == x {
                return Ok(a.clone());
            }
            let (y2, b2) = avoid_capture(y, b, x, r_free)?;
            rebuild(y2, go(&b2, r, x, r_free)?)
        }
        Formula::OneEval { subj, arg, anchor, body } => {
            let subj = subst_subject(subj)?;
            let arg = subst_expr(arg, r, x);
            if anchor == x {
                Formula::OneEval { subj, arg, anchor: anchor.clone(), body: body.clone() }
            } else {
                let (m2, b2) = avoid_capture(anchor, body, x, r_free)?;
                Formula::OneEval {
                    subj,
                    arg,
                    anchor: m2,
                    body: Box::new(go(&b2, r, x, r_free)?),
                }
            }
        }
        Formula::CodeEval { subj, anchor, body } => {
            let subj = subst_subject(subj)?;
            if anchor == x {
                Formula::CodeEval { subj, anchor: anchor.clone(), body: body.clone() }
            } else {
                let (m2, b2) = avoid_capture(anchor, body, x, r_free)?;
                Formula::CodeEval {
                    subj,
                    anchor: m2,
                    body: Box::new(go(&b2, r, x, r_free)?),
                }
            }
        }
    })
}

/// Rename the binder `y` of `body` when it would capture a name free in
/// the replacement.
fn avoid_capture(
    y: &str,
    body: &Formula,
    x: &str,
    r_free: &BTreeSet<String>,
) -> Result<(String, Formula), IllegalSubstitution> {
    if r_free.contains(y) && fv_formula(body).contains(x) {
        let mut avoid = r_free.clone();
        all_names(body, &mut avoid);
        avoid.insert(x.to_string());
        let y2 = fresh_name(y, &avoid);
        let renamed = subst_formula(body, &Expr::Var(y2.clone()), y)
            .expect("renaming by a variable cannot fail");
        Ok((y2, renamed))
    } else {
        Ok((y.to_string(), body.clone()))
    }
}

fn lookup_pair(env: &[(String, String)], l: &str, r: &str) -> bool {
    for (a, b) in env.iter().rev() {
        if a == l || b == r {
            return a == l && b == r;
        }
    }
    l == r
}

fn cmp_expr(a: &Expr, b: &Expr, env: &[(String, String)]) -> bool {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x == y,
        (Expr::Var(x), Expr::Var(y)) => lookup_pair(env, x, y),
        (Expr::Op(o1, a1), Expr::Op(o2, a2)) => {
            o1 == o2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| cmp_expr(x, y, env))
        }
        _ => false,
    }
}

fn cmp_formula(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>, sym_eq: bool) -> bool {
    match (a, b) {
        (Formula::TrueF, Formula::TrueF) | (Formula::FalseF, Formula::FalseF) => true,
        (Formula::Eq(l1, r1), Formula::Eq(l2, r2)) => {
            let straight = cmp_expr(l1, l2, env) && cmp_expr(r1, r2, env);
            if straight {
                true
            } else {
                sym_eq && cmp_expr(l1, r2, env) && cmp_expr(r1, l2, env)
            }
        }
        (Formula::Conv(x), Formula::Conv(y)) => cmp_expr(x, y, env),
        (Formula::Not(x), Formula::Not(y)) => cmp_formula(x, y, env, sym_eq),
        (Formula::And(l1, r1), Formula::And(l2, r2))
        | (Formula::Or(l1, r1), Formula::Or(l2, r2))
        | (Formula::Implies(l1, r1), Formula::Implies(l2, r2)) => {
            cmp_formula(l1, l2, env, sym_eq) && cmp_formula(r1, r2, env, sym_eq)
        }
        (Formula::Forall(x1, t1, b1), Formula::Forall(x2, t2, b2))
        | (Formula::Exists(x1, t1, b1), Formula::Exists(x2, t2, b2))
        | (Formula::ForallModal(x1, t1, b1), Formula::ForallModal(x2, t2, b2))
        | (Formula::ExistsModal(x1, t1, b1), Formula::ExistsModal(x2, t2, b2)) => {
            if t1 != t2 {
                return false;
            }
            env.push((x1.clone(), x2.clone()));
            let r = cmp_formula(b1, b2, env, sym_eq);
            env.pop();
            r
        }
        (
            Formula::OneEval { subj: s1, arg: a1, anchor: m1, body: b1 },
            Formula::OneEval { subj: s2, arg: a2, anchor: m2, body: b2 },
        ) => {
            if !cmp_expr(s1, s2, env) || !cmp_expr(a1, a2, env) {
                return false;
            }
            env.push((m1.clone(), m2.clone()));
            let r = cmp_formula(b1, b2, env, sym_eq);
            env.pop();
            r
        }
        (
            Formula::CodeEval { subj: s1, anchor: m1, body: b1 },
            Formula::CodeEval { subj: s2, anchor: m2, body: b2 },
        ) => {
            if !cmp_expr(s1, s2, env) {
                return false;
            }
            env.push((m1.clone(), m2.clone()));
            let r = cmp_formula(b1, b2, env, sym_eq);
            env.pop();
            r
        }
        _ => false,
    }
}

/// Equality up to renaming of quantified variables and anchors.
pub fn alpha_eq_formula(a: &Formula, b: &Formula) -> bool {
    cmp_formula(a, b, &mut Vec::new(), false)
}

/// Equality up to the conventions of displayed formulae: alpha-renaming,
/// orientation of equations, and dropped `T` conjuncts.
pub fn display_eq(a: &Formula, b: &Formula) -> bool {
    cmp_formula(&drop_true_conjuncts(a), &drop_true_conjuncts(b), &mut Vec::new(), true)
}

fn drop_true_conjuncts(a: &Formula) -> Formula {
    match a {
        Formula::TrueF | Formula::FalseF | Formula::Eq(..) | Formula::Conv(_) => a.clone(),
        Formula::Not(b) => Formula::not(drop_true_conjuncts(b)),
        Formula::And(l, r) => {
            let l = drop_true_conjuncts(l);
            let r = drop_true_conjuncts(r);
            match (l, r) {
                (Formula::TrueF, r) => r,
                (l, Formula::TrueF) => l,
                (l, r) => Formula::and(l, r),
            }
        }
        Formula::Or(l, r) => Formula::or(drop_true_conjuncts(l), drop_true_conjuncts(r)),
        Formula::Implies(l, r) => {
            Formula::implies(drop_true_conjuncts(l), drop_true_conjuncts(r))
        }
        Formula::Forall(x, t, b) => {
            Formula::Forall(x.clone(), t.clone(), Box::new(drop_true_conjuncts(b)))
        }
        Formula::Exists(x, t, b) => {
            Formula::Exists(x.clone(), t.clone(), Box::new(drop_true_conjuncts(b)))
        }
        Formula::ForallModal(x, t, b) => {
            Formula::ForallModal(x.clone(), t.clone(), Box::new(drop_true_conjuncts(b)))
        }
        Formula::ExistsModal(x, t, b) => {
            Formula::ExistsModal(x.clone(), t.clone(), Box::new(drop_true_conjuncts(b)))
        }
        Formula::OneEval { subj, arg, anchor, body } => Formula::OneEval {
            subj: subj.clone(),
            arg: arg.clone(),
            anchor: anchor.clone(),
            body: Box::new(drop_true_conjuncts(body)),
        },
        Formula::CodeEval { subj, anchor, body } => Formula::CodeEval {
            subj: subj.clone(),
            anchor: anchor.clone(),
            body: Box::new(drop_true_conjuncts(body)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn fv(src: &str) -> Vec<String> {
        fv_formula(&parse_formula(src).unwrap()).into_iter().collect()
    }

    #[test]
    fn anchor_is_bound_but_subject_is_free() {
        assert_eq!(fv("unbox m as y. x == y"), vec!["m", "x"]);
        assert_eq!(fv("forall x:Int. x == x"), Vec::<String>::new());
        assert_eq!(fv("eval u (x + 1) as m. m == 1 /\\ z == z"), vec!["u", "x", "z"]);
    }

    #[test]
    fn substitution_into_eval_bodies() {
        let a = parse_formula("unbox m as y. x == y").unwrap();
        let got = subst_formula(&a, &Expr::int(3), "x").unwrap();
        assert_eq!(got, parse_formula("unbox m as y. 3 == y").unwrap());
    }

    #[test]
    fn substituting_a_variable_for_itself_is_identity() {
        let a = parse_formula("eval u x as m. m == x /\\ conv(x)").unwrap();
        assert_eq!(subst_formula(&a, &Expr::var("x"), "x").unwrap(), a);
    }

    #[test]
    fn branch_condition_style_anchor_substitution() {
        // the conditional rule substitutes a truth value for the anchor
        let b = parse_formula("b == (0 <= i)").unwrap();
        let got = subst_formula(&b, &Expr::bool(true), "b").unwrap();
        assert_eq!(got, parse_formula("true == (0 <= i)").unwrap());
    }

    #[test]
    fn quantifier_capture_is_avoided() {
        let a = parse_formula("forall y:Int. x == y").unwrap();
        let got = subst_formula(&a, &Expr::var("y"), "x").unwrap();
        assert_eq!(got, parse_formula("forall y':Int. y == y'").unwrap());
    }

    #[test]
    fn anchor_capture_is_avoided() {
        let a = parse_formula("eval u 2 as m. x == m").unwrap();
        let got = subst_formula(&a, &Expr::add(Expr::var("m"), Expr::int(1)), "x").unwrap();
        assert_eq!(got, parse_formula("eval u 2 as m'. m + 1 == m'").unwrap());
    }

    #[test]
    fn shadowed_binder_stops_substitution() {
        let a = parse_formula("x == 0 /\\ forall x:Int. x == 1").unwrap();
        let got = subst_formula(&a, &Expr::int(5), "x").unwrap();
        assert_eq!(got, parse_formula("5 == 0 /\\ forall x:Int. x == 1").unwrap());
    }

    #[test]
    fn subject_replacement_must_be_a_variable() {
        let a = parse_formula("eval u 2 as z. T").unwrap();
        assert!(subst_formula(&a, &Expr::var("v"), "u").is_ok());
        let e = subst_formula(&a, &Expr::add(Expr::int(1), Expr::int(1)), "u").unwrap_err();
        assert_eq!(e.subject, "u");
    }

    #[test]
    fn free_variable_bound_after_substitution_stays_within_expectation() {
        let a = parse_formula("exists y:Int. x + y == 0").unwrap();
        let got = subst_formula(&a, &Expr::add(Expr::var("z"), Expr::int(1)), "x").unwrap();
        let frees = fv_formula(&got);
        assert!(frees.contains("z") && !frees.contains("x"));
    }

    #[test]
    fn alpha_equality_of_binders_and_anchors() {
        let a = parse_formula("forall x:Int. eval u x as m. m == x").unwrap();
        let b = parse_formula("forall y:Int. eval u y as n. n == y").unwrap();
        assert!(alpha_eq_formula(&a, &b));
        let c = parse_formula("forallc y:Int. eval u y as n. n == y").unwrap();
        assert!(!alpha_eq_formula(&a, &c));
        // a bound name on one side only is not alpha-equal
        let d = parse_formula("forall x:Int. eval u x as m. m == y").unwrap();
        assert!(!alpha_eq_formula(&a, &d));
    }

    #[test]
    fn display_equality_flips_equations_and_drops_true() {
        let a = parse_formula("c == m /\\ T").unwrap();
        let b = parse_formula("m == c").unwrap();
        assert!(display_eq(&a, &b));
        assert!(!alpha_eq_formula(&a, &b));
        let c = parse_formula("T /\\ T").unwrap();
        assert!(display_eq(&c, &Formula::TrueF));
        let d = parse_formula("unbox m as x. (x == 3 /\\ T)").unwrap();
        let e = parse_formula("unbox m as y. 3 == y").unwrap();
        assert!(display_eq(&d, &e));
    }
}
