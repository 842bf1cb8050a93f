use std::collections::BTreeSet;

use super::ast::Term;

/// Free variables. The unquote binder scopes over the body only, and
/// quotation is transparent: a quote's frees are its body's frees.
pub fn free_vars(m: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect(m, &mut Vec::new(), &mut out);
    out
}

fn collect(m: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match m {
        Term::Const(_) => {}
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::Abs(x, _, b) | Term::Rec(x, _, b) => {
            bound.push(x.clone());
            collect(b, bound, out);
            bound.pop();
        }
        Term::App(f, a) => {
            collect(f, bound, out);
            collect(a, bound, out);
        }
        Term::Op(_, args) => {
            for a in args {
                collect(a, bound, out);
            }
        }
        Term::If(c, t, e) => {
            collect(c, bound, out);
            collect(t, bound, out);
            collect(e, bound, out);
        }
        Term::Quote(b) => collect(b, bound, out),
        Term::Unquote(x, rhs, body) => {
            collect(rhs, bound, out);
            bound.push(x.clone());
            collect(body, bound, out);
            bound.pop();
        }
    }
}

/// Smallest prime-decorated variant of `base` not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = format!("{}'", base);
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Capture-avoiding substitution `m[n/x]`; bound variables of `m` are
/// renamed (with primes) when they would capture a free variable of `n`.
pub fn substitute(m: &Term, x: &str, n: &Term) -> Term {
    let n_free = free_vars(n);
    subst(m, x, n, &n_free)
}

fn subst(m: &Term, x: &str, n: &Term, n_free: &BTreeSet<String>) -> Term {
    match m {
        Term::Const(_) => m.clone(),
        Term::Var(y) => {
            if y == x {
                n.clone()
            } else {
                m.clone()
            }
        }
        Term::Abs(y, ty, body) => {
            let (y2, body2) = under_binder(y, body, x, n, n_free);
            Term::Abs(y2, ty.clone(), Box::new(body2))
        }
        Term::Rec(g, ty, body) => {
            let (g2, body2) = under_binder(g, body, x, n, n_free);
            Term::Rec(g2, ty.clone(), Box::new(body2))
        }
        Term::App(f, a) => Term::app(subst(f, x, n, n_free), subst(a, x, n, n_free)),
        Term::Op(op, args) => {
            Term::Op(*op, args.iter().map(|a| subst(a, x, n, n_free)).collect())
        }
        Term::If(c, t, e) => Term::ite(
            subst(c, x, n, n_free),
            subst(t, x, n, n_free),
            subst(e, x, n, n_free),
        ),
        Term::Quote(b) => Term::quote(subst(b, x, n, n_free)),
        Term::Unquote(y, rhs, body) => {
            let rhs2 = subst(rhs, x, n, n_free);
            let (y2, body2) = under_binder(y, body, x, n, n_free);
            Term::Unquote(y2, Box::new(rhs2), Box::new(body2))
        }
    }
}

fn under_binder(
    y: &str,
    body: &Term,
    x: &str,
    n: &Term,
    n_free: &BTreeSet<String>,
) -> (String, Term) {
    if y == x {
        // shadowed: substitution stops here
        return (y.to_string(), body.clone());
    }
    if n_free.contains(y) && free_vars(body).contains(x) {
        // the fresh name must dodge the body's binders too, or the renamed
        // occurrences could be captured deeper in
        let mut avoid: BTreeSet<String> = n_free.clone();
        all_names(body, &mut avoid);
        avoid.insert(x.to_string());
        let y2 = fresh_name(y, &avoid);
        let renamed = subst(body, y, &Term::Var(y2.clone()), &BTreeSet::new());
        (y2.clone(), subst(&renamed, x, n, n_free))
    } else {
        (y.to_string(), subst(body, x, n, n_free))
    }
}

/// Every name occurring in `m`, free or bound.
fn all_names(m: &Term, out: &mut BTreeSet<String>) {
    match m {
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
        Term::If(c, t, e) => {
            all_names(c, out);
            all_names(t, out);
            all_names(e, out);
        }
        Term::Quote(b) => all_names(b, out),
        Term::Unquote(x, rhs, body) => {
            out.insert(x.clone());
            all_names(rhs, out);
            all_names(body, out);
        }
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_eq(m: &Term, n: &Term) -> bool {
    alpha(m, n, &mut Vec::new())
}

fn alpha(m: &Term, n: &Term, env: &mut Vec<(String, String)>) -> bool {
    match (m, n) {
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::Var(a), Term::Var(b)) => {
            // the most recent binding of either name decides
            for (l, r) in env.iter().rev() {
                let lm = l == a;
                let rm = r == b;
                if lm || rm {
                    return lm && rm;
                }
            }
            a == b
        }
        (Term::Abs(x, tx, bx), Term::Abs(y, ty, by))
        | (Term::Rec(x, tx, bx), Term::Rec(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha(bx, by, env);
            env.pop();
            r
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => alpha(f1, f2, env) && alpha(a1, a2, env),
        (Term::Op(o1, args1), Term::Op(o2, args2)) => {
            o1 == o2
                && args1.len() == args2.len()
                && args1.iter().zip(args2).all(|(a, b)| alpha(a, b, env))
        }
        (Term::If(c1, t1, e1), Term::If(c2, t2, e2)) => {
            alpha(c1, c2, env) && alpha(t1, t2, env) && alpha(e1, e2, env)
        }
        (Term::Quote(a), Term::Quote(b)) => alpha(a, b, env),
        (Term::Unquote(x, r1, b1), Term::Unquote(y, r2, b2)) => {
            if !alpha(r1, r2, env) {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha(b1, b2, env);
            env.pop();
            r
        }
        _ => false,
    }
}
