use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{fv_formula, subst_formula, Expr, Formula, Judgement};
use crate::syntax::{free_vars, fresh_name, Term, Type};

use super::entail::{ChainStep, Discharge};
use super::rules::{ProofNode, RuleName};

#[derive(Debug, thiserror::Error)]
pub enum ExpandError {
    #[error("{0} is not a derived rule")]
    NotDerived(RuleName),
    #[error("derived node is malformed: {0}")]
    Malformed(String),
}

/// Rewrite a derived-rule application into a tree of primitive rules
/// with the same conclusion. Propositional bridge obligations carry
/// one-step tautology chains; genuinely semantic ones fall back to the
/// default bounded search.
pub fn expand_derived_rule(node: &ProofNode) -> Result<ProofNode, ExpandError> {
    match node.rule {
        RuleName::Conseq => expand_conseq(node),
        RuleName::Unquote => expand_unquote(node),
        RuleName::Let => expand_let(node),
        RuleName::RecPrime => expand_rec_prime(node),
        other => Err(ExpandError::NotDerived(other)),
    }
}

fn bounded() -> Discharge {
    Discharge::Bounded { models: 200, seed: 42 }
}

fn taut_to(f: Formula) -> Discharge {
    Discharge::AxiomChain(vec![ChainStep::Taut { to: f }])
}

fn mk(
    rule: RuleName,
    pre: Formula,
    term: Term,
    anchor: &str,
    post: Formula,
    premises: Vec<ProofNode>,
    side: Vec<Discharge>,
) -> ProofNode {
    ProofNode {
        rule,
        conclusion: Judgement { pre, term, anchor: anchor.to_string(), post },
        premises,
        side,
        hints: BTreeMap::new(),
        aux: Vec::new(),
    }
}

fn want(cond: bool, msg: &str) -> Result<(), ExpandError> {
    if cond {
        Ok(())
    } else {
        Err(ExpandError::Malformed(msg.to_string()))
    }
}

fn expand_conseq(node: &ProofNode) -> Result<ProofNode, ExpandError> {
    want(node.premises.len() == 1, "consequence takes one premise")?;
    Ok(mk(
        RuleName::ConseqKl,
        node.conclusion.pre.clone(),
        node.conclusion.term.clone(),
        &node.conclusion.anchor,
        node.conclusion.post.clone(),
        vec![node.premises[0].clone()],
        vec![bounded()],
    ))
}

fn expand_unquote(node: &ProofNode) -> Result<ProofNode, ExpandError> {
    want(node.premises.len() == 2, "splice takes two premises")?;
    let concl = &node.conclusion;
    let (x, _m_term, n_term) = match &concl.term {
        Term::Unquote(x, m, n) => (x.clone(), (**m).clone(), (**n).clone()),
        _ => return Err(ExpandError::Malformed("program is not a splice".to_string())),
    };
    let p1 = &node.premises[0];
    let p2 = &node.premises[1];
    let m = p1.conclusion.anchor.clone();

    let mut avoid: BTreeSet<String> = fv_formula(&p1.conclusion.post);
    avoid.extend(fv_formula(&p2.conclusion.pre));
    avoid.extend(fv_formula(&concl.post));
    avoid.extend(free_vars(&concl.term));
    avoid.insert(x.clone());
    avoid.insert(m.clone());
    let fa = fresh_name("f", &avoid);
    avoid.insert(fa.clone());
    let ya = fresh_name("y", &avoid);
    let guard = Formula::implies(
        Formula::code_eval(Expr::var(&m), &fa, Formula::TrueF),
        Formula::code_eval(Expr::var(&m), &ya, Formula::eq(Expr::var(&ya), Expr::var(&x))),
    );

    let d = p2.conclusion.post.clone();
    let bridge = mk(
        RuleName::ConseqKl,
        Formula::and(p2.conclusion.pre.clone(), guard),
        n_term,
        &p2.conclusion.anchor,
        d.clone(),
        vec![p2.clone()],
        vec![taut_to(Formula::and(
            p2.conclusion.pre.clone(),
            Formula::implies(d.clone(), d),
        ))],
    );

    Ok(mk(
        RuleName::UnquotePlus,
        concl.pre.clone(),
        concl.term.clone(),
        &concl.anchor,
        concl.post.clone(),
        vec![p1.clone(), bridge],
        vec![],
    ))
}

fn expand_let(node: &ProofNode) -> Result<ProofNode, ExpandError> {
    want(node.premises.len() == 2, "binding takes two premises")?;
    let concl = &node.conclusion;
    let (x, xty, n_term, m_term) = match &concl.term {
        Term::App(f, a) => match &**f {
            Term::Abs(x, t, body) => (x.clone(), t.clone(), (**body).clone(), (**a).clone()),
            _ => {
                return Err(ExpandError::Malformed(
                    "program does not immediately apply an abstraction".to_string(),
                ))
            }
        },
        _ => return Err(ExpandError::Malformed("program is not a binding".to_string())),
    };
    let p1 = &node.premises[0];
    let p2 = &node.premises[1];
    let u = concl.anchor.clone();
    let a = concl.pre.clone();
    let b = p1.conclusion.post.clone();
    let c = concl.post.clone();
    let lam = Term::abs(&x, xty.clone(), n_term.clone());

    let mut avoid: BTreeSet<String> = fv_formula(&a);
    avoid.extend(fv_formula(&b));
    avoid.extend(fv_formula(&c));
    avoid.extend(free_vars(&concl.term));
    avoid.insert(x.clone());
    avoid.insert(u.clone());
    let f = fresh_name("f", &avoid);

    let applied = Formula::one_eval(Expr::var(&f), Expr::var(&x), &u, c.clone());
    let b1 = Formula::Forall(
        x.clone(),
        xty,
        Box::new(Formula::implies(b.clone(), applied.clone())),
    );

    let body_bridge = mk(
        RuleName::ConseqKl,
        Formula::and(a.clone(), b.clone()),
        n_term,
        &u,
        c.clone(),
        vec![p2.clone()],
        vec![taut_to(Formula::and(b.clone(), Formula::implies(c.clone(), c.clone())))],
    );
    let abs_node = mk(
        RuleName::Abs,
        a.clone(),
        lam.clone(),
        &f,
        b1.clone(),
        vec![body_bridge],
        vec![],
    );
    let fun_bridge = mk(
        RuleName::ConseqKl,
        a.clone(),
        lam,
        &f,
        Formula::and(b1.clone(), a.clone()),
        vec![abs_node],
        vec![taut_to(Formula::and(
            a.clone(),
            Formula::implies(b1.clone(), Formula::and(b1.clone(), a.clone())),
        ))],
    );
    let arg_bridge = mk(
        RuleName::ConseqKl,
        Formula::and(b1, a.clone()),
        m_term,
        &x,
        applied,
        vec![p1.clone()],
        vec![bounded()],
    );

    Ok(mk(
        RuleName::App,
        a,
        concl.term.clone(),
        &u,
        c,
        vec![fun_bridge, arg_bridge],
        vec![],
    ))
}

fn expand_rec_prime(node: &ProofNode) -> Result<ProofNode, ExpandError> {
    want(node.premises.len() == 1, "recursion takes one premise")?;
    let concl = &node.conclusion;
    let lam = match &concl.term {
        Term::Rec(_, _, b) => (**b).clone(),
        _ => return Err(ExpandError::Malformed("program is not a recursion".to_string())),
    };
    let u = concl.anchor.clone();
    let a = concl.pre.clone();
    let (n, guard_n, b) = match &concl.post {
        Formula::Forall(n, t, body) if *t == Type::Int => match &**body {
            Formula::Implies(guard, b) => (n.clone(), (**guard).clone(), (**b).clone()),
            _ => {
                return Err(ExpandError::Malformed(
                    "postcondition does not guard the index".to_string(),
                ))
            }
        },
        _ => {
            return Err(ExpandError::Malformed(
                "postcondition does not quantify an integer index".to_string(),
            ))
        }
    };
    let premise = &node.premises[0];
    let h_g = match &premise.conclusion.pre {
        Formula::And(_, ih) => (**ih).clone(),
        _ => {
            return Err(ExpandError::Malformed(
                "premise lacks the induction hypothesis conjunct".to_string(),
            ))
        }
    };
    let (i, ih_guard, _) = match &h_g {
        Formula::Forall(i, t, body) if *t == Type::Int => match &**body {
            Formula::Implies(guard, inst) => (i.clone(), (**guard).clone(), (**inst).clone()),
            _ => {
                return Err(ExpandError::Malformed(
                    "induction hypothesis does not guard its index".to_string(),
                ))
            }
        },
        _ => {
            return Err(ExpandError::Malformed(
                "induction hypothesis is not an integer quantifier".to_string(),
            ))
        }
    };
    let b_shift = subst_formula(&b, &Expr::var(&i), &n)
        .map_err(|e| ExpandError::Malformed(format!("index shift fails: {}", e)))?;
    let h_u = Formula::Forall(
        i,
        Type::Int,
        Box::new(Formula::implies(ih_guard, b_shift)),
    );

    let stepped = Formula::implies(guard_n.clone(), b.clone());
    let kl = mk(
        RuleName::ConseqKl,
        premise.conclusion.pre.clone(),
        lam.clone(),
        &u,
        stepped.clone(),
        vec![premise.clone()],
        vec![taut_to(Formula::and(
            premise.conclusion.pre.clone(),
            Formula::implies(b, stepped.clone()),
        ))],
    );
    let split = mk(
        RuleName::AndImp,
        a.clone(),
        lam.clone(),
        &u,
        Formula::implies(h_g.clone(), stepped.clone()),
        vec![kl],
        vec![],
    );
    let generalized = mk(
        RuleName::AuxForall,
        a.clone(),
        lam,
        &u,
        Formula::Forall(
            n.clone(),
            Type::Int,
            Box::new(Formula::implies(h_g, stepped.clone())),
        ),
        vec![split],
        vec![],
    );
    let unrolled_post = Formula::Forall(
        n,
        Type::Int,
        Box::new(Formula::implies(h_u, stepped)),
    );
    let rec = mk(
        RuleName::Rec,
        a.clone(),
        concl.term.clone(),
        &u,
        unrolled_post,
        vec![generalized],
        vec![],
    );
    Ok(mk(
        RuleName::ConseqKl,
        a,
        concl.term.clone(),
        &u,
        concl.post.clone(),
        vec![rec],
        vec![bounded()],
    ))
}
