use std::collections::BTreeMap;

use crate::logic::{
    fv_expr, fv_formula, type_of_expr, typecheck_formula, Expr, Formula, FormulaTypeError,
};
use crate::syntax::{fresh_name, Type, TypingCtx};

/// How an axiom schema is stated: a two-sided equivalence, a one-way
/// implication, or a standalone fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomShape {
    Equivalence,
    Implication,
    Fact,
}

/// A value plugged into an axiom schema's metavariable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingValue {
    Formula(Formula),
    Expr(Expr),
    Ty(Type),
    Name(String),
}

pub type Bindings = BTreeMap<String, BindingValue>;

#[derive(Debug, thiserror::Error)]
pub enum AxiomError {
    #[error("unknown axiom {0}")]
    Unknown(String),
    #[error("axiom {axiom}: missing binding {key}")]
    MissingBinding { axiom: &'static str, key: &'static str },
    #[error("axiom {axiom}: binding {key} must be a {want}")]
    WrongKind { axiom: &'static str, key: &'static str, want: &'static str },
    #[error("axiom {axiom}: side condition violated: {what}")]
    SideCondition { axiom: &'static str, what: String },
    #[error("axiom {axiom}: instance does not typecheck: {source}")]
    IllTyped {
        axiom: &'static str,
        #[source]
        source: FormulaTypeError,
    },
}

/// An instantiated axiom, with the two sides kept separate so entailment
/// chains can cite them.
#[derive(Debug, Clone)]
pub struct AxiomInstance {
    pub name: &'static str,
    pub shape: AxiomShape,
    pub lhs: Formula,
    pub rhs: Option<Formula>,
}

impl AxiomInstance {
    /// The instance as a single closed formula: `lhs`, `lhs => rhs`, or
    /// `(lhs => rhs) /\ (rhs => lhs)` depending on the shape.
    pub fn formula(&self) -> Formula {
        match (self.shape, &self.rhs) {
            (AxiomShape::Fact, _) => self.lhs.clone(),
            (AxiomShape::Implication, Some(r)) => Formula::implies(self.lhs.clone(), r.clone()),
            (AxiomShape::Equivalence, Some(r)) => Formula::and(
                Formula::implies(self.lhs.clone(), r.clone()),
                Formula::implies(r.clone(), self.lhs.clone()),
            ),
            _ => self.lhs.clone(),
        }
    }
}

pub const AXIOM_NAMES: [&str; 20] = [
    "q1", "q2", "q3", "q4", "q5", "q6", "term", "term_q", "div", "ext_q", "q_alpha", "e1", "e2",
    "e3", "e4", "e5", "e6", "ext", "e_alpha", "div_m",
];

/// Instantiate the named axiom schema and return it as one formula.
/// Side conditions are checked against the bindings and the context; the
/// resulting instance must typecheck in `ctx`.
pub fn instantiate_axiom(
    ctx: &TypingCtx,
    name: &str,
    bindings: &Bindings,
) -> Result<Formula, AxiomError> {
    instantiate(ctx, name, bindings).map(|i| i.formula())
}

pub fn instantiate(
    ctx: &TypingCtx,
    name: &str,
    bindings: &Bindings,
) -> Result<AxiomInstance, AxiomError> {
    let inst = match name {
        "q1" => {
            let (subj, m) = (expr(bindings, "q1", "subj")?, nm(bindings, "q1", "anchor")?);
            let (a, b) = (formula(bindings, "q1", "A")?, formula(bindings, "q1", "B")?);
            equiv(
                "q1",
                Formula::and(ce(&subj, &m, a.clone()), ce(&subj, &m, b.clone())),
                ce(&subj, &m, Formula::and(a, b)),
            )
        }
        "q2" => {
            let (subj, m) = (expr(bindings, "q2", "subj")?, nm(bindings, "q2", "anchor")?);
            let a = formula(bindings, "q2", "A")?;
            imp("q2", ce(&subj, &m, Formula::not(a.clone())), Formula::not(ce(&subj, &m, a)))
        }
        "q3" => {
            let (subj, m) = (expr(bindings, "q3", "subj")?, nm(bindings, "q3", "anchor")?);
            let (a, b) = (formula(bindings, "q3", "A")?, formula(bindings, "q3", "B")?);
            equiv(
                "q3",
                Formula::and(ce(&subj, &m, a.clone()), Formula::not(ce(&subj, &m, b.clone()))),
                ce(&subj, &m, Formula::and(a, Formula::not(b))),
            )
        }
        "q4" => {
            let (subj, m) = (expr(bindings, "q4", "subj")?, nm(bindings, "q4", "anchor")?);
            let (a, b) = (formula(bindings, "q4", "A")?, formula(bindings, "q4", "B")?);
            if fv_formula(&a).contains(&m) {
                return side("q4", format!("anchor {} occurs free in the detached conjunct", m));
            }
            equiv(
                "q4",
                ce(&subj, &m, Formula::and(a.clone(), b.clone())),
                Formula::and(a, ce(&subj, &m, b)),
            )
        }
        "q5" => {
            let (subj, m) = (expr(bindings, "q5", "subj")?, nm(bindings, "q5", "anchor")?);
            let (v, vt) = (nm(bindings, "q5", "var")?, ty(bindings, "q5", "var_ty")?);
            let a = formula(bindings, "q5", "A")?;
            if v == m || fv_expr(&subj).contains(&v) {
                return side("q5", format!("quantified {} must differ from the subject and anchor", v));
            }
            equiv(
                "q5",
                ce(&subj, &m, Formula::Forall(v.clone(), vt.clone(), Box::new(a.clone()))),
                Formula::Forall(v, vt, Box::new(ce(&subj, &m, a))),
            )
        }
        "q6" => {
            let (subj, m) = (expr(bindings, "q6", "subj")?, nm(bindings, "q6", "anchor")?);
            let (a, b) = (formula(bindings, "q6", "A")?, formula(bindings, "q6", "B")?);
            if fv_formula(&a).contains(&m) || fv_formula(&b).contains(&m) {
                return side("q6", format!("anchor {} occurs free in the implication", m));
            }
            imp(
                "q6",
                Formula::and(Formula::implies(a.clone(), b.clone()), ce(&subj, &m, a)),
                ce(&subj, &m, b),
            )
        }
        "term" => {
            let e = expr(bindings, "term", "e")?;
            for v in fv_expr(&e) {
                if ctx.is_modal(&v) {
                    return side("term", format!("{} is modal", v));
                }
            }
            fact("term", Formula::Conv(e))
        }
        "term_q" => {
            let (subj, m) = (expr(bindings, "term_q", "subj")?, nm(bindings, "term_q", "anchor")?);
            let a = formula(bindings, "term_q", "A")?;
            equiv(
                "term_q",
                ce(&subj, &m, a.clone()),
                ce(&subj, &m, Formula::and(a, Formula::Conv(Expr::Var(m.clone())))),
            )
        }
        "div" => {
            let alpha = ty(bindings, "div", "ty")?;
            let mut avoid: std::collections::BTreeSet<String> = ctx.names().cloned().collect();
            let m = pick("m", &mut avoid);
            let x = pick("x", &mut avoid);
            fact(
                "div",
                Formula::not(Formula::Forall(
                    m.clone(),
                    Type::code(alpha),
                    Box::new(ce(&Expr::Var(m), &x, Formula::TrueF)),
                )),
            )
        }
        "div_m" => {
            let alpha = ty(bindings, "div_m", "ty")?;
            let mut avoid: std::collections::BTreeSet<String> = ctx.names().cloned().collect();
            let x = pick("x", &mut avoid);
            fact(
                "div_m",
                Formula::not(Formula::ForallModal(
                    x.clone(),
                    alpha,
                    Box::new(Formula::Conv(Expr::Var(x))),
                )),
            )
        }
        "ext_q" => {
            let (x, y) = (expr(bindings, "ext_q", "x")?, expr(bindings, "ext_q", "y")?);
            non_modal_vars("ext_q", ctx, [&x, &y])?;
            let tx = expr_ty("ext_q", ctx, &x)?;
            let alpha = match &tx {
                Type::Code(inner) => (**inner).clone(),
                other => {
                    return side("ext_q", format!("expected code type, found {}", other));
                }
            };
            let mut avoid: std::collections::BTreeSet<String> = ctx.names().cloned().collect();
            avoid.extend(fv_expr(&x));
            avoid.extend(fv_expr(&y));
            let a = pick("a", &mut avoid);
            let z = pick("z", &mut avoid);
            let probe = |s: &Expr| ce(s, &z, Formula::eq(Expr::Var(z.clone()), Expr::Var(a.clone())));
            equiv(
                "ext_q",
                Formula::eq(x.clone(), y.clone()),
                Formula::Forall(
                    a.clone(),
                    alpha,
                    Box::new(Formula::and(
                        Formula::implies(probe(&x), probe(&y)),
                        Formula::implies(probe(&y), probe(&x)),
                    )),
                ),
            )
        }
        "ext" => {
            let (x, y) = (expr(bindings, "ext", "x")?, expr(bindings, "ext", "y")?);
            non_modal_vars("ext", ctx, [&x, &y])?;
            let (dom, cod) = match expr_ty("ext", ctx, &x)? {
                Type::Arrow(d, c) => ((*d).clone(), (*c).clone()),
                other => {
                    return side("ext", format!("expected function type, found {}", other));
                }
            };
            let mut avoid: std::collections::BTreeSet<String> = ctx.names().cloned().collect();
            avoid.extend(fv_expr(&x));
            avoid.extend(fv_expr(&y));
            let a = pick("a", &mut avoid);
            let z = pick("z", &mut avoid);
            let w = pick("w", &mut avoid);
            let probe = |s: &Expr| {
                Formula::one_eval(
                    s.clone(),
                    Expr::Var(z.clone()),
                    &w,
                    Formula::eq(Expr::Var(w.clone()), Expr::Var(a.clone())),
                )
            };
            equiv(
                "ext",
                Formula::eq(x.clone(), y.clone()),
                Formula::Forall(
                    a.clone(),
                    cod,
                    Box::new(Formula::Forall(
                        z.clone(),
                        dom,
                        Box::new(Formula::and(
                            Formula::implies(probe(&x), probe(&y)),
                            Formula::implies(probe(&y), probe(&x)),
                        )),
                    )),
                ),
            )
        }
        "q_alpha" => {
            let subj = expr(bindings, "q_alpha", "subj")?;
            let m = nm(bindings, "q_alpha", "anchor")?;
            let n = nm(bindings, "q_alpha", "outer")?;
            let a = formula(bindings, "q_alpha", "A")?;
            if fv_expr(&subj).contains(&n) {
                return side("q_alpha", format!("{} occurs in the subject", n));
            }
            if fv_formula(&a).contains(&n) && n != m {
                return side("q_alpha", format!("{} occurs free in the body", n));
            }
            equiv(
                "q_alpha",
                ce(&subj, &m, a.clone()),
                ce(
                    &subj,
                    &n,
                    ce(
                        &subj,
                        &m,
                        Formula::and(a, Formula::eq(Expr::Var(m.clone()), Expr::Var(n.clone()))),
                    ),
                ),
            )
        }
        "e1" => {
            let (subj, arg, z) = oe_head(bindings, "e1")?;
            let (a, b) = (formula(bindings, "e1", "A")?, formula(bindings, "e1", "B")?);
            equiv(
                "e1",
                Formula::and(oe(&subj, &arg, &z, a.clone()), oe(&subj, &arg, &z, b.clone())),
                oe(&subj, &arg, &z, Formula::and(a, b)),
            )
        }
        "e2" => {
            let (subj, arg, z) = oe_head(bindings, "e2")?;
            let a = formula(bindings, "e2", "A")?;
            imp(
                "e2",
                oe(&subj, &arg, &z, Formula::not(a.clone())),
                Formula::not(oe(&subj, &arg, &z, a)),
            )
        }
        "e3" => {
            let (subj, arg, z) = oe_head(bindings, "e3")?;
            let (a, b) = (formula(bindings, "e3", "A")?, formula(bindings, "e3", "B")?);
            equiv(
                "e3",
                Formula::and(
                    oe(&subj, &arg, &z, a.clone()),
                    Formula::not(oe(&subj, &arg, &z, b.clone())),
                ),
                oe(&subj, &arg, &z, Formula::and(a, Formula::not(b))),
            )
        }
        "e4" => {
            let (subj, arg, z) = oe_head(bindings, "e4")?;
            let (a, b) = (formula(bindings, "e4", "A")?, formula(bindings, "e4", "B")?);
            if fv_formula(&a).contains(&z) {
                return side("e4", format!("anchor {} occurs free in the detached conjunct", z));
            }
            equiv(
                "e4",
                oe(&subj, &arg, &z, Formula::and(a.clone(), b.clone())),
                Formula::and(a, oe(&subj, &arg, &z, b)),
            )
        }
        "e5" => {
            let (subj, arg, z) = oe_head(bindings, "e5")?;
            let (v, vt) = (nm(bindings, "e5", "var")?, ty(bindings, "e5", "var_ty")?);
            let a = formula(bindings, "e5", "A")?;
            if v == z || fv_expr(&subj).contains(&v) || fv_expr(&arg).contains(&v) {
                return side("e5", format!("quantified {} must avoid the subject, argument and anchor", v));
            }
            equiv(
                "e5",
                oe(&subj, &arg, &z, Formula::Forall(v.clone(), vt.clone(), Box::new(a.clone()))),
                Formula::Forall(v, vt, Box::new(oe(&subj, &arg, &z, a))),
            )
        }
        "e6" => {
            let (subj, arg, z) = oe_head(bindings, "e6")?;
            let (a, b) = (formula(bindings, "e6", "A")?, formula(bindings, "e6", "B")?);
            if fv_formula(&a).contains(&z) || fv_formula(&b).contains(&z) {
                return side("e6", format!("anchor {} occurs free in the implication", z));
            }
            imp(
                "e6",
                Formula::and(Formula::implies(a.clone(), b.clone()), oe(&subj, &arg, &z, a)),
                oe(&subj, &arg, &z, b),
            )
        }
        "e_alpha" => {
            let (subj, arg, z) = oe_head(bindings, "e_alpha")?;
            let a_name = nm(bindings, "e_alpha", "outer")?;
            let a = formula(bindings, "e_alpha", "A")?;
            if fv_expr(&subj).contains(&a_name) || fv_expr(&arg).contains(&a_name) {
                return side("e_alpha", format!("{} occurs in the subject or argument", a_name));
            }
            if fv_formula(&a).contains(&a_name) && a_name != z {
                return side("e_alpha", format!("{} occurs free in the body", a_name));
            }
            equiv(
                "e_alpha",
                oe(&subj, &arg, &z, a.clone()),
                oe(
                    &subj,
                    &arg,
                    &a_name,
                    oe(
                        &subj,
                        &arg,
                        &z,
                        Formula::and(
                            a,
                            Formula::eq(Expr::Var(a_name.clone()), Expr::Var(z.clone())),
                        ),
                    ),
                ),
            )
        }
        other => return Err(AxiomError::Unknown(other.to_string())),
    }?;
    typecheck_formula(ctx, &inst.formula())
        .map_err(|source| AxiomError::IllTyped { axiom: inst.name, source })?;
    Ok(inst)
}

fn ce(subj: &Expr, anchor: &str, body: Formula) -> Formula {
    Formula::code_eval(subj.clone(), anchor, body)
}

fn oe(subj: &Expr, arg: &Expr, anchor: &str, body: Formula) -> Formula {
    Formula::one_eval(subj.clone(), arg.clone(), anchor, body)
}

fn oe_head(
    b: &Bindings,
    ax: &'static str,
) -> Result<(Expr, Expr, String), AxiomError> {
    Ok((expr(b, ax, "subj")?, expr(b, ax, "arg")?, nm(b, ax, "anchor")?))
}

fn equiv(name: &'static str, lhs: Formula, rhs: Formula) -> Result<AxiomInstance, AxiomError> {
    Ok(AxiomInstance { name, shape: AxiomShape::Equivalence, lhs, rhs: Some(rhs) })
}

fn imp(name: &'static str, lhs: Formula, rhs: Formula) -> Result<AxiomInstance, AxiomError> {
    Ok(AxiomInstance { name, shape: AxiomShape::Implication, lhs, rhs: Some(rhs) })
}

fn fact(name: &'static str, f: Formula) -> Result<AxiomInstance, AxiomError> {
    Ok(AxiomInstance { name, shape: AxiomShape::Fact, lhs: f, rhs: None })
}

fn side<T>(axiom: &'static str, what: String) -> Result<T, AxiomError> {
    Err(AxiomError::SideCondition { axiom, what })
}

fn pick(base: &str, avoid: &mut std::collections::BTreeSet<String>) -> String {
    let name = if avoid.contains(base) { fresh_name(base, avoid) } else { base.to_string() };
    avoid.insert(name.clone());
    name
}

fn non_modal_vars<'a>(
    ax: &'static str,
    ctx: &TypingCtx,
    exprs: impl IntoIterator<Item = &'a Expr>,
) -> Result<(), AxiomError> {
    for e in exprs {
        for v in fv_expr(e) {
            if ctx.is_modal(&v) {
                return side(ax, format!("{} is modal", v));
            }
        }
    }
    Ok(())
}

fn expr_ty(ax: &'static str, ctx: &TypingCtx, e: &Expr) -> Result<Type, AxiomError> {
    type_of_expr(ctx, e).map_err(|source| AxiomError::IllTyped { axiom: ax, source })
}

fn formula(b: &Bindings, ax: &'static str, key: &'static str) -> Result<Formula, AxiomError> {
    match b.get(key) {
        Some(BindingValue::Formula(f)) => Ok(f.clone()),
        Some(_) => Err(AxiomError::WrongKind { axiom: ax, key, want: "formula" }),
        None => Err(AxiomError::MissingBinding { axiom: ax, key }),
    }
}

fn expr(b: &Bindings, ax: &'static str, key: &'static str) -> Result<Expr, AxiomError> {
    match b.get(key) {
        Some(BindingValue::Expr(e)) => Ok(e.clone()),
        Some(_) => Err(AxiomError::WrongKind { axiom: ax, key, want: "expression" }),
        None => Err(AxiomError::MissingBinding { axiom: ax, key }),
    }
}

fn ty(b: &Bindings, ax: &'static str, key: &'static str) -> Result<Type, AxiomError> {
    match b.get(key) {
        Some(BindingValue::Ty(t)) => Ok(t.clone()),
        Some(_) => Err(AxiomError::WrongKind { axiom: ax, key, want: "type" }),
        None => Err(AxiomError::MissingBinding { axiom: ax, key }),
    }
}

fn nm(b: &Bindings, ax: &'static str, key: &'static str) -> Result<String, AxiomError> {
    match b.get(key) {
        Some(BindingValue::Name(n)) => Ok(n.clone()),
        Some(_) => Err(AxiomError::WrongKind { axiom: ax, key, want: "name" }),
        None => Err(AxiomError::MissingBinding { axiom: ax, key }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn b() -> Bindings {
        Bindings::new()
    }

    fn with(mut m: Bindings, k: &str, v: BindingValue) -> Bindings {
        m.insert(k.to_string(), v);
        m
    }

    #[test]
    fn term_accepts_non_modal_and_rejects_modal() {
        let ctx = TypingCtx::new().bind("x", Type::Int);
        let bs = with(b(), "e", BindingValue::Expr(Expr::var("x")));
        assert_eq!(instantiate_axiom(&ctx, "term", &bs).unwrap(), Formula::Conv(Expr::var("x")));

        let modal = TypingCtx::new().bind_modal("x", Type::Int);
        let err = instantiate_axiom(&modal, "term", &bs).unwrap_err();
        assert!(matches!(err, AxiomError::SideCondition { axiom: "term", .. }));
    }

    #[test]
    fn q1_builds_the_conjunction_equivalence() {
        let ctx = TypingCtx::new().bind("x", Type::code(Type::Int));
        let bs = with(
            with(
                with(b(), "subj", BindingValue::Expr(Expr::var("x"))),
                "anchor",
                BindingValue::Name("m".into()),
            ),
            "A",
            BindingValue::Formula(parse_formula("m == 1").unwrap()),
        );
        let bs = with(bs, "B", BindingValue::Formula(parse_formula("m == m").unwrap()));
        let inst = instantiate(&ctx, "q1", &bs).unwrap();
        assert_eq!(inst.shape, AxiomShape::Equivalence);
        assert_eq!(
            inst.lhs.to_string(),
            "(unbox x as m. m == 1) /\\ (unbox x as m. m == m)"
        );
        assert_eq!(inst.rhs.unwrap().to_string(), "unbox x as m. m == 1 /\\ m == m");
    }

    #[test]
    fn q4_rejects_anchor_in_detached_conjunct() {
        let ctx = TypingCtx::new().bind("x", Type::code(Type::Int));
        let bs = with(
            with(
                with(b(), "subj", BindingValue::Expr(Expr::var("x"))),
                "anchor",
                BindingValue::Name("m".into()),
            ),
            "A",
            BindingValue::Formula(parse_formula("m == 1").unwrap()),
        );
        let bs = with(bs, "B", BindingValue::Formula(Formula::TrueF));
        let err = instantiate_axiom(&ctx, "q4", &bs).unwrap_err();
        assert!(matches!(err, AxiomError::SideCondition { axiom: "q4", .. }));
    }

    #[test]
    fn ext_q_needs_non_modal_code_operands() {
        let ctx = TypingCtx::new()
            .bind("x", Type::code(Type::Int))
            .bind("y", Type::code(Type::Int));
        let bs = with(
            with(b(), "x", BindingValue::Expr(Expr::var("x"))),
            "y",
            BindingValue::Expr(Expr::var("y")),
        );
        let inst = instantiate(&ctx, "ext_q", &bs).unwrap();
        assert_eq!(inst.lhs, Formula::eq(Expr::var("x"), Expr::var("y")));
        assert!(inst.rhs.unwrap().to_string().starts_with("forall a:Int."));

        let modal = TypingCtx::new()
            .bind_modal("x", Type::code(Type::Int))
            .bind("y", Type::code(Type::Int));
        assert!(matches!(
            instantiate_axiom(&modal, "ext_q", &bs).unwrap_err(),
            AxiomError::SideCondition { axiom: "ext_q", .. }
        ));
    }

    #[test]
    fn div_and_div_m_are_closed_facts() {
        let ctx = TypingCtx::new();
        let bs = with(b(), "ty", BindingValue::Ty(Type::Int));
        assert_eq!(
            instantiate_axiom(&ctx, "div", &bs).unwrap().to_string(),
            "~(forall m:[| Int |]. unbox m as x. T)"
        );
        assert_eq!(
            instantiate_axiom(&ctx, "div_m", &bs).unwrap().to_string(),
            "~(forallc x:Int. conv(x))"
        );
    }

    #[test]
    fn e_alpha_side_conditions() {
        let ctx = TypingCtx::new()
            .bind("f", Type::arrow(Type::Int, Type::Int))
            .bind("w", Type::Int);
        let base = with(
            with(
                with(b(), "subj", BindingValue::Expr(Expr::var("f"))),
                "arg",
                BindingValue::Expr(Expr::int(1)),
            ),
            "anchor",
            BindingValue::Name("z".into()),
        );
        let ok = with(
            with(base.clone(), "outer", BindingValue::Name("w2".into())),
            "A",
            BindingValue::Formula(parse_formula("z == w").unwrap()),
        );
        assert!(instantiate_axiom(&ctx, "e_alpha", &ok).is_ok());

        let bad = with(
            with(base, "outer", BindingValue::Name("w".into())),
            "A",
            BindingValue::Formula(parse_formula("z == w").unwrap()),
        );
        assert!(matches!(
            instantiate_axiom(&ctx, "e_alpha", &bad).unwrap_err(),
            AxiomError::SideCondition { axiom: "e_alpha", .. }
        ));
    }

    #[test]
    fn every_named_axiom_is_reachable() {
        for name in AXIOM_NAMES {
            let err = instantiate_axiom(&TypingCtx::new(), name, &Bindings::new());
            assert!(
                !matches!(err, Err(AxiomError::Unknown(_))),
                "{} fell through the registry",
                name
            );
        }
    }
}
