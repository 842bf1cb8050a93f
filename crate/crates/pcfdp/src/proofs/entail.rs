use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::{alpha_eq_formula, Formula};
use crate::semantics::{gen_models, sat, BoundedConfig};
use crate::syntax::TypingCtx;

use super::axioms::{instantiate_axiom, AxiomError, Bindings};

/// One step of an axiom-chain discharge: either bring an axiom instance
/// into scope as a lemma, or move to a propositional consequence of
/// everything collected so far.
#[derive(Debug, Clone)]
pub enum ChainStep {
    Axiom { name: String, bindings: Bindings },
    Taut { to: Formula },
}

#[derive(Debug, Clone)]
pub enum Discharge {
    AxiomChain(Vec<ChainStep>),
    Bounded { models: usize, seed: u64 },
    Assumed(String),
}

/// A side obligation `hypothesis => conclusion` together with the chosen
/// way of discharging it.
#[derive(Debug, Clone)]
pub struct Entailment {
    pub hypothesis: Formula,
    pub conclusion: Formula,
    pub discharge: Discharge,
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.hypothesis, self.conclusion)
    }
}

/// How an obligation was settled. `BoundedOk` and `Assumed` are weaker
/// than `Proved` and are surfaced in proof reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DischargeResult {
    Proved,
    BoundedOk { models_checked: usize },
    Assumed(String),
}

#[derive(Debug, thiserror::Error)]
pub enum EntailError {
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error("chain step {step}: not a propositional consequence of the facts so far")]
    TautStepFailed { step: usize },
    #[error("chain ended at a formula that differs from the obligation's conclusion")]
    ChainIncomplete,
    #[error("countermodel to {obligation} (model {index}):\n{model}")]
    Countermodel { obligation: String, index: usize, model: String },
}

/// Settle one obligation in `ctx`. Axiom chains are replayed exactly;
/// bounded discharges search the generated model suite for a clear
/// countermodel of `hypothesis /\ ~conclusion`.
pub fn discharge_entailment(
    ctx: &TypingCtx,
    ent: &Entailment,
    cfg: &BoundedConfig,
) -> Result<DischargeResult, EntailError> {
    match &ent.discharge {
        Discharge::AxiomChain(steps) => {
            let mut cur = ent.hypothesis.clone();
            for (i, step) in steps.iter().enumerate() {
                match step {
                    ChainStep::Axiom { name, bindings } => {
                        let inst = instantiate_axiom(ctx, name, bindings)?;
                        cur = Formula::and(cur, inst);
                    }
                    ChainStep::Taut { to } => {
                        if !taut_entails(&cur, to) {
                            return Err(EntailError::TautStepFailed { step: i });
                        }
                        cur = to.clone();
                    }
                }
            }
            if alpha_eq_formula(&cur, &ent.conclusion) {
                Ok(DischargeResult::Proved)
            } else {
                Err(EntailError::ChainIncomplete)
            }
        }
        Discharge::Bounded { models, seed } => {
            let suite = gen_models(ctx, cfg, *seed, *models);
            let test = Formula::and(ent.hypothesis.clone(), Formula::not(ent.conclusion.clone()));
            for (index, model) in suite.iter().enumerate() {
                if sat(model, &test, cfg).is_clear_true() {
                    return Err(EntailError::Countermodel {
                        obligation: ent.to_string(),
                        index,
                        model: model.to_string(),
                    });
                }
            }
            Ok(DischargeResult::BoundedOk { models_checked: suite.len() })
        }
        Discharge::Assumed(label) => Ok(DischargeResult::Assumed(label.clone())),
    }
}

/// Does `concl` follow from `hyp` by propositional reasoning alone?
/// Non-connective subformulae are treated as opaque atoms, keyed up to
/// renaming of their bound variables. Gives up (returns false) past 16
/// distinct atoms.
pub fn taut_entails(hyp: &Formula, concl: &Formula) -> bool {
    let goal = Formula::implies(hyp.clone(), concl.clone());
    let mut atoms = BTreeSet::new();
    collect_atoms(&goal, &mut atoms);
    let atoms: Vec<String> = atoms.into_iter().collect();
    if atoms.len() > 16 {
        return false;
    }
    let index: BTreeMap<&str, usize> =
        atoms.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    for mask in 0u32..(1u32 << atoms.len()) {
        if !eval_skeleton(&goal, &index, mask) {
            return false;
        }
    }
    true
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::TrueF | Formula::FalseF => {}
        Formula::Not(a) => collect_atoms(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        atom => {
            out.insert(atom_key(atom));
        }
    }
}

fn eval_skeleton(f: &Formula, index: &BTreeMap<&str, usize>, mask: u32) -> bool {
    match f {
        Formula::TrueF => true,
        Formula::FalseF => false,
        Formula::Not(a) => !eval_skeleton(a, index, mask),
        Formula::And(a, b) => eval_skeleton(a, index, mask) && eval_skeleton(b, index, mask),
        Formula::Or(a, b) => eval_skeleton(a, index, mask) || eval_skeleton(b, index, mask),
        Formula::Implies(a, b) => !eval_skeleton(a, index, mask) || eval_skeleton(b, index, mask),
        atom => mask & (1 << index[atom_key(atom).as_str()]) != 0,
    }
}

/// Canonical display of a formula with bound variables renamed in
/// traversal order, so alpha-variants of an atom share one truth-table
/// column.
fn atom_key(f: &Formula) -> String {
    let mut counter = 0;
    canon(f, &Vec::new(), &mut counter).to_string()
}

fn canon(f: &Formula, env: &Vec<(String, String)>, counter: &mut usize) -> Formula {
    let bind = |env: &Vec<(String, String)>, name: &str, counter: &mut usize| {
        let fresh = format!("#b{}", *counter);
        *counter += 1;
        let mut e = env.clone();
        e.push((name.to_string(), fresh.clone()));
        (fresh, e)
    };
    match f {
        Formula::TrueF => Formula::TrueF,
        Formula::FalseF => Formula::FalseF,
        Formula::Eq(a, b) => Formula::Eq(canon_expr(a, env), canon_expr(b, env)),
        Formula::Conv(e) => Formula::Conv(canon_expr(e, env)),
        Formula::Not(a) => Formula::not(canon(a, env, counter)),
        Formula::And(a, b) => Formula::and(canon(a, env, counter), canon(b, env, counter)),
        Formula::Or(a, b) => Formula::or(canon(a, env, counter), canon(b, env, counter)),
        Formula::Implies(a, b) => {
            Formula::implies(canon(a, env, counter), canon(b, env, counter))
        }
        Formula::Forall(x, t, a) => {
            let (fresh, inner) = bind(env, x, counter);
            Formula::Forall(fresh, t.clone(), Box::new(canon(a, &inner, counter)))
        }
        Formula::Exists(x, t, a) => {
            let (fresh, inner) = bind(env, x, counter);
            Formula::Exists(fresh, t.clone(), Box::new(canon(a, &inner, counter)))
        }
        Formula::ForallModal(x, t, a) => {
            let (fresh, inner) = bind(env, x, counter);
            Formula::ForallModal(fresh, t.clone(), Box::new(canon(a, &inner, counter)))
        }
        Formula::ExistsModal(x, t, a) => {
            let (fresh, inner) = bind(env, x, counter);
            Formula::ExistsModal(fresh, t.clone(), Box::new(canon(a, &inner, counter)))
        }
        Formula::OneEval { subj, arg, anchor, body } => {
            let subj = canon_expr(subj, env);
            let arg = canon_expr(arg, env);
            let (fresh, inner) = bind(env, anchor, counter);
            Formula::OneEval {
                subj,
                arg,
                anchor: fresh,
                body: Box::new(canon(body, &inner, counter)),
            }
        }
        Formula::CodeEval { subj, anchor, body } => {
            let subj = canon_expr(subj, env);
            let (fresh, inner) = bind(env, anchor, counter);
            Formula::CodeEval { subj, anchor: fresh, body: Box::new(canon(body, &inner, counter)) }
        }
    }
}

fn canon_expr(e: &crate::logic::Expr, env: &Vec<(String, String)>) -> crate::logic::Expr {
    use crate::logic::Expr;
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(x) => {
            let renamed = env.iter().rev().find(|(from, _)| from == x).map(|(_, to)| to.clone());
            Expr::Var(renamed.unwrap_or_else(|| x.clone()))
        }
        Expr::Op(op, args) => {
            Expr::Op(*op, args.iter().map(|a| canon_expr(a, env)).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::syntax::Type;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn taut_basics() {
        assert!(taut_entails(&f("x == 1"), &f("x == 1")));
        assert!(taut_entails(&f("x == 1 /\\ y == 2"), &f("y == 2 /\\ x == 1")));
        assert!(taut_entails(&f("F"), &f("x == 1")));
        assert!(!taut_entails(&f("T"), &f("x == 1")));
        assert!(!taut_entails(&f("x == 1"), &f("1 == x")));
        assert!(taut_entails(&f("x == 1 \\/ x == 1"), &f("x == 1")));
        assert!(taut_entails(&f("(a == 1 => b == 2) /\\ a == 1"), &f("b == 2")));
    }

    #[test]
    fn taut_identifies_alpha_variant_atoms() {
        assert!(taut_entails(&f("forall x:Int. x == x"), &f("forall y:Int. y == y")));
        assert!(!taut_entails(&f("forall x:Int. x == z"), &f("forall y:Int. y == w")));
    }

    #[test]
    fn empty_chain_needs_alpha_equal_sides() {
        let ctx = TypingCtx::new().bind("x", Type::Int);
        let ok = Entailment {
            hypothesis: f("x == 1"),
            conclusion: f("x == 1"),
            discharge: Discharge::AxiomChain(vec![]),
        };
        let cfg = BoundedConfig::default();
        assert_eq!(discharge_entailment(&ctx, &ok, &cfg).unwrap(), DischargeResult::Proved);

        let bad = Entailment {
            hypothesis: f("x == 1"),
            conclusion: f("1 == x"),
            discharge: Discharge::AxiomChain(vec![]),
        };
        assert!(matches!(
            discharge_entailment(&ctx, &bad, &cfg),
            Err(EntailError::ChainIncomplete)
        ));
    }

    #[test]
    fn taut_step_moves_the_cursor() {
        let ctx = TypingCtx::new().bind("x", Type::Int).bind("y", Type::Int);
        let ent = Entailment {
            hypothesis: f("x == 1 /\\ y == 2"),
            conclusion: f("y == 2"),
            discharge: Discharge::AxiomChain(vec![ChainStep::Taut { to: f("y == 2") }]),
        };
        let cfg = BoundedConfig::default();
        assert_eq!(discharge_entailment(&ctx, &ent, &cfg).unwrap(), DischargeResult::Proved);
    }

    #[test]
    fn term_axiom_chain_discharges_convergence() {
        let ctx = TypingCtx::new().bind("x", Type::Int);
        let mut bindings = Bindings::new();
        bindings.insert(
            "e".to_string(),
            super::super::axioms::BindingValue::Expr(crate::logic::Expr::var("x")),
        );
        let ent = Entailment {
            hypothesis: f("x == 3"),
            conclusion: f("x == 3 /\\ conv(x)"),
            discharge: Discharge::AxiomChain(vec![
                ChainStep::Axiom { name: "term".to_string(), bindings },
                ChainStep::Taut { to: f("x == 3 /\\ conv(x)") },
            ]),
        };
        let cfg = BoundedConfig::default();
        assert_eq!(discharge_entailment(&ctx, &ent, &cfg).unwrap(), DischargeResult::Proved);
    }

    #[test]
    fn bounded_accepts_valid_and_refutes_false() {
        let cfg = BoundedConfig::default();
        let ctx = TypingCtx::new();
        let ok = Entailment {
            hypothesis: Formula::TrueF,
            conclusion: Formula::TrueF,
            discharge: Discharge::Bounded { models: 200, seed: 42 },
        };
        assert!(matches!(
            discharge_entailment(&ctx, &ok, &cfg).unwrap(),
            DischargeResult::BoundedOk { .. }
        ));

        let bad = Entailment {
            hypothesis: Formula::TrueF,
            conclusion: Formula::FalseF,
            discharge: Discharge::Bounded { models: 200, seed: 42 },
        };
        assert!(matches!(
            discharge_entailment(&ctx, &bad, &cfg),
            Err(EntailError::Countermodel { index: 0, .. })
        ));
    }

    #[test]
    fn bounded_finds_arithmetic_countermodel() {
        let cfg = BoundedConfig::default();
        let ctx = TypingCtx::new().bind("x", Type::Int);
        let bad = Entailment {
            hypothesis: Formula::TrueF,
            conclusion: f("x == 0"),
            discharge: Discharge::Bounded { models: 200, seed: 42 },
        };
        assert!(matches!(discharge_entailment(&ctx, &bad, &cfg), Err(EntailError::Countermodel { .. })));

        let ok = Entailment {
            hypothesis: f("x == 1"),
            conclusion: f("(0 <= x) == true"),
            discharge: Discharge::Bounded { models: 200, seed: 42 },
        };
        assert!(matches!(
            discharge_entailment(&ctx, &ok, &cfg).unwrap(),
            DischargeResult::BoundedOk { .. }
        ));
    }

    #[test]
    fn assumed_is_recorded_not_proved() {
        let ctx = TypingCtx::new();
        let ent = Entailment {
            hypothesis: Formula::TrueF,
            conclusion: Formula::FalseF,
            discharge: Discharge::Assumed("oracle".to_string()),
        };
        let cfg = BoundedConfig::default();
        assert_eq!(
            discharge_entailment(&ctx, &ent, &cfg).unwrap(),
            DischargeResult::Assumed("oracle".to_string())
        );
    }
}
