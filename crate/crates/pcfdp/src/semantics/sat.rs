use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::logic::{Formula, Judgement};
use crate::syntax::{Term, Type, TypingCtx};

use super::closure::{close_term, eval_cyclic, eval_expr, Run};
use super::model::{BoundedConfig, Model};
use super::obs::obs_approx_eq;
use super::pools::{modal_pool, value_pool};
use super::verdict::Verdict;

/// Does the model satisfy the formula? Quantifiers over integers, functions,
/// code, and modal programs enumerate truncated domains, so a True that
/// depended on such a domain carries the bounded flag; a clear False is
/// always backed by a concrete witness or a proved divergence.
pub fn sat(eta: &Model, a: &Formula, cfg: &BoundedConfig) -> Verdict {
    match a {
        Formula::TrueF => Verdict::TRUE,
        Formula::FalseF => Verdict::FALSE,
        Formula::Eq(l, r) => match (eval_expr(l, eta), eval_expr(r, eta)) {
            (Ok(lt), Ok(rt)) => obs_approx_eq(&lt, &rt, cfg),
            _ => Verdict::unknown(),
        },
        Formula::Not(b) => sat(eta, b, cfg).negate(),
        Formula::And(l, r) => sat(eta, l, cfg).and(sat(eta, r, cfg)),
        Formula::Or(l, r) => sat(eta, l, cfg).or(sat(eta, r, cfg)),
        Formula::Implies(l, r) => sat(eta, l, cfg).implies(sat(eta, r, cfg)),
        Formula::Forall(x, ty, body) => quantify(eta, x, ty, body, cfg, false, true),
        Formula::Exists(x, ty, body) => quantify(eta, x, ty, body, cfg, false, false),
        Formula::ForallModal(x, ty, body) => quantify(eta, x, ty, body, cfg, true, true),
        Formula::ExistsModal(x, ty, body) => quantify(eta, x, ty, body, cfg, true, false),
        Formula::OneEval { subj, arg, anchor, body } => {
            let (f, v) = match (eval_expr(subj, eta), eval_expr(arg, eta)) {
                (Ok(f), Ok(v)) => (f, v),
                _ => return Verdict::unknown(),
            };
            match eval_cyclic(&Term::app(f, v), cfg.fuel) {
                Run::Value(w) => sat(&eta.bind_value(anchor, w), body, cfg),
                r if r.proves_no_value() => Verdict::FALSE,
                _ => Verdict::unknown(),
            }
        }
        Formula::CodeEval { subj, anchor, body } => {
            let u = match eval_expr(subj, eta) {
                Ok(u) => u,
                Err(_) => return Verdict::unknown(),
            };
            match eval_cyclic(&u, cfg.fuel) {
                Run::Value(Term::Quote(m)) => match eval_cyclic(&m, cfg.fuel) {
                    Run::Value(w) => sat(&eta.bind_program(anchor, w), body, cfg),
                    r if r.proves_no_value() => Verdict::FALSE,
                    _ => Verdict::unknown(),
                },
                Run::Value(_) => Verdict::unknown(),
                r if r.proves_no_value() => Verdict::FALSE,
                _ => Verdict::unknown(),
            }
        }
        Formula::Conv(e) => match eval_expr(e, eta) {
            Ok(t) => match eval_cyclic(&t, cfg.fuel) {
                Run::Value(_) => Verdict::TRUE,
                r if r.proves_no_value() => Verdict::FALSE,
                _ => Verdict::unknown(),
            },
            Err(_) => Verdict::unknown(),
        },
    }
}

fn quantify(
    eta: &Model,
    x: &str,
    ty: &Type,
    body: &Formula,
    cfg: &BoundedConfig,
    modal: bool,
    universal: bool,
) -> Verdict {
    let (domain, complete) = if modal {
        (modal_pool(ty, cfg), false)
    } else {
        (value_pool(ty, cfg), matches!(ty, Type::Bool | Type::Unit))
    };
    let verdicts = domain.into_iter().map(|t| {
        let inner = if modal { eta.bind_program(x, t) } else { eta.bind_value(x, t) };
        sat(&inner, body, cfg)
    });
    let v = if universal { conj_all(verdicts) } else { disj_all(verdicts) };
    if complete {
        v
    } else if universal && v.is_true() {
        v.mark_bounded()
    } else if !universal && v.is_false() {
        v.mark_bounded()
    } else {
        v
    }
}

/// N-ary conjunction that prefers a clear refutation over a bounded one,
/// regardless of operand order.
fn conj_all(vs: impl Iterator<Item = Verdict>) -> Verdict {
    let mut acc = Verdict::TRUE;
    let mut refuted: Option<Verdict> = None;
    for v in vs {
        if v.is_clear_false() {
            return v;
        }
        if v.is_false() {
            refuted.get_or_insert(v);
        }
        acc = acc.and(v);
    }
    refuted.unwrap_or(acc)
}

fn disj_all(vs: impl Iterator<Item = Verdict>) -> Verdict {
    conj_all(vs.map(Verdict::negate)).negate()
}

/// Per-model outcome of checking a total-correctness judgement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelCheck {
    /// Precondition held and the program reached a value satisfying the post.
    Holds,
    /// Precondition refuted; nothing to check.
    Vacuous,
    /// Precondition clearly held yet the program diverged, got stuck, or the
    /// post was clearly refuted.
    Counterexample { reason: String },
    /// Some verdict along the way was bounded or unknown.
    Inconclusive { reason: String },
}

#[derive(Debug, Clone)]
pub struct JudgementReport {
    pub outcomes: Vec<(Model, ModelCheck)>,
    pub holds: usize,
    pub vacuous: usize,
    pub counterexamples: usize,
    pub inconclusive: usize,
}

impl JudgementReport {
    pub fn counterexample_models(&self) -> Vec<&Model> {
        self.outcomes
            .iter()
            .filter(|(_, c)| matches!(c, ModelCheck::Counterexample { .. }))
            .map(|(m, _)| m)
            .collect()
    }

    pub fn no_counterexample(&self) -> bool {
        self.counterexamples == 0
    }

    /// Every model was decided: held or was vacuous.
    pub fn decisive(&self) -> bool {
        self.counterexamples == 0 && self.inconclusive == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} models: {} hold, {} vacuous, {} counterexamples, {} inconclusive",
            self.outcomes.len(),
            self.holds,
            self.vacuous,
            self.counterexamples,
            self.inconclusive
        )
    }
}

/// Check a judgement against each model: wherever the precondition holds,
/// the program must reach a value and the value must satisfy the post.
pub fn sat_judgement(models: &[Model], j: &Judgement, cfg: &BoundedConfig) -> JudgementReport {
    let mut report = JudgementReport {
        outcomes: Vec::new(),
        holds: 0,
        vacuous: 0,
        counterexamples: 0,
        inconclusive: 0,
    };
    for eta in models {
        let check = check_one(eta, j, cfg);
        match &check {
            ModelCheck::Holds => report.holds += 1,
            ModelCheck::Vacuous => report.vacuous += 1,
            ModelCheck::Counterexample { .. } => report.counterexamples += 1,
            ModelCheck::Inconclusive { .. } => report.inconclusive += 1,
        }
        report.outcomes.push((eta.clone(), check));
    }
    report
}

fn check_one(eta: &Model, j: &Judgement, cfg: &BoundedConfig) -> ModelCheck {
    let pre = sat(eta, &j.pre, cfg);
    if pre.is_false() {
        return ModelCheck::Vacuous;
    }
    if !pre.is_true() {
        return ModelCheck::Inconclusive { reason: "precondition undecided".into() };
    }
    // A bounded-True precondition might really be false, so failures under
    // it cannot count as counterexamples.
    let certain = pre.is_clear_true();
    let program = match close_term(&j.term, eta) {
        Ok(p) => p,
        Err(e) => return ModelCheck::Inconclusive { reason: e.to_string() },
    };
    match eval_cyclic(&program, cfg.fuel) {
        Run::Value(v) => {
            let post = sat(&eta.bind_value(&j.anchor, v), &j.post, cfg);
            if post.is_true() {
                ModelCheck::Holds
            } else if post.is_clear_false() && certain {
                ModelCheck::Counterexample { reason: "postcondition refuted".into() }
            } else {
                ModelCheck::Inconclusive {
                    reason: format!("postcondition verdict: {}", post),
                }
            }
        }
        Run::Exhausted { .. } => {
            ModelCheck::Inconclusive { reason: "fuel exhausted".into() }
        }
        r => {
            if certain {
                ModelCheck::Counterexample {
                    reason: format!("program produced no value: {}", r.describe()),
                }
            } else {
                ModelCheck::Inconclusive { reason: r.describe() }
            }
        }
    }
}

/// Deterministic model suites for a typing context. Enumerates the full
/// cartesian product of per-variable pools when it fits in `max_models`,
/// otherwise samples that many distinct combinations with the seeded RNG.
pub fn gen_models(
    ctx: &TypingCtx,
    cfg: &BoundedConfig,
    seed: u64,
    max_models: usize,
) -> Vec<Model> {
    let mut slots: Vec<(String, bool, Vec<Term>)> = Vec::new();
    for (name, ty) in ctx.gamma() {
        slots.push((name.clone(), false, value_pool(ty, cfg)));
    }
    for (name, ty) in ctx.delta() {
        slots.push((name.clone(), true, modal_pool(ty, cfg)));
    }
    let total = slots
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.2.len().max(1)));
    let tuples: Vec<Vec<usize>> = match total {
        Some(t) if t <= max_models.max(1) => enumerate_tuples(&slots),
        _ => sample_tuples(&slots, seed, max_models.max(1)),
    };
    tuples.into_iter().map(|idx| model_of(&slots, &idx)).collect()
}

fn enumerate_tuples(slots: &[(String, bool, Vec<Term>)]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (_, _, pool) in slots {
        let mut next = Vec::with_capacity(out.len() * pool.len().max(1));
        for prefix in &out {
            for i in 0..pool.len().max(1) {
                let mut t = prefix.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn sample_tuples(
    slots: &[(String, bool, Vec<Term>)],
    seed: u64,
    want: usize,
) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut attempts = 0usize;
    while seen.len() < want && attempts < want.saturating_mul(64) {
        let tuple: Vec<usize> =
            slots.iter().map(|(_, _, pool)| rng.gen_range(0..pool.len().max(1))).collect();
        seen.insert(tuple);
        attempts += 1;
    }
    seen.into_iter().collect()
}

fn model_of(slots: &[(String, bool, Vec<Term>)], idx: &[usize]) -> Model {
    let mut eta = Model::empty();
    for ((name, modal, pool), &i) in slots.iter().zip(idx) {
        if let Some(t) = pool.get(i) {
            eta = if *modal {
                eta.bind_program(name, t.clone())
            } else {
                eta.bind_value(name, t.clone())
            };
        }
    }
    eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::semantics::pools::omega_at;
    use crate::semantics::verdict::Truth;
    use crate::syntax::parse_term;

    fn f(src: &str) -> Formula {
        parse_formula(src).unwrap()
    }

    fn cfg() -> BoundedConfig {
        BoundedConfig::default()
    }

    #[test]
    fn truth_constants() {
        let eta = Model::empty();
        assert!(sat(&eta, &f("T"), &cfg()).is_clear_true());
        assert!(sat(&eta, &f("F"), &cfg()).is_clear_false());
    }

    #[test]
    fn equality_consults_the_model() {
        let eta = Model::empty().bind_value("x", Term::int(3));
        assert!(sat(&eta, &f("x == 3"), &cfg()).is_clear_true());
        assert!(sat(&eta, &f("x == 4"), &cfg()).is_clear_false());
        assert!(sat(&eta, &f("x + 1 == 4"), &cfg()).is_clear_true());
    }

    #[test]
    fn convergence_of_modal_bindings() {
        let diverging = Model::empty().bind_program("x", omega_at(&Type::Int));
        assert!(sat(&diverging, &f("conv(x)"), &cfg()).is_clear_false());
        let settled = Model::empty().bind_program("x", Term::int(3));
        assert!(sat(&settled, &f("conv(x)"), &cfg()).is_clear_true());
    }

    #[test]
    fn complete_boolean_quantifier_stays_clear() {
        let eta = Model::empty();
        let v = sat(&eta, &f("forall b:Bool. b == true \\/ b == false"), &cfg());
        assert!(v.is_clear_true(), "got {}", v);
    }

    #[test]
    fn integer_quantifier_is_bounded_or_witnessed() {
        let eta = Model::empty();
        let all = sat(&eta, &f("forall n:Int. n * 0 == 0"), &cfg());
        assert!(all.is_true() && all.bounded);
        let refuted = sat(&eta, &f("forall n:Int. (0 <= n) == true"), &cfg());
        assert!(refuted.is_clear_false());
    }

    #[test]
    fn existential_witness_is_clear() {
        let eta = Model::empty();
        assert!(sat(&eta, &f("exists n:Int. n + n == 4"), &cfg()).is_clear_true());
        let missed = sat(&eta, &f("exists n:Int. n == 100"), &cfg());
        assert!(missed.is_false() && missed.bounded);
    }

    #[test]
    fn one_eval_requires_convergence_to_the_anchor() {
        let succ = parse_term("\\x:Int. x + 1").unwrap();
        let eta = Model::empty().bind_value("f", succ);
        assert!(sat(&eta, &f("eval f 2 as r. r == 3"), &cfg()).is_clear_true());
        assert!(sat(&eta, &f("eval f 2 as r. r == 5"), &cfg()).is_clear_false());

        let spin = Term::abs("x", Type::Int, omega_at(&Type::Int));
        let eta = Model::empty().bind_value("f", spin);
        assert!(sat(&eta, &f("eval f 2 as r. T"), &cfg()).is_clear_false());
    }

    #[test]
    fn code_eval_runs_the_contents() {
        let eta = Model::empty().bind_value("u", parse_term("[| 1 + 2 |]").unwrap());
        assert!(sat(&eta, &f("unbox u as m. m == 3"), &cfg()).is_clear_true());

        let eta = Model::empty().bind_value("u", Term::quote(omega_at(&Type::Int)));
        let v = sat(&eta, &f("unbox u as m. T"), &cfg());
        assert!(v.is_clear_false(), "got {}", v);
    }

    #[test]
    fn modal_quantifiers_see_divergent_programs() {
        let eta = Model::empty();
        assert!(sat(&eta, &f("forallc m:Int. conv(m)"), &cfg()).is_clear_false());
        assert!(sat(&eta, &f("existsc m:Int. ~conv(m)"), &cfg()).is_clear_true());
    }

    #[test]
    fn value_bindings_move_between_banks_without_changing_verdicts() {
        let formulas = ["x == 3", "x + x == 6", "conv(x)", "exists n:Int. n == x"];
        for src in formulas {
            let by_value = Model::empty().bind_value("x", Term::int(3));
            let by_program = Model::empty().bind_program("x", Term::int(3));
            assert_eq!(
                sat(&by_value, &f(src), &cfg()),
                sat(&by_program, &f(src), &cfg()),
                "verdicts differ for {}",
                src
            );
        }
    }

    #[test]
    fn judgement_holds_on_simple_arithmetic() {
        let j = Judgement {
            pre: f("T"),
            term: parse_term("1 + 2").unwrap(),
            anchor: "r".into(),
            post: f("r == 3"),
        };
        let report = sat_judgement(&[Model::empty()], &j, &cfg());
        assert!(report.decisive() && report.holds == 1);
    }

    #[test]
    fn judgement_on_quoted_divergence_holds_but_running_it_fails() {
        let quoted = Judgement {
            pre: f("T"),
            term: Term::quote(omega_at(&Type::Int)),
            anchor: "m".into(),
            post: f("T"),
        };
        let report = sat_judgement(&[Model::empty()], &quoted, &cfg());
        assert!(report.decisive() && report.holds == 1, "{}", report.summary());

        let run = Judgement {
            pre: f("T"),
            term: omega_at(&Type::Int),
            anchor: "m".into(),
            post: f("T"),
        };
        let report = sat_judgement(&[Model::empty()], &run, &cfg());
        assert_eq!(report.counterexamples, 1, "{}", report.summary());
    }

    #[test]
    fn false_precondition_is_vacuous() {
        let j = Judgement {
            pre: f("F"),
            term: omega_at(&Type::Int),
            anchor: "m".into(),
            post: f("F"),
        };
        let report = sat_judgement(&[Model::empty()], &j, &cfg());
        assert!(report.no_counterexample() && report.vacuous == 1);
    }

    #[test]
    fn empty_context_generates_one_empty_model() {
        let models = gen_models(&TypingCtx::new(), &cfg(), 7, 100);
        assert_eq!(models.len(), 1);
        assert!(models[0].xi().is_empty() && models[0].sigma().is_empty());
    }

    #[test]
    fn single_int_slot_enumerates_the_bound() {
        let config = BoundedConfig { int_bound: 2, ..cfg() };
        let ctx = TypingCtx::from_maps(
            [("x".to_string(), Type::Int)].into(),
            Default::default(),
        )
        .unwrap();
        let models = gen_models(&ctx, &config, 7, 100);
        assert_eq!(models.len(), 5);
        let mut ints: Vec<i64> = models
            .iter()
            .map(|m| match m.lookup("x") {
                Some(Term::Const(crate::syntax::Lit::Int(n))) => {
                    i64::try_from(n.clone()).unwrap()
                }
                other => panic!("unexpected binding {:?}", other),
            })
            .collect();
        ints.sort();
        assert_eq!(ints, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn modal_slot_includes_a_divergent_program() {
        let ctx = TypingCtx::from_maps(
            Default::default(),
            [("m".to_string(), Type::Int)].into(),
        )
        .unwrap();
        let models = gen_models(&ctx, &cfg(), 7, 100);
        let divergent = models
            .iter()
            .filter(|m| {
                matches!(
                    eval_cyclic(m.lookup("m").unwrap(), 1000),
                    Run::Diverges { .. }
                )
            })
            .count();
        assert!(divergent >= 1);
    }

    #[test]
    fn oversized_products_are_sampled_deterministically() {
        let gamma: std::collections::BTreeMap<String, Type> =
            [("a", "Int"), ("b", "Int"), ("c", "Int")]
                .into_iter()
                .map(|(n, _)| (n.to_string(), Type::Int))
                .collect();
        let ctx = TypingCtx::from_maps(gamma, Default::default()).unwrap();
        let a = gen_models(&ctx, &cfg(), 42, 50);
        let b = gen_models(&ctx, &cfg(), 42, 50);
        assert_eq!(a.len(), 50);
        let render = |ms: &[Model]| ms.iter().map(|m| m.to_string()).collect::<Vec<_>>();
        assert_eq!(render(&a), render(&b));
        let c = gen_models(&ctx, &cfg(), 43, 50);
        assert_ne!(render(&a), render(&c));
    }

    #[test]
    fn unknown_is_never_forced_into_a_decision() {
        let tight = BoundedConfig { fuel: 200, ..cfg() };
        let slow = parse_term(
            "(mu f:Int -> Int. \\n:Int. if n <= 0 then 0 else f (n - 1)) 400",
        )
        .unwrap();
        let eta = Model::empty().bind_program("x", slow);
        let v = sat(&eta, &f("conv(x)"), &tight);
        assert_eq!(v.truth, Truth::Unknown);
    }
}
