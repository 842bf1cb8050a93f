//! Call-by-value small-step evaluator.
//!
//! Reduction picks the leftmost redex outside quotations: function position
//! before argument, operator arguments left to right, the condition of an
//! `if`, and the right-hand side of an unquote. Quotation bodies are never
//! reduced.

use crate::syntax::{substitute, Lit, OpKind, Term};

/// One segment of a path from the root to a subterm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSeg {
    AppFn,
    AppArg,
    OpArg(usize),
    IfCond,
    UnquoteRhs,
}

pub type Path = Vec<PathSeg>;

pub fn path_to_string(path: &[PathSeg]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    path.iter()
        .map(|seg| match seg {
            PathSeg::AppFn => "fn".to_string(),
            PathSeg::AppArg => "arg".to_string(),
            PathSeg::OpArg(i) => format!("op{}", i),
            PathSeg::IfCond => "cond".to_string(),
            PathSeg::UnquoteRhs => "rhs".to_string(),
        })
        .collect::<Vec<_>>()
        .join(".")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    /// The term was not a value and one reduction fired at `redex_at`.
    Stepped { term: Term, redex_at: Path },
    /// The term is a value; nothing to do.
    Value,
    /// A redex position was found but no rule applies there.
    Stuck { at: Path },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Term),
    FuelExhausted { last: Term, steps: u64 },
    Stuck { term: Term, at: Path },
}

impl Outcome {
    pub fn value(&self) -> Option<&Term> {
        match self {
            Outcome::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// Perform one reduction step, if any.
pub fn step(m: &Term) -> StepResult {
    if m.is_value() {
        return StepResult::Value;
    }
    let mut path = Vec::new();
    match step_in(m, &mut path) {
        Some(term) => StepResult::Stepped { term, redex_at: path },
        None => StepResult::Stuck { at: path },
    }
}

/// Reduce at the leftmost redex, recording the path taken. `None` means
/// stuck; `path` then points at the offending position.
fn step_in(m: &Term, path: &mut Path) -> Option<Term> {
    match m {
        Term::App(f, a) => {
            if !f.is_value() {
                path.push(PathSeg::AppFn);
                let f2 = step_in(f, path)?;
                return Some(Term::App(Box::new(f2), a.clone()));
            }
            if !a.is_value() {
                path.push(PathSeg::AppArg);
                let a2 = step_in(a, path)?;
                return Some(Term::App(f.clone(), Box::new(a2)));
            }
            match &**f {
                Term::Abs(x, _, body) => Some(substitute(body, x, a)),
                Term::Rec(g, _, body) => match &**body {
                    Term::Abs(x, _, inner) => {
                        // unfold the recursion only at application time; skip
                        // the g-substitution when the lambda binder shadows it
                        let unfolded = if g == x {
                            (**inner).clone()
                        } else {
                            substitute(inner, g, f)
                        };
                        Some(substitute(&unfolded, x, a))
                    }
                    _ => None,
                },
                _ => None,
            }
        }
        Term::Op(op, args) => {
            if let Some(i) = args.iter().position(|a| !a.is_value()) {
                path.push(PathSeg::OpArg(i));
                let ai = step_in(&args[i], path)?;
                let mut args2 = args.clone();
                args2[i] = ai;
                return Some(Term::Op(*op, args2));
            }
            let lits: Option<Vec<&Lit>> = args
                .iter()
                .map(|a| match a {
                    Term::Const(l) => Some(l),
                    _ => None,
                })
                .collect();
            apply_op(*op, &lits?).map(Term::Const)
        }
        Term::If(c, t, e) => {
            if !c.is_value() {
                path.push(PathSeg::IfCond);
                let c2 = step_in(c, path)?;
                return Some(Term::If(Box::new(c2), t.clone(), e.clone()));
            }
            match &**c {
                Term::Const(Lit::Bool(true)) => Some((**t).clone()),
                Term::Const(Lit::Bool(false)) => Some((**e).clone()),
                _ => None,
            }
        }
        Term::Unquote(x, rhs, body) => {
            if !rhs.is_value() {
                path.push(PathSeg::UnquoteRhs);
                let r2 = step_in(rhs, path)?;
                return Some(Term::Unquote(x.clone(), Box::new(r2), body.clone()));
            }
            match &**rhs {
                Term::Quote(contents) => Some(substitute(body, x, contents)),
                _ => None,
            }
        }
        // values are filtered out by the caller
        _ => None,
    }
}

/// Literal-level operator semantics, shared with assertion-side evaluation.
pub(crate) fn apply_op(op: OpKind, args: &[&Lit]) -> Option<Lit> {
    let int = |l: &Lit| match l {
        Lit::Int(n) => Some(n.clone()),
        _ => None,
    };
    let boolean = |l: &Lit| match l {
        Lit::Bool(b) => Some(*b),
        _ => None,
    };
    match op {
        OpKind::Add => Some(Lit::Int(int(args[0])? + int(args[1])?)),
        OpKind::Sub => Some(Lit::Int(int(args[0])? - int(args[1])?)),
        OpKind::Mul => Some(Lit::Int(int(args[0])? * int(args[1])?)),
        OpKind::Le => Some(Lit::Bool(int(args[0])? <= int(args[1])?)),
        OpKind::Eq => match (args[0], args[1]) {
            (Lit::Int(a), Lit::Int(b)) => Some(Lit::Bool(a == b)),
            (Lit::Bool(a), Lit::Bool(b)) => Some(Lit::Bool(a == b)),
            (Lit::Unit, Lit::Unit) => Some(Lit::Bool(true)),
            _ => None,
        },
        OpKind::And => Some(Lit::Bool(boolean(args[0])? && boolean(args[1])?)),
        OpKind::Or => Some(Lit::Bool(boolean(args[0])? || boolean(args[1])?)),
        OpKind::Not => Some(Lit::Bool(!boolean(args[0])?)),
    }
}

/// Run `m` for at most `fuel` steps.
pub fn evaluate(m: &Term, fuel: u64) -> Outcome {
    let mut cur = m.clone();
    let mut steps = 0u64;
    loop {
        match step(&cur) {
            StepResult::Value => return Outcome::Value(cur),
            StepResult::Stuck { at } => return Outcome::Stuck { term: cur, at },
            StepResult::Stepped { term, redex_at: _ } => {
                steps += 1;
                cur = term;
                if steps >= fuel {
                    if cur.is_value() {
                        return Outcome::Value(cur);
                    }
                    return Outcome::FuelExhausted { last: cur, steps };
                }
            }
        }
    }
}

/// Like `evaluate`, but records every intermediate term, starting with `m`.
pub fn trace(m: &Term, fuel: u64) -> (Vec<Term>, Outcome) {
    let mut states = vec![m.clone()];
    let mut cur = m.clone();
    let mut steps = 0u64;
    loop {
        match step(&cur) {
            StepResult::Value => return (states, Outcome::Value(cur)),
            StepResult::Stuck { at } => return (states, Outcome::Stuck { term: cur, at }),
            StepResult::Stepped { term, redex_at: _ } => {
                steps += 1;
                cur = term;
                states.push(cur.clone());
                if steps >= fuel {
                    if cur.is_value() {
                        return (states, Outcome::Value(cur));
                    }
                    return (states, Outcome::FuelExhausted { last: cur, steps });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse_term};

    fn run(src: &str) -> Outcome {
        evaluate(&parse_term(src).unwrap(), 10_000)
    }

    fn run_value(src: &str) -> Term {
        match run(src) {
            Outcome::Value(v) => v,
            other => panic!("expected value, got {:?}", other),
        }
    }

    const LIFT: &str = "mu g:Int -> [| Int |]. \\n:Int. \
         if n <= 0 then [| 0 |] else let [|x|] = g (n - 1) in [| x + 1 |]";

    const POWER: &str = "mu p:Int -> [| Int -> Int |]. \\n:Int. \
         if n <= 0 then [| \\x:Int. 1 |] \
         else let [|q|] = p (n - 1) in [| \\x:Int. x * (q x) |]";

    const RUN_CODE: &str = "\\x:[| Int |]. let [|y|] = x in y";

    #[test]
    fn lift_three_builds_a_sum() {
        let v = run_value(&format!("({}) 3", LIFT));
        assert_eq!(v, parse_term("[| 0 + 1 + 1 + 1 |]").unwrap());
    }

    #[test]
    fn run_code_adds() {
        let v = run_value(&format!("({}) [| 17 + 3 |]", RUN_CODE));
        assert_eq!(v, parse_term("20").unwrap());
    }

    #[test]
    fn power_two_unrolls() {
        let v = run_value(&format!("({}) 2", POWER));
        // every binder keeps its source name; the substituted code is closed
        let expect =
            parse_term("[| \\x:Int. x * ((\\x:Int. x * ((\\x:Int. 1) x)) x) |]").unwrap();
        assert_eq!(v, expect);
        let named =
            parse_term("[| \\a:Int. a * ((\\b:Int. b * ((\\c:Int. 1) b)) a) |]").unwrap();
        assert!(alpha_eq(&v, &named));
    }

    #[test]
    fn quote_bodies_never_reduce() {
        let m = parse_term("[| (\\x:Int. x) 1 |]").unwrap();
        assert_eq!(step(&m), StepResult::Value);
        assert_eq!(evaluate(&m, 100), Outcome::Value(m));
    }

    #[test]
    fn splice_copies_code_unevaluated() {
        let v = run_value("let [|x|] = [| 1 + 2 |] in [| x + x |]");
        assert_eq!(v, parse_term("[| (1 + 2) + (1 + 2) |]").unwrap());
    }

    #[test]
    fn arithmetic_and_branching() {
        assert_eq!(run_value("2 + 3 * 4"), parse_term("14").unwrap());
        assert_eq!(run_value("if 2 <= 1 then 5 else 6"), parse_term("6").unwrap());
        assert_eq!(run_value("not (1 == 2) /\\ true"), parse_term("true").unwrap());
        assert_eq!(run_value("1 - 2"), parse_term("-1").unwrap());
    }

    #[test]
    fn leftmost_operand_reduces_first() {
        let m = parse_term("(1 + 2) + (3 + 4)").unwrap();
        match step(&m) {
            StepResult::Stepped { term, redex_at } => {
                assert_eq!(term, parse_term("3 + (3 + 4)").unwrap());
                assert_eq!(redex_at, vec![PathSeg::OpArg(0)]);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn function_position_before_argument() {
        let m = parse_term("((\\x:Int. x) (\\y:Int. y)) (1 + 1)").unwrap();
        match step(&m) {
            StepResult::Stepped { redex_at, .. } => {
                assert_eq!(redex_at, vec![PathSeg::AppFn]);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn nonterminating_loop_exhausts_fuel() {
        let omega = "(mu g:Unit -> Unit. \\x:Unit. g x) ()";
        match run(omega) {
            Outcome::FuelExhausted { steps, .. } => assert_eq!(steps, 10_000),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn applying_a_number_is_stuck() {
        match run("1 2") {
            Outcome::Stuck { at, .. } => assert_eq!(path_to_string(&at), "root"),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn splicing_a_non_quote_is_stuck() {
        let m = parse_term("let [|x|] = (\\y:Int. y) in x").unwrap();
        assert!(matches!(step(&m), StepResult::Stuck { .. }));
    }

    #[test]
    fn trace_records_each_state() {
        let (states, out) = trace(&parse_term("(\\x:Int. x + 1) 4").unwrap(), 10);
        assert_eq!(states.len(), 3);
        assert_eq!(states[1], parse_term("4 + 1").unwrap());
        assert_eq!(out, Outcome::Value(parse_term("5").unwrap()));
    }

    #[test]
    fn recursion_unfolds_once_per_call() {
        let double = "mu d:Int -> Int. \\n:Int. if n <= 0 then 0 else 2 + d (n - 1)";
        assert_eq!(run_value(&format!("({}) 3", double)), parse_term("6").unwrap());
    }

    #[test]
    fn big_integers_do_not_overflow() {
        let v = run_value("1000000000000 * 1000000000000");
        assert_eq!(v, parse_term("1000000000000000000000000").unwrap());
    }
}
