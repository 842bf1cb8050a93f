use crate::eval::{apply_op, path_to_string, step, Path, StepResult};
use crate::logic::Expr;
use crate::syntax::{free_vars, substitute, Lit, Term};

use super::model::Model;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("variable `{0}` is not interpreted by the model")]
    UnboundVariable(String),
}

/// Close an open term by substituting every free variable with its model
/// interpretation. Model entries are closed, so capture cannot occur.
pub fn close_term(m: &Term, eta: &Model) -> Result<Term, SemanticsError> {
    let mut out = m.clone();
    for x in free_vars(m) {
        let t = eta.lookup(&x).ok_or(SemanticsError::UnboundVariable(x.clone()))?;
        out = substitute(&out, &x, t);
    }
    Ok(out)
}

/// Interpret an assertion expression as a closed term: constants stand
/// for themselves, variables for their model entries, and operators are
/// folded when all arguments are literals, kept symbolic otherwise (a
/// modal argument may be an arbitrary program).
pub fn eval_expr(e: &Expr, eta: &Model) -> Result<Term, SemanticsError> {
    match e {
        Expr::Const(l) => Ok(Term::Const(l.clone())),
        Expr::Var(x) => eta
            .lookup(x)
            .cloned()
            .ok_or_else(|| SemanticsError::UnboundVariable(x.clone())),
        Expr::Op(op, args) => {
            let args = args
                .iter()
                .map(|a| eval_expr(a, eta))
                .collect::<Result<Vec<_>, _>>()?;
            let lits: Option<Vec<&Lit>> = args
                .iter()
                .map(|t| match t {
                    Term::Const(l) => Some(l),
                    _ => None,
                })
                .collect();
            if let Some(folded) = lits.and_then(|ls| apply_op(*op, &ls)) {
                return Ok(Term::Const(folded));
            }
            Ok(Term::Op(*op, args))
        }
    }
}

/// Result of running a closed term with cycle detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Run {
    Value(Term),
    /// The exact same term recurred; with deterministic reduction this
    /// proves divergence.
    Diverges { steps: u64 },
    Exhausted { last: Term },
    Stuck { term: Term, at: Path },
}

impl Run {
    /// Whether this outcome proves the term never reduces to a value.
    pub fn proves_no_value(&self) -> bool {
        matches!(self, Run::Diverges { .. } | Run::Stuck { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            Run::Value(v) => format!("value {}", v),
            Run::Diverges { steps } => format!("diverges (state recurs within {} steps)", steps),
            Run::Exhausted { .. } => "fuel exhausted".to_string(),
            Run::Stuck { at, .. } => format!("stuck at {}", path_to_string(at)),
        }
    }
}

/// Evaluate with Brent's cycle detection layered over the deterministic
/// step function. A repeated state is a proof of divergence; fuel
/// exhaustion proves nothing.
pub fn eval_cyclic(m: &Term, fuel: u64) -> Run {
    let mut tortoise = m.clone();
    let mut hare = m.clone();
    let mut power: u64 = 1;
    let mut lam: u64 = 0;
    let mut steps: u64 = 0;
    loop {
        match step(&hare) {
            StepResult::Value => return Run::Value(hare),
            StepResult::Stuck { at } => return Run::Stuck { term: hare, at },
            StepResult::Stepped { term, .. } => {
                hare = term;
                steps += 1;
                lam += 1;
            }
        }
        if hare == tortoise {
            return Run::Diverges { steps };
        }
        if steps >= fuel {
            return Run::Exhausted { last: hare };
        }
        if lam == power {
            tortoise = hare.clone();
            power = power.saturating_mul(2);
            lam = 0;
        }
    }
}
