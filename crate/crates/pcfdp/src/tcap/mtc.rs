//! Empirical agreement check between a synthesized precondition and
//! the evaluator: a closed program should converge exactly when its
//! precondition holds in the empty model.

use crate::semantics::{eval_cyclic, sat, BoundedConfig, Model, Run};
use crate::syntax::Term;
use crate::tcap::{simplify, TcapResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtcOutcome {
    /// Both sides are decisive and agree.
    Consistent,
    /// At least one side could not decide within bounds.
    Inconclusive,
    /// Both sides are decisive and disagree.
    Violation,
}

#[derive(Debug, Clone)]
pub struct MtcReport {
    pub outcome: MtcOutcome,
    pub evaluation: String,
    pub pre_verdict: String,
}

/// Compare fueled evaluation of a closed program with the bounded
/// verdict of its (simplified) precondition in the empty model.
pub fn check_mtc(m: &Term, result: &TcapResult, cfg: &BoundedConfig) -> MtcReport {
    let run = eval_cyclic(m, cfg.fuel);
    let pre = simplify(&result.pre, cfg);
    let v = sat(&Model::empty(), &pre, cfg);
    let outcome = match &run {
        Run::Value(_) if v.is_clear_true() => MtcOutcome::Consistent,
        Run::Value(_) if v.is_clear_false() => MtcOutcome::Violation,
        _ if run.proves_no_value() && v.is_clear_false() => MtcOutcome::Consistent,
        _ if run.proves_no_value() && v.is_clear_true() => MtcOutcome::Violation,
        _ => MtcOutcome::Inconclusive,
    };
    MtcReport { outcome, evaluation: run.describe(), pre_verdict: v.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, TypingCtx};
    use crate::tcap::tcap_infer;

    fn report(src: &str) -> MtcReport {
        let m = parse_term(src).unwrap();
        let r = tcap_infer(&TypingCtx::new(), &m, "u").unwrap();
        check_mtc(&m, &r, &BoundedConfig::default())
    }

    #[test]
    fn constant_agrees() {
        let r = report("5");
        assert_eq!(r.outcome, MtcOutcome::Consistent);
        assert!(r.evaluation.starts_with("value"));
    }

    #[test]
    fn diverging_program_agrees() {
        let r = report("(mu g:Unit -> Unit. \\x:Unit. g x) ()");
        assert_eq!(r.outcome, MtcOutcome::Consistent);
        assert!(r.evaluation.starts_with("diverges"));
    }

    #[test]
    fn splice_of_diverging_content_agrees() {
        let r = report("let [| x |] = [| (mu g:Unit -> Unit. \\y:Unit. g y) () |] in x");
        assert_eq!(r.outcome, MtcOutcome::Consistent);
    }

    #[test]
    fn staged_sum_agrees() {
        let r = report("let [| x |] = [| 2 + 3 |] in x + 1");
        assert_eq!(r.outcome, MtcOutcome::Consistent);
    }
}
