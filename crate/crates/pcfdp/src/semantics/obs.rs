use crate::syntax::{alpha_eq, typecheck_term, Term, Type, TypingCtx};

use super::closure::{eval_cyclic, Run};
use super::model::BoundedConfig;
use super::pools::arg_samples;
use super::verdict::Verdict;

/// Approximate observational comparison of two closed programs of the same
/// type. A clear `False` is always backed by a distinguishing observation;
/// `True` at function type is marked bounded because only sampled arguments
/// were probed.
pub fn obs_approx_eq(m: &Term, n: &Term, cfg: &BoundedConfig) -> Verdict {
    if alpha_eq(m, n) {
        return Verdict::TRUE;
    }
    let ty = match typecheck_term(&TypingCtx::new(), m) {
        Ok(t) => t,
        Err(_) => return Verdict::unknown(),
    };
    compare_at(&ty, m, n, cfg)
}

fn compare_at(ty: &Type, m: &Term, n: &Term, cfg: &BoundedConfig) -> Verdict {
    match ty {
        Type::Int | Type::Bool | Type::Unit => {
            compare_runs(eval_cyclic(m, cfg.fuel), eval_cyclic(n, cfg.fuel), |a, b| {
                if a == b {
                    Verdict::TRUE
                } else {
                    Verdict::FALSE
                }
            })
        }
        Type::Code(inner) => {
            compare_runs(eval_cyclic(m, cfg.fuel), eval_cyclic(n, cfg.fuel), |a, b| {
                match (a, b) {
                    (Term::Quote(p), Term::Quote(q)) => compare_at(inner, p, q, cfg),
                    _ => Verdict::unknown(),
                }
            })
        }
        Type::Arrow(dom, _) => {
            let mut acc = Verdict::TRUE;
            for arg in arg_samples(dom, cfg) {
                let left = Term::app(m.clone(), arg.clone());
                let right = Term::app(n.clone(), arg);
                acc = acc.and(obs_approx_eq(&left, &right, cfg));
                if acc.is_clear_false() {
                    return acc;
                }
            }
            if acc.is_true() {
                acc.mark_bounded()
            } else {
                acc
            }
        }
    }
}

/// Joint case analysis on two evaluation outcomes. Proved divergence on both
/// sides makes the programs indistinguishable; proved divergence against a
/// value distinguishes them; fuel exhaustion is inconclusive.
fn compare_runs(a: Run, b: Run, on_values: impl FnOnce(&Term, &Term) -> Verdict) -> Verdict {
    match (&a, &b) {
        (Run::Value(v), Run::Value(w)) => on_values(v, w),
        _ => {
            if a.proves_no_value() && b.proves_no_value() {
                Verdict::TRUE
            } else if (a.proves_no_value() && matches!(b, Run::Value(_)))
                || (b.proves_no_value() && matches!(a, Run::Value(_)))
            {
                Verdict::FALSE
            } else {
                Verdict::unknown()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::pools::omega_at;
    use crate::syntax::parse_term;

    fn cmp(a: &str, b: &str) -> Verdict {
        let cfg = BoundedConfig::default();
        obs_approx_eq(&parse_term(a).unwrap(), &parse_term(b).unwrap(), &cfg)
    }

    #[test]
    fn identical_values_compare_clear_true() {
        assert!(cmp("3", "3").is_clear_true());
        assert!(cmp("[| 1 + 2 |]", "[| 1 + 2 |]").is_clear_true());
    }

    #[test]
    fn computed_and_literal_integers_agree() {
        assert!(cmp("1 + 2", "3").is_clear_true());
        assert!(cmp("1 + 2", "4").is_clear_false());
    }

    #[test]
    fn code_compares_contents_by_result() {
        assert!(cmp("[| 1 + 2 |]", "[| 3 |]").is_clear_true());
        assert!(cmp("[| 1 + 2 |]", "[| 4 |]").is_clear_false());
    }

    #[test]
    fn quoted_divergence_is_indistinguishable_from_itself() {
        let cfg = BoundedConfig::default();
        let a = Term::quote(omega_at(&Type::Int));
        let b = parse_term("[| (mu f:Int -> Int. \\n:Int. f n) 0 |]").unwrap();
        assert!(obs_approx_eq(&a, &b, &cfg).is_clear_true());
        assert!(obs_approx_eq(&a, &parse_term("[| 3 |]").unwrap(), &cfg).is_clear_false());
    }

    #[test]
    fn alpha_variants_shortcut_to_true() {
        assert!(cmp("\\x:Int. x + 1", "\\y:Int. y + 1").is_clear_true());
    }

    #[test]
    fn equal_functions_are_bounded_true() {
        let v = cmp("\\x:Int. x + x", "\\y:Int. 2 * y");
        assert!(v.is_true() && v.bounded);
    }

    #[test]
    fn distinguished_functions_are_clear_false() {
        assert!(cmp("\\x:Int. x", "\\x:Int. 0 - x").is_clear_false());
    }

    #[test]
    fn always_diverging_vs_constant_function_is_refuted() {
        let cfg = BoundedConfig::default();
        let lam_omega = Term::abs("x", Type::Int, omega_at(&Type::Int));
        let lam_17 = parse_term("\\x:Int. 17").unwrap();
        assert!(obs_approx_eq(&lam_omega, &lam_17, &cfg).is_clear_false());
    }

    #[test]
    fn fuel_exhaustion_reports_unknown() {
        let cfg = BoundedConfig { fuel: 300, ..BoundedConfig::default() };
        let slow = parse_term(
            "(mu f:Int -> Int. \\n:Int. if n <= 0 then 0 else f (n - 1)) 500",
        )
        .unwrap();
        let v = obs_approx_eq(&slow, &parse_term("0").unwrap(), &cfg);
        assert!(matches!(v.truth, crate::semantics::verdict::Truth::Unknown));
    }
}
