//! Assertion synthesis for whole programs: compute a pre/post pair
//! for a term, tidy it with a logged simplifier, and cross-check it
//! against the evaluator.

mod infer;
mod mtc;
mod simplify;

pub use infer::{infer_tree, tcap_infer, Deriv, RuleTag, TcapError, TcapResult, TraceEntry};
pub use mtc::{check_mtc, MtcOutcome, MtcReport};
pub use simplify::{simplify, simplify_traced, SimplifyLog, SimplifyStep};
