//! Bounded model checking for the assertion language: three-valued
//! satisfaction over finite typed pools, cycle-aware evaluation, and
//! judgement checking across generated model suites.

mod closure;
mod model;
mod obs;
mod pools;
mod sat;
mod verdict;

pub use closure::{close_term, eval_cyclic, eval_expr, Run, SemanticsError};
pub use model::{parse_model, BoundedConfig, Model, ModelError};
pub use obs::obs_approx_eq;
pub use pools::{arg_samples, modal_pool, omega_at, splice_omega_at, value_pool};
pub use sat::{gen_models, sat, sat_judgement, JudgementReport, ModelCheck};
pub use verdict::{Truth, Verdict};
