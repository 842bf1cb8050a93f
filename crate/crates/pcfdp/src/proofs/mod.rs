//! Proof scripts and the checking kernel: axiom instantiation, entailment
//! discharge, per-rule premise shapes, derived-rule expansion.

mod axioms;
mod check;
mod entail;
mod expand;
mod rules;
mod script;

pub use axioms::{
    instantiate_axiom, AxiomError, AxiomInstance, AxiomShape, BindingValue, Bindings, AXIOM_NAMES,
};
pub use entail::{
    discharge_entailment, taut_entails, ChainStep, Discharge, DischargeResult, Entailment,
    EntailError,
};
pub use expand::{expand_derived_rule, ExpandError};
pub use check::{check_proof, ObligationRecord, ProofOutcome, ProofReport};
pub use rules::{validate_node, AuxDecl, NodeCheck, Obligation, ProofNode, RuleName};
pub use script::{parse_script, Script, ScriptError};
