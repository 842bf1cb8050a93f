//! Toolkit for a staged meta-programming language with quasi-quotation:
//! a small-step interpreter and dual-context modal type checker, an
//! assertion language with a total-correctness proof kernel, a bounded
//! model-based satisfaction checker, and a characteristic-formula
//! generator with an equivalence-preserving simplifier.

pub mod syntax;
pub mod eval;
pub mod logic;
pub mod proofs;
pub mod semantics;
pub mod tcap;
