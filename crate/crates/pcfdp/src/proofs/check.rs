use std::fmt;

use crate::semantics::BoundedConfig;
use crate::syntax::TypingCtx;

use super::entail::{discharge_entailment, DischargeResult, Entailment};
use super::rules::{validate_node, ProofNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofOutcome {
    Checked,
    ConditionallyChecked(Vec<String>),
    Rejected { path: String, reason: String },
}

impl ProofOutcome {
    pub fn is_checked(&self) -> bool {
        matches!(self, ProofOutcome::Checked)
    }
}

impl fmt::Display for ProofOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofOutcome::Checked => write!(f, "checked"),
            ProofOutcome::ConditionallyChecked(labels) => {
                write!(f, "conditionally checked (assuming: {})", labels.join(", "))
            }
            ProofOutcome::Rejected { path, reason } => {
                write!(f, "rejected at {}: {}", path, reason)
            }
        }
    }
}

/// One discharged obligation, with the tree position it arose at.
#[derive(Debug, Clone)]
pub struct ObligationRecord {
    pub path: String,
    pub entailment: Entailment,
    pub result: DischargeResult,
}

#[derive(Debug, Clone)]
pub struct ProofReport {
    pub outcome: ProofOutcome,
    pub nodes: usize,
    pub obligations: Vec<ObligationRecord>,
    /// How many obligations were settled only by bounded countermodel search.
    pub bounded: usize,
    pub assumed: Vec<String>,
}

impl ProofReport {
    /// Checked with nothing weaker than an axiom chain anywhere.
    pub fn fully_checked(&self) -> bool {
        self.outcome.is_checked() && self.bounded == 0 && self.assumed.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "{} ({} node(s), {} obligation(s), {} bounded, {} assumed)",
            self.outcome,
            self.nodes,
            self.obligations.len(),
            self.bounded,
            self.assumed.len()
        )
    }
}

/// Check a whole proof tree under the given root context. Schema
/// validation and obligation discharge stop at the first failure, which
/// is reported with the node's path.
pub fn check_proof(root: &ProofNode, ctx: &TypingCtx, cfg: &BoundedConfig) -> ProofReport {
    let mut report = ProofReport {
        outcome: ProofOutcome::Checked,
        nodes: root.count(),
        obligations: Vec::new(),
        bounded: 0,
        assumed: Vec::new(),
    };
    if let Err((path, reason)) = walk(root, ctx, "root", cfg, &mut report) {
        report.outcome = ProofOutcome::Rejected { path, reason };
    } else if !report.assumed.is_empty() {
        report.outcome = ProofOutcome::ConditionallyChecked(report.assumed.clone());
    }
    report
}

fn walk(
    node: &ProofNode,
    ctx: &TypingCtx,
    path: &str,
    cfg: &BoundedConfig,
    report: &mut ProofReport,
) -> Result<(), (String, String)> {
    let check =
        validate_node(ctx, node).map_err(|reason| (path.to_string(), reason))?;

    for (i, (ob, discharge)) in check.obligations.iter().zip(&node.side).enumerate() {
        let ent = Entailment {
            hypothesis: ob.hypothesis.clone(),
            conclusion: ob.conclusion.clone(),
            discharge: discharge.clone(),
        };
        match discharge_entailment(&ob.ctx, &ent, cfg) {
            Ok(result) => {
                match &result {
                    DischargeResult::BoundedOk { .. } => report.bounded += 1,
                    DischargeResult::Assumed(label) => report.assumed.push(label.clone()),
                    DischargeResult::Proved => {}
                }
                report.obligations.push(ObligationRecord {
                    path: path.to_string(),
                    entailment: ent,
                    result,
                });
            }
            Err(e) => {
                return Err((path.to_string(), format!("obligation {}: {}", i + 1, e)));
            }
        }
    }

    for (i, premise) in node.premises.iter().enumerate() {
        let child_path = format!("{}/premise[{}]", path, i);
        walk(premise, &check.premise_ctxs[i], &child_path, cfg, report)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::logic::{parse_formula, Judgement};
    use crate::proofs::{Discharge, RuleName};
    use crate::syntax::parse_term;

    fn leaf(rule: RuleName, pre: &str, term: &str, anchor: &str, post: &str) -> ProofNode {
        ProofNode {
            rule,
            conclusion: Judgement {
                pre: parse_formula(pre).unwrap(),
                term: parse_term(term).unwrap(),
                anchor: anchor.to_string(),
                post: parse_formula(post).unwrap(),
            },
            premises: Vec::new(),
            side: Vec::new(),
            hints: BTreeMap::new(),
            aux: Vec::new(),
        }
    }

    #[test]
    fn constant_with_kleymann_bridge_checks() {
        let mut root = leaf(RuleName::ConseqKl, "T", "3", "m", "m == 3");
        root.premises.push(leaf(RuleName::Const, "3 == 3", "3", "m", "m == 3"));
        root.side.push(Discharge::Bounded { models: 50, seed: 42 });
        let report = check_proof(&root, &TypingCtx::new(), &BoundedConfig::default());
        assert!(report.outcome.is_checked(), "{}", report.summary());
        assert_eq!(report.nodes, 2);
        assert_eq!(report.bounded, 1);
        assert!(!report.fully_checked());
    }

    #[test]
    fn rejection_carries_the_node_path() {
        let mut root = leaf(RuleName::ConseqKl, "T", "3", "m", "m == 3");
        root.premises.push(leaf(RuleName::Const, "T", "3", "m", "m == 3"));
        root.side.push(Discharge::Bounded { models: 50, seed: 42 });
        let report = check_proof(&root, &TypingCtx::new(), &BoundedConfig::default());
        match report.outcome {
            ProofOutcome::Rejected { path, .. } => assert_eq!(path, "root/premise[0]"),
            other => panic!("expected rejection, got {}", other),
        }
    }

    #[test]
    fn assume_downgrades_to_conditional() {
        let mut root = leaf(RuleName::ConseqKl, "T", "3", "m", "m == 4");
        root.premises.push(leaf(RuleName::Const, "3 == 4", "3", "m", "m == 4"));
        root.side.push(Discharge::Assumed("wishful".to_string()));
        let report = check_proof(&root, &TypingCtx::new(), &BoundedConfig::default());
        assert_eq!(
            report.outcome,
            ProofOutcome::ConditionallyChecked(vec!["wishful".to_string()])
        );
    }

    #[test]
    fn false_premise_without_assume_is_rejected() {
        let mut root = leaf(RuleName::ConseqKl, "T", "3", "m", "m == 4");
        root.premises.push(leaf(RuleName::Const, "3 == 4", "3", "m", "m == 4"));
        root.side.push(Discharge::Bounded { models: 50, seed: 42 });
        let report = check_proof(&root, &TypingCtx::new(), &BoundedConfig::default());
        assert!(matches!(report.outcome, ProofOutcome::Rejected { .. }));
    }
}
