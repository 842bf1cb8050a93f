use std::collections::BTreeMap;

use serde::Deserialize;

use crate::logic::{parse_expr, parse_formula, Expr, Formula, Judgement};
use crate::syntax::{parse_term, parse_type, SyntaxError, TypingCtx};

use super::axioms::{BindingValue, Bindings};
use super::entail::{ChainStep, Discharge};
use super::rules::{AuxDecl, ProofNode, RuleName};

/// A proof script as stored on disk: a named root context and one node
/// tree. Every formula, term, and type is concrete syntax.
#[derive(Debug, Clone)]
pub struct Script {
    pub name: String,
    pub ctx: TypingCtx,
    pub root: ProofNode,
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("script is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {place}: {source}")]
    Syntax {
        place: String,
        #[source]
        source: SyntaxError,
    },
    #[error("in {place}: {msg}")]
    Shape { place: String, msg: String },
}

pub fn parse_script(text: &str) -> Result<Script, ScriptError> {
    let raw: RawScript = serde_json::from_str(text)?;
    let mut ctx = TypingCtx::new();
    for (name, ty) in &raw.gamma {
        ctx = ctx.bind(name, ty_at(ty, &format!("gamma entry {}", name))?);
    }
    for (name, ty) in &raw.delta {
        ctx = ctx.bind_modal(name, ty_at(ty, &format!("delta entry {}", name))?);
    }
    let root = node_at(&raw.root, "root")?;
    Ok(Script { name: raw.name, ctx, root })
}

#[derive(Debug, Deserialize)]
struct RawScript {
    name: String,
    #[serde(default)]
    gamma: BTreeMap<String, String>,
    #[serde(default)]
    delta: BTreeMap<String, String>,
    root: RawNode,
}

#[derive(Debug, Deserialize)]
struct RawNode {
    rule: String,
    pre: String,
    term: String,
    anchor: String,
    post: String,
    #[serde(default)]
    premises: Vec<RawNode>,
    #[serde(default)]
    entailments: Vec<RawEntailment>,
    #[serde(default)]
    hints: BTreeMap<String, String>,
    #[serde(default)]
    aux: RawAux,
}

#[derive(Debug, Default, Deserialize)]
struct RawAux {
    #[serde(default)]
    gamma: BTreeMap<String, String>,
    #[serde(default)]
    delta: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
enum RawEntailment {
    AxiomChain {
        steps: Vec<RawStep>,
    },
    Bounded {
        #[serde(default = "default_models")]
        models: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    Assume {
        label: String,
    },
}

fn default_models() -> usize {
    200
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawStep {
    Axiom {
        axiom: String,
        #[serde(default)]
        bindings: BTreeMap<String, RawBinding>,
    },
    Taut {
        taut: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawBinding {
    Formula(String),
    Expr(String),
    Type(String),
    Name(String),
}

fn node_at(raw: &RawNode, place: &str) -> Result<ProofNode, ScriptError> {
    let rule: RuleName = raw
        .rule
        .parse()
        .map_err(|msg| ScriptError::Shape { place: place.to_string(), msg })?;
    let conclusion = Judgement {
        pre: formula_at(&raw.pre, &format!("{} pre", place))?,
        term: parse_term(&raw.term)
            .map_err(|source| ScriptError::Syntax { place: format!("{} term", place), source })?,
        anchor: raw.anchor.clone(),
        post: formula_at(&raw.post, &format!("{} post", place))?,
    };
    let mut premises = Vec::with_capacity(raw.premises.len());
    for (i, p) in raw.premises.iter().enumerate() {
        premises.push(node_at(p, &format!("{}/premise[{}]", place, i))?);
    }
    let mut side = Vec::with_capacity(raw.entailments.len());
    for (i, e) in raw.entailments.iter().enumerate() {
        side.push(discharge_at(e, &format!("{} entailment[{}]", place, i))?);
    }
    let mut hints = BTreeMap::new();
    for (key, text) in &raw.hints {
        hints.insert(key.clone(), formula_at(text, &format!("{} hint {}", place, key))?);
    }
    let mut aux = Vec::new();
    for (name, ty) in &raw.aux.gamma {
        aux.push(AuxDecl {
            name: name.clone(),
            ty: ty_at(ty, &format!("{} aux {}", place, name))?,
            modal: false,
        });
    }
    for (name, ty) in &raw.aux.delta {
        aux.push(AuxDecl {
            name: name.clone(),
            ty: ty_at(ty, &format!("{} aux {}", place, name))?,
            modal: true,
        });
    }
    Ok(ProofNode { rule, conclusion, premises, side, hints, aux })
}

fn discharge_at(raw: &RawEntailment, place: &str) -> Result<Discharge, ScriptError> {
    Ok(match raw {
        RawEntailment::Bounded { models, seed } => {
            Discharge::Bounded { models: *models, seed: *seed }
        }
        RawEntailment::Assume { label } => Discharge::Assumed(label.clone()),
        RawEntailment::AxiomChain { steps } => {
            let mut out = Vec::with_capacity(steps.len());
            for (i, step) in steps.iter().enumerate() {
                let sp = format!("{} step[{}]", place, i);
                out.push(match step {
                    RawStep::Taut { taut } => ChainStep::Taut { to: formula_at(taut, &sp)? },
                    RawStep::Axiom { axiom, bindings } => {
                        let mut bs = Bindings::new();
                        for (key, rb) in bindings {
                            let val = match rb {
                                RawBinding::Formula(s) => BindingValue::Formula(formula_at(
                                    s,
                                    &format!("{} binding {}", sp, key),
                                )?),
                                RawBinding::Expr(s) => BindingValue::Expr(expr_at(
                                    s,
                                    &format!("{} binding {}", sp, key),
                                )?),
                                RawBinding::Type(s) => BindingValue::Ty(ty_at(
                                    s,
                                    &format!("{} binding {}", sp, key),
                                )?),
                                RawBinding::Name(s) => BindingValue::Name(s.clone()),
                            };
                            bs.insert(key.clone(), val);
                        }
                        ChainStep::Axiom { name: axiom.clone(), bindings: bs }
                    }
                });
            }
            Discharge::AxiomChain(out)
        }
    })
}

fn formula_at(text: &str, place: &str) -> Result<Formula, ScriptError> {
    parse_formula(text)
        .map_err(|source| ScriptError::Syntax { place: place.to_string(), source })
}

fn expr_at(text: &str, place: &str) -> Result<Expr, ScriptError> {
    parse_expr(text).map_err(|source| ScriptError::Syntax { place: place.to_string(), source })
}

fn ty_at(text: &str, place: &str) -> Result<crate::syntax::Type, ScriptError> {
    parse_type(text).map_err(|source| ScriptError::Syntax { place: place.to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proofs::check_proof;
    use crate::semantics::BoundedConfig;

    #[test]
    fn minimal_script_parses_and_checks() {
        let text = r#"{
            "name": "three",
            "root": {
                "rule": "conseq_kl",
                "pre": "T", "term": "3", "anchor": "m", "post": "m == 3",
                "premises": [
                    { "rule": "const", "pre": "3 == 3", "term": "3", "anchor": "m", "post": "m == 3" }
                ],
                "entailments": [ { "mode": "bounded", "models": 20 } ]
            }
        }"#;
        let script = parse_script(text).unwrap();
        assert_eq!(script.name, "three");
        assert!(script.ctx.is_empty());
        let report = check_proof(&script.root, &script.ctx, &BoundedConfig::default());
        assert!(report.outcome.is_checked(), "{}", report.summary());
    }

    #[test]
    fn contexts_and_chains_round_trip() {
        let text = r#"{
            "name": "modal_var",
            "gamma": {},
            "delta": { "x": "Int" },
            "root": {
                "rule": "var_m",
                "pre": "conv(x)", "term": "x", "anchor": "m", "post": "m == x"
            }
        }"#;
        let script = parse_script(text).unwrap();
        assert!(script.ctx.is_modal("x"));
        let report = check_proof(&script.root, &script.ctx, &BoundedConfig::default());
        assert!(report.outcome.is_checked(), "{}", report.summary());
        assert!(report.fully_checked());
    }

    #[test]
    fn axiom_chain_steps_parse() {
        let text = r#"{
            "name": "chain",
            "gamma": { "x": "Int" },
            "root": {
                "rule": "conseq_kl",
                "pre": "x == 3", "term": "x", "anchor": "m", "post": "m == 3 /\\ conv(x)",
                "premises": [
                    { "rule": "var", "pre": "x == 3 /\\ conv(x)", "term": "x", "anchor": "m",
                      "post": "m == 3" }
                ],
                "entailments": [
                    { "mode": "axiom-chain", "steps": [
                        { "axiom": "term", "bindings": { "e": { "expr": "x" } } },
                        { "taut": "(x == 3 /\\ conv(x)) /\\ (m == 3 => m == 3 /\\ conv(x))" }
                    ] }
                ]
            }
        }"#;
        let script = parse_script(text).unwrap();
        let report = check_proof(&script.root, &script.ctx, &BoundedConfig::default());
        assert!(report.outcome.is_checked(), "{}", report.summary());
        assert!(report.fully_checked());
    }

    #[test]
    fn unknown_rule_is_reported_with_place() {
        let text = r#"{
            "name": "oops",
            "root": { "rule": "zap", "pre": "T", "term": "3", "anchor": "m", "post": "T" }
        }"#;
        match parse_script(text) {
            Err(ScriptError::Shape { place, msg }) => {
                assert_eq!(place, "root");
                assert!(msg.contains("zap"));
            }
            other => panic!("expected shape error, got {:?}", other),
        }
    }
}
