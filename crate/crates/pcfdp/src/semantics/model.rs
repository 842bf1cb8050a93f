use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{free_vars, parse_term, parse_type, typecheck_term, Term, Type, TypingCtx};

/// An interpretation of free variables: `xi` maps non-modal variables to
/// closed values, `sigma` maps modal variables to closed programs that
/// may diverge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    xi: BTreeMap<String, Term>,
    sigma: BTreeMap<String, Term>,
}

impl Model {
    pub fn empty() -> Model {
        Model::default()
    }

    pub fn xi(&self) -> &BTreeMap<String, Term> {
        &self.xi
    }

    pub fn sigma(&self) -> &BTreeMap<String, Term> {
        &self.sigma
    }

    pub fn lookup(&self, name: &str) -> Option<&Term> {
        self.xi.get(name).or_else(|| self.sigma.get(name))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    /// Bind a value non-modally, displacing any modal binding of the name.
    pub fn bind_value(&self, name: &str, v: Term) -> Model {
        let mut m = self.clone();
        m.sigma.remove(name);
        m.xi.insert(name.to_string(), v);
        m
    }

    /// Bind a program modally, displacing any non-modal binding.
    pub fn bind_program(&self, name: &str, p: Term) -> Model {
        let mut m = self.clone();
        m.xi.remove(name);
        m.sigma.insert(name.to_string(), p);
        m
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.xi.keys().chain(self.sigma.keys())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, t) in &self.xi {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{} = {}", n, t)?;
            first = false;
        }
        for (n, t) in &self.sigma {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{} =p {}", n, t)?;
            first = false;
        }
        if first {
            write!(f, "(empty)")?;
        }
        Ok(())
    }
}

/// Budgets for the bounded satisfaction checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedConfig {
    pub int_bound: i64,
    pub fuel: u64,
    pub fn_pool_size: usize,
    pub code_pool_size: usize,
    pub modal_pool_size: usize,
    pub samples_per_function: usize,
    pub seed: u64,
}

impl Default for BoundedConfig {
    fn default() -> BoundedConfig {
        BoundedConfig {
            int_bound: 4,
            fuel: 10_000,
            fn_pool_size: 6,
            code_pool_size: 6,
            modal_pool_size: 8,
            samples_per_function: 5,
            seed: 42,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("model line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("model entry `{name}` is declared twice")]
    Duplicate { name: String },
    #[error("model entry `{name}` is not closed")]
    NotClosed { name: String },
    #[error("model entry `{name}` is not a value")]
    NotAValue { name: String },
    #[error("model entry `{name}`: {err}")]
    IllTyped { name: String, err: String },
    #[error("model entry `{name}` has type {found}, declared {declared}")]
    DeclaredTypeMismatch { name: String, declared: Type, found: Type },
}

/// Parse a model file: `[values]` and `[programs]` sections containing
/// `name : type = term` lines, `#` comments. Every entry must be closed
/// and match its declared type; `[values]` entries must be values.
/// Returns the model together with the typing context it interprets.
pub fn parse_model(text: &str) -> Result<(Model, TypingCtx), ModelError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        Values,
        Programs,
    }
    let mut section = Section::Values;
    let mut model = Model::empty();
    let mut ctx = TypingCtx::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.eq_ignore_ascii_case("[values]") {
            section = Section::Values;
            continue;
        }
        if line.eq_ignore_ascii_case("[programs]") {
            section = Section::Programs;
            continue;
        }
        let (name, rest) = line.split_once(':').ok_or_else(|| ModelError::Syntax {
            line: line_no,
            msg: "expected `name : type = term`".to_string(),
        })?;
        let name = name.trim().to_string();
        let (ty_src, term_src) = rest.split_once('=').ok_or_else(|| ModelError::Syntax {
            line: line_no,
            msg: "missing `= term`".to_string(),
        })?;
        let ty = parse_type(ty_src.trim()).map_err(|e| ModelError::Syntax {
            line: line_no,
            msg: e.to_string(),
        })?;
        let term = parse_term(term_src.trim()).map_err(|e| ModelError::Syntax {
            line: line_no,
            msg: e.to_string(),
        })?;
        if model.contains(&name) {
            return Err(ModelError::Duplicate { name });
        }
        if !free_vars(&term).is_empty() {
            return Err(ModelError::NotClosed { name });
        }
        let found = typecheck_term(&TypingCtx::new(), &term)
            .map_err(|e| ModelError::IllTyped { name: name.clone(), err: e.to_string() })?;
        if found != ty {
            return Err(ModelError::DeclaredTypeMismatch { name, declared: ty, found });
        }
        match section {
            Section::Values => {
                if !term.is_value() {
                    return Err(ModelError::NotAValue { name });
                }
                model = model.bind_value(&name, term);
                ctx = ctx.bind(&name, ty);
            }
            Section::Programs => {
                model = model.bind_program(&name, term);
                ctx = ctx.bind_modal(&name, ty);
            }
        }
    }
    Ok((model, ctx))
}
