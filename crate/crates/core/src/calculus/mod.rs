//! The calculus front end: query syntax, the AST, safety analysis and a
//! brute-force evaluator that is the reference semantics for compiled plans.

mod ast;
mod brute;
mod parser;
mod safety;

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};

pub use ast::{Arg, Atom, CalculusQuery, Formula, ObjectSet, Quantifier, Target, TreePred, VarPath};
pub use brute::{brute_eval, elements as set_elements};
pub use parser::{parse_formula, parse_query_syntax};
pub use safety::{check_formula_safety, check_safety, unsafe_names, SafetyRule, UnsafeVariable};

use crate::algebra::normalize_hops;
use crate::model::{InstanceCategory, KindMismatch, ObjectKind, ValueKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalculusError {
    #[error("syntax error at line {line}, column {col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("variable {0} appears twice among the targets")]
    DuplicateTarget(String),
    #[error("path {path} is ambiguous: {var} ranges over a union of different objects")]
    AmbiguousPath { var: String, path: String },
    #[error("unresolvable path {path}: {reason}")]
    UnresolvablePath { path: String, reason: String },
    #[error("{0} is not a binary relationship object and cannot be used as an edge set")]
    NotAnEdgeSet(String),
    #[error("unsafe query: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    UnsafeQuery(Vec<UnsafeVariable>),
    #[error(transparent)]
    TypeMismatch(#[from] KindMismatch),
    #[error("{pred} expects dewey values, found {found}")]
    NotDewey { pred: String, found: ValueKind },
}

/// The object reached from `home` along `path`, component-name hops included.
pub fn path_object(inst: &InstanceCategory, home: &str, path: &[String]) -> Result<String, CalculusError> {
    let hops = normalize_hops(inst, home, path).map_err(|e| CalculusError::UnresolvablePath {
        path: std::iter::once(home).chain(path.iter().map(String::as_str)).collect::<Vec<_>>().join("."),
        reason: e.to_string(),
    })?;
    Ok(hops.last().cloned().unwrap_or_else(|| home.to_string()))
}

/// Parse a query and resolve it against a schema: object names exist,
/// targets and free variables agree, and every path resolves.
pub fn parse_query(src: &str, inst: &InstanceCategory) -> Result<CalculusQuery, CalculusError> {
    let q = parse_query_syntax(src)?;
    resolve(&q, inst)?;
    Ok(q)
}

pub fn resolve(q: &CalculusQuery, inst: &InstanceCategory) -> Result<(), CalculusError> {
    let targets = q.target_vars();
    let mut seen = BTreeSet::new();
    for t in &targets {
        if !seen.insert(t) {
            return Err(CalculusError::DuplicateTarget(t.clone()));
        }
    }
    let free = q.body.free_vars();
    for t in &targets {
        if !free.contains(t) {
            return Err(CalculusError::UnboundVariable(t.clone()));
        }
    }
    if let Some(v) = free.iter().find(|v| !seen.contains(v)) {
        return Err(CalculusError::UnboundVariable(v.clone()));
    }

    let mut err = None;
    q.body.visit(&mut |f| {
        let names: Vec<&str> = match f {
            Formula::Atom(Atom::Range { set, .. }) | Formula::Quant { range: Some(set), .. } => set.names(),
            Formula::Atom(Atom::Reach { edges, .. }) => vec![edges.as_str()],
            _ => Vec::new(),
        };
        for n in names {
            if err.is_none() && !inst.has_object(n) {
                err = Some(CalculusError::UnknownObject(n.to_string()));
            }
        }
        if let (None, Formula::Atom(Atom::Reach { edges, .. })) = (&err, f) {
            let binary = inst.object(edges).is_some_and(|o| o.kind == ObjectKind::Relationship && o.arity() == 2);
            if !binary {
                err = Some(CalculusError::NotAnEdgeSet(edges.clone()));
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }

    let scope: BTreeMap<String, Option<ObjectSet>> =
        targets.iter().map(|t| (t.clone(), q.target_range(t).cloned())).collect();
    check_paths(&q.body, &scope, inst)
}

fn check_paths(
    f: &Formula,
    scope: &BTreeMap<String, Option<ObjectSet>>,
    inst: &InstanceCategory,
) -> Result<(), CalculusError> {
    match f {
        Formula::Const(_) => Ok(()),
        Formula::Atom(a) => {
            for p in a.var_paths() {
                if p.is_bare() {
                    continue;
                }
                let Some(Some(set)) = scope.get(&p.var) else { continue };
                let home = set
                    .home()
                    .ok_or_else(|| CalculusError::AmbiguousPath { var: p.var.clone(), path: p.to_string() })?;
                path_object(inst, home, &p.path)?;
            }
            Ok(())
        }
        Formula::Not(g) => check_paths(g, scope, inst),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_paths(a, scope, inst)?;
            check_paths(b, scope, inst)
        }
        Formula::Quant { var, range, body, .. } => {
            let mut inner = scope.clone();
            inner.insert(var.clone(), range.clone());
            check_paths(body, &inner, inst)
        }
    }
}
