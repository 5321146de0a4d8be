//! The categorical algebra: plan trees over set operators, tree and graph
//! operators, `Cat` and `Lim`, and their evaluator.

mod eval;
mod expr;
mod extset;
mod function;
pub mod syntax;
mod typing;

#[cfg(test)]
mod tests;

pub use eval::{divide, eval_cat, eval_set, evaluate, lim_of, reach, select, tree_axis, CatValue, Evaluated};
pub use expr::{
    AlgebraExpr, CatExpr, CatObject, Column, Condition, FunctionExpr, MorphismDecl, Operand, TableFn, TreeAxis,
};
pub use extset::{dedupe_names, packed_components, ExtSet};
pub use function::{normalize_hops, resolve, ResolvedFn};
pub use syntax::{explain, parse_algebra};
pub use typing::{cat_object_columns, columns_of, unpacked_columns};

use crate::model::{KindMismatch, ModelError, ValueKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("unresolvable path: {0}")]
    UnresolvablePath(String),
    #[error("unknown component {component} (available: {available})")]
    UnknownComponent { component: String, available: String },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error(transparent)]
    TypeMismatch(#[from] KindMismatch),
    #[error("operands are not union-compatible: {0}")]
    UnionIncompatible(String),
    #[error("component mismatch: {0}")]
    ComponentMismatch(String),
    #[error("{op} expects {expected} values, found {found}")]
    KindMismatch { op: String, expected: ValueKind, found: ValueKind },
    #[error("hop count must be at least 1, got {0}")]
    InvalidHopCount(i64),
    #[error("{morphism} is not a total function: no image for {witness}")]
    PartialFunction { morphism: String, witness: String },
    #[error("{op} expects arity {expected}, found {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("algebra syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
