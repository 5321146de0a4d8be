//! Translation of safe calculus queries into algebra plans.
//!
//! The query is put in prenex form with a DNF matrix. Each clause becomes a
//! limit over its variables' ranges, with function terms as morphisms and
//! tree and graph predicates as derived relationship objects; comparisons
//! become selections. Clause results are united, the quantifier prefix is
//! eliminated by division and projection, and the targets are projected.

mod normalize;
mod plan;

#[cfg(test)]
mod tests;

pub use normalize::{normalize, Link, Literal, NormalizedQuery, QuantDecl, MAX_CLAUSES};
pub use plan::{apply_quantifiers, build_clause, clause_range, gen_ranges, predicate_object, project_targets, set_expr};

use crate::algebra::{columns_of, AlgebraError, AlgebraExpr};
use crate::calculus::{CalculusError, CalculusQuery, UnsafeVariable};
use crate::model::InstanceCategory;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("unsafe query: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Unsafe(Vec<UnsafeVariable>),
    #[error("the matrix expands to {0} clauses, more than {MAX_CLAUSES}")]
    TooManyClauses(usize),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Compile a query into a plan whose value on `inst` is the query's answer.
pub fn compile(q: &CalculusQuery, inst: &InstanceCategory) -> Result<AlgebraExpr, CompileError> {
    let nq = normalize(q, inst)?;
    compile_normalized(&nq, inst)
}

pub fn compile_normalized(nq: &NormalizedQuery, inst: &InstanceCategory) -> Result<AlgebraExpr, CompileError> {
    let ranges = gen_ranges(nq);
    let clauses = nq.clauses.iter().map(|c| build_clause(nq, &ranges, c, inst)).collect::<Result<Vec<_>, _>>()?;
    let empty = build_clause(nq, &ranges, &[], inst)?;
    let combined = apply_quantifiers(nq, &ranges, clauses, empty);
    let plan = project_targets(nq, combined, inst);
    columns_of(&plan, inst)?;
    Ok(plan)
}
