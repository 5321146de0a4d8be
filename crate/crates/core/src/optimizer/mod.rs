//! Rule-based rewriting of algebra plans.
//!
//! Nine equivalences are applied greedily in preorder. A rewrite is kept
//! only if its preconditions hold on the instance and the plan cost strictly
//! decreases, so the loop terminates. Every application is recorded as a
//! (rule, node path) step; replaying the steps on the original plan yields
//! the optimized plan.

mod cost;
mod rules;

#[cfg(test)]
mod tests;

pub use cost::{cost, estimate, Cost, DIVIDE_FACTOR, PAIRING_FACTOR, SELECT_FACTOR};
pub use rules::{compose_fn, rule, Rewrite, RewriteRule, RULES};

use crate::algebra::AlgebraExpr;
use crate::model::InstanceCategory;

pub const DEFAULT_MAX_PASSES: usize = 32;

/// One applied rewrite: the rule and the child-index path of the node it
/// rewrote, in the plan as it stood at that moment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: u8,
    pub path: Vec<usize>,
}

impl std::fmt::Display for Step {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path: Vec<String> = self.path.iter().map(ToString::to_string).collect();
        write!(f, "applied rule {} at /{}", self.rule, path.join("/"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub plan: AlgebraExpr,
    pub trace: Vec<Step>,
    pub before: Cost,
    pub after: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {index}: unknown rule {rule}")]
    UnknownRule { index: usize, rule: u8 },
    #[error("step {index}: no node at the recorded path")]
    NoSuchNode { index: usize },
    #[error("step {index}: rule {rule} does not apply")]
    DoesNotApply { index: usize, rule: u8 },
}

/// Apply one rule at `path`, returning the whole rewritten plan.
pub fn apply_at(plan: &AlgebraExpr, rule: &RewriteRule, path: &[usize], inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let node = plan.at(path)?;
    let replacement = rule.apply(node, inst)?;
    let mut out = plan.clone();
    *out.at_mut(path)? = replacement;
    Some(out)
}

/// Rewrite to a fixpoint of cost-decreasing rule applications, or until
/// `max_passes` preorder sweeps have run.
pub fn optimize(plan: &AlgebraExpr, inst: &InstanceCategory, max_passes: usize) -> Optimized {
    let before = cost(plan, inst);
    let mut current = plan.clone();
    let mut current_cost = before;
    let mut trace = Vec::new();
    for _ in 0..max_passes {
        let mut changed = false;
        let mut i = 0;
        loop {
            // rewriting a node leaves earlier preorder positions unchanged
            let paths = current.paths();
            let Some(path) = paths.get(i) else { break };
            for r in &RULES {
                if let Some(next) = apply_at(&current, r, path, inst) {
                    let next_cost = cost(&next, inst);
                    if next_cost < current_cost {
                        trace.push(Step { rule: r.id, path: path.clone() });
                        current = next;
                        current_cost = next_cost;
                        changed = true;
                        break;
                    }
                }
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    Optimized { plan: current, trace, before, after: current_cost }
}

/// Re-run recorded steps on `plan`.
pub fn replay(plan: &AlgebraExpr, trace: &[Step], inst: &InstanceCategory) -> Result<AlgebraExpr, ReplayError> {
    let mut current = plan.clone();
    for (index, step) in trace.iter().enumerate() {
        let r = rule(step.rule).ok_or(ReplayError::UnknownRule { index, rule: step.rule })?;
        current.at(&step.path).ok_or(ReplayError::NoSuchNode { index })?;
        current = apply_at(&current, r, &step.path, inst).ok_or(ReplayError::DoesNotApply { index, rule: step.rule })?;
    }
    Ok(current)
}
