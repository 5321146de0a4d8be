//! Deliberately wrong rewrites must be caught by the soundness checks.

use catql::algebra::AlgebraExpr;
use catql::check::suites::rule_soundness;
use catql::model::InstanceCategory;
use catql::optimizer::RewriteRule;

/// Drops a selection pushed into a limit instead of pushing it.
fn drop_selection(e: &AlgebraExpr, _: &InstanceCategory) -> Option<AlgebraExpr> {
    match e {
        AlgebraExpr::Select(inner, _) => Some((**inner).clone()),
        _ => None,
    }
}

/// Swaps the two sides of a tree axis.
fn swap_axis(e: &AlgebraExpr, _: &InstanceCategory) -> Option<AlgebraExpr> {
    match e {
        AlgebraExpr::Select(inner, c) => match &**inner {
            AlgebraExpr::Tree(axis, a, b) => {
                Some(AlgebraExpr::Tree(*axis, b.clone(), a.clone()).select(c.clone()))
            }
            _ => None,
        },
        _ => None,
    }
}

#[test]
fn dropping_a_selection_is_caught() {
    let mutant = RewriteRule::new(3, "drop selection", drop_selection);
    let o = rule_soundness(&mutant, 11, 100);
    assert!(!o.passed(), "{o}");
}

#[test]
fn swapping_tree_sides_is_caught() {
    let mutant = RewriteRule::new(5, "swap tree sides", swap_axis);
    let o = rule_soundness(&mutant, 11, 100);
    assert!(!o.passed(), "{o}");
}
