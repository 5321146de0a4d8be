use std::collections::BTreeSet;
use std::fmt;

use super::ast::{Atom, CalculusQuery, Formula, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SafetyRule {
    /// (a) a free variable has no top-level range conjunct
    TopLevelRange,
    /// (b) a quantifier without a range
    RangedQuantifier,
    /// (c) the branches of a disjunction range different variables
    DisjunctionBranches,
    /// (d) a negation mentions a variable not ranged in its context
    NegationContext,
}

impl SafetyRule {
    pub fn letter(self) -> char {
        match self {
            SafetyRule::TopLevelRange => 'a',
            SafetyRule::RangedQuantifier => 'b',
            SafetyRule::DisjunctionBranches => 'c',
            SafetyRule::NegationContext => 'd',
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SafetyRule::TopLevelRange => "free variable without a top-level range term",
            SafetyRule::RangedQuantifier => "quantifier without a range",
            SafetyRule::DisjunctionBranches => "disjunction branches range different variables",
            SafetyRule::NegationContext => "negation over a variable not ranged in its context",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnsafeVariable {
    pub var: String,
    pub rule: SafetyRule,
}

impl fmt::Display for UnsafeVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rule {}: {})", self.var, self.rule.letter(), self.rule.description())
    }
}

/// Variables that `f` ranges positively in every way it can be satisfied.
fn ranged(f: &Formula) -> BTreeSet<String> {
    match f {
        Formula::Atom(Atom::Range { var, .. }) => BTreeSet::from([var.clone()]),
        Formula::And(a, b) => &ranged(a) | &ranged(b),
        Formula::Or(a, b) => &ranged(a) & &ranged(b),
        _ => BTreeSet::new(),
    }
}

struct Report(Vec<UnsafeVariable>);

impl Report {
    fn add(&mut self, var: &str, rule: SafetyRule) {
        let u = UnsafeVariable { var: var.to_string(), rule };
        if !self.0.contains(&u) {
            self.0.push(u);
        }
    }
}

fn walk(f: &Formula, ctx: &BTreeSet<String>, out: &mut Report) {
    match f {
        Formula::Const(_) | Formula::Atom(_) => {}
        Formula::And(a, b) => {
            let inner = ctx | &ranged(f);
            walk(a, &inner, out);
            walk(b, &inner, out);
        }
        Formula::Or(a, b) => {
            let (ra, rb) = (ranged(a), ranged(b));
            for v in ra.symmetric_difference(&rb) {
                if !ctx.contains(v) {
                    out.add(v, SafetyRule::DisjunctionBranches);
                }
            }
            walk(a, ctx, out);
            walk(b, ctx, out);
        }
        Formula::Not(g) => {
            for v in g.free_vars() {
                if !ctx.contains(&v) {
                    out.add(&v, SafetyRule::NegationContext);
                }
            }
            walk(g, ctx, out);
        }
        Formula::Implies(..) => walk(&f.without_implications(), ctx, out),
        Formula::Quant { var, range, body, .. } => {
            if range.is_none() {
                out.add(var, SafetyRule::RangedQuantifier);
            }
            let mut inner = ctx.clone();
            inner.insert(var.clone());
            walk(body, &inner, out);
        }
    }
}

/// Every unsafe variable with the rule it breaks; empty iff the query is safe.
pub fn check_safety(q: &CalculusQuery) -> Vec<UnsafeVariable> {
    let body = q.body.without_implications();
    let mut out = Report(Vec::new());
    for t in q.target_vars() {
        let has_range = body
            .conjuncts()
            .iter()
            .any(|c| matches!(c, Formula::Atom(Atom::Range { var, .. }) if *var == t));
        if !has_range {
            out.add(&t, SafetyRule::TopLevelRange);
        }
    }
    walk(&body, &BTreeSet::new(), &mut out);
    out.0
}

/// Safety of a bare formula, treating its free variables as the targets.
pub fn check_formula_safety(f: &Formula) -> Vec<UnsafeVariable> {
    let targets = f.free_vars().into_iter().map(Target::Var).collect();
    check_safety(&CalculusQuery { targets, body: f.clone() })
}

/// The distinct variable names in a safety report, in report order.
pub fn unsafe_names(report: &[UnsafeVariable]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for u in report {
        if !out.contains(&u.var.as_str()) {
            out.push(&u.var);
        }
    }
    out
}
