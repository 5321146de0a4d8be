//! Query results are invariant under rewrites that preserve meaning.

use catql::algebra::eval_set;
use catql::calculus::{brute_eval, check_safety, parse_query, Atom, CalculusQuery, Formula};
use catql::check::gen::{self, QueryGen};
use catql::compiler::compile;
use catql::model::{InstanceCategory, Value};
use catql::optimizer::{optimize, DEFAULT_MAX_PASSES};
use proptest::prelude::*;
use std::collections::BTreeSet;

type Rows = BTreeSet<Vec<Value>>;

fn sample(seed: u64) -> (String, InstanceCategory) {
    let mut rng = gen::rng(seed);
    let src = QueryGen::new(&mut rng).query();
    (src, gen::random_instance(&mut rng))
}

/// Oracle and optimized-plan results, or None when the query is rejected.
fn results(q: &CalculusQuery, inst: &InstanceCategory) -> Option<(Rows, Rows)> {
    if !check_safety(q).is_empty() {
        return None;
    }
    let oracle = brute_eval(inst, q).unwrap().rows;
    let plan = optimize(&compile(q, inst).unwrap(), inst, DEFAULT_MAX_PASSES).plan;
    Some((oracle, eval_set(&plan, inst).unwrap().rows))
}

fn map(f: &Formula, g: &impl Fn(Formula) -> Formula) -> Formula {
    let rec = |x: &Formula| Box::new(map(x, g));
    let f = match f {
        Formula::Not(a) => Formula::Not(rec(a)),
        Formula::And(a, b) => Formula::And(rec(a), rec(b)),
        Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
        Formula::Implies(a, b) => Formula::Implies(rec(a), rec(b)),
        Formula::Quant { q, var, range, body } => {
            Formula::Quant { q: *q, var: var.clone(), range: range.clone(), body: rec(body) }
        }
        leaf => leaf.clone(),
    };
    g(f)
}

fn swap_operands(f: Formula) -> Formula {
    match f {
        Formula::And(a, b) => Formula::And(b, a),
        Formula::Or(a, b) => Formula::Or(b, a),
        other => other,
    }
}

fn double_negate(f: Formula) -> Formula {
    match f {
        Formula::Atom(a) if !matches!(a, Atom::Range { .. }) => Formula::not(Formula::not(Formula::Atom(a))),
        other => other,
    }
}

fn has_range(f: &Formula) -> bool {
    match f {
        Formula::Atom(Atom::Range { .. }) => true,
        Formula::Not(a) => has_range(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => has_range(a) || has_range(b),
        Formula::Quant { body, .. } => has_range(body),
        _ => false,
    }
}

/// Push negations through connectives, and write range-free connectives
/// as the negation of their dual.
fn de_morgan(f: Formula) -> Formula {
    let dual = |a: Box<Formula>, b: Box<Formula>, and: bool| {
        let (na, nb) = (Formula::Not(a), Formula::Not(b));
        Formula::not(if and { Formula::or(na, nb) } else { Formula::and(na, nb) })
    };
    match f {
        Formula::Not(inner) => match *inner {
            Formula::And(a, b) => Formula::or(Formula::Not(a), Formula::Not(b)),
            Formula::Or(a, b) => Formula::and(Formula::Not(a), Formula::Not(b)),
            other => Formula::not(other),
        },
        Formula::And(a, b) if !has_range(&a) && !has_range(&b) => dual(a, b, true),
        Formula::Or(a, b) if !has_range(&a) && !has_range(&b) => dual(a, b, false),
        other => other,
    }
}

fn transformed(q: &CalculusQuery, g: impl Fn(Formula) -> Formula) -> CalculusQuery {
    CalculusQuery { targets: q.targets.clone(), body: map(&q.body, &g) }
}

fn assert_same(q: &CalculusQuery, q2: &CalculusQuery, inst: &InstanceCategory, safety_kept: bool) {
    let (a, b) = (results(q, inst), results(q2, inst));
    if safety_kept {
        assert_eq!(a.is_some(), b.is_some(), "safety changed: {q} vs {q2}");
    }
    if let (Some((oracle, plan)), Some((oracle2, plan2))) = (a, b) {
        assert_eq!(oracle, plan, "{q}");
        assert_eq!(oracle2, oracle, "{q} vs {q2}");
        assert_eq!(plan2, plan, "{q} vs {q2}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reordering_operands(seed in any::<u64>()) {
        let (src, inst) = sample(seed);
        let q = parse_query(&src, &inst).unwrap();
        assert_same(&q, &transformed(&q, swap_operands), &inst, true);
    }

    #[test]
    fn renaming_bound_variables(seed in any::<u64>()) {
        let (src, inst) = sample(seed);
        let q = parse_query(&src, &inst).unwrap();
        let renamed = parse_query(&src.replace("q1", "w7").replace("q2", "w8"), &inst).unwrap();
        assert_same(&q, &renamed, &inst, true);
    }

    #[test]
    fn double_negation(seed in any::<u64>()) {
        let (src, inst) = sample(seed);
        let q = parse_query(&src, &inst).unwrap();
        assert_same(&q, &transformed(&q, double_negate), &inst, false);
    }

    #[test]
    fn de_morgan_laws(seed in any::<u64>()) {
        let (src, inst) = sample(seed);
        let q = parse_query(&src, &inst).unwrap();
        assert_same(&q, &transformed(&q, de_morgan), &inst, false);
    }
}


