use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::algebra::{eval_set, explain, AlgebraExpr, ExtSet};
use crate::calculus::{brute_eval, parse_query};
use crate::check::fixtures::{self, ANCESTORS_QUERY, MALE_STUDENTS_QUERY, REACHABLE_QUERY};
use crate::model::{InstanceCategory, Value};

fn both(src: &str, inst: &InstanceCategory) -> (ExtSet, ExtSet, AlgebraExpr) {
    let q = parse_query(src, inst).unwrap_or_else(|e| panic!("{src}: {e}"));
    let oracle = brute_eval(inst, &q).unwrap_or_else(|e| panic!("{src}: {e}"));
    let plan = compile(&q, inst).unwrap_or_else(|e| panic!("{src}: {e}"));
    let got = eval_set(&plan, inst).unwrap_or_else(|e| panic!("{src}: {e}\n{}", explain(&plan)));
    (oracle, got, plan)
}

fn agree(src: &str, inst: &InstanceCategory) -> ExtSet {
    let (oracle, got, plan) = both(src, inst);
    assert_eq!(got.rows, oracle.rows, "{src}\n{}", explain(&plan));
    assert_eq!(got.column_names(), oracle.column_names(), "{src}");
    got
}

fn texts(set: &ExtSet) -> BTreeSet<String> {
    set.values().map(ToString::to_string).collect()
}

#[test]
fn male_students_normal_form() {
    let inst = fixtures::school();
    let q = parse_query(MALE_STUDENTS_QUERY, &inst).unwrap();
    let nq = normalize(&q, &inst).unwrap();
    assert_eq!(nq.clauses.len(), 2);
    assert!(nq.clauses[0].iter().any(|l| l.to_string() == "not (y1.Gender = \"Female\")"));
    assert!(nq.clauses[1].iter().filter(|l| l.atom.as_function_term().is_some()).count() >= 4);
    let kinds: Vec<_> = nq.prefix.iter().map(|d| d.q.keyword()).collect();
    assert_eq!(kinds, ["forall", "exists", "exists", "exists"]);
    assert_eq!(nq.links.len(), 1);
}

#[test]
fn male_students_compiles_to_a_category() {
    let inst = fixtures::school();
    let got = agree(MALE_STUDENTS_QUERY, &inst);
    assert_eq!(got.rows.len(), 1);
    let plan = compile(&parse_query(MALE_STUDENTS_QUERY, &inst).unwrap(), &inst).unwrap();
    assert!(matches!(&plan, AlgebraExpr::Cat(c) if c.objects.len() == 2 && c.morphisms.len() == 1));
    let text = explain(&plan);
    assert!(text.contains("divide"), "{text}");
    assert!(text.contains("lim"), "{text}");
}

#[test]
fn ancestors_of_john_match_a_tree_walk() {
    let inst = fixtures::family();
    let got = agree(ANCESTORS_QUERY, &inst);
    let parent: BTreeMap<&str, &str> = [("Beth", "Adam"), ("Carl", "Adam"), ("John", "Beth"), ("Dora", "Carl"), ("Evan", "John")]
        .into_iter()
        .collect();
    let mut walk = BTreeSet::new();
    let mut here = "John";
    while let Some(p) = parent.get(here) {
        walk.insert(p.to_string());
        here = p;
    }
    assert_eq!(texts(&got), walk);
    let plan = compile(&parse_query(ANCESTORS_QUERY, &inst).unwrap(), &inst).unwrap();
    assert!(explain(&plan).contains("get_ancestor"));
}

#[test]
fn reachable_from_john_match_a_closure() {
    let inst = fixtures::friends();
    let got = agree(REACHABLE_QUERY, &inst);
    let names: BTreeMap<&str, &str> = fixtures::FRIEND_NAMES.into_iter().collect();
    let mut seen = BTreeSet::new();
    let mut stack = vec!["n1"];
    while let Some(n) = stack.pop() {
        for (a, b) in fixtures::FRIENDS {
            if a == n && seen.insert(b) {
                stack.push(b);
            }
        }
    }
    let expected: BTreeSet<String> = seen.iter().map(|n| names[n].to_string()).collect();
    assert_eq!(texts(&got), expected);
    let plan = compile(&parse_query(REACHABLE_QUERY, &inst).unwrap(), &inst).unwrap();
    assert!(explain(&plan).contains("get_reach"));
}

#[test]
fn small_queries_agree_with_the_oracle() {
    let school = fixtures::school();
    for src in [
        "{ x | x in Student }",
        "{ x | x in Student, x.Gender = \"Male\" }",
        "{ x | x in Student, not (x.Gender = \"Male\") }",
        "{ x, c | x in Student, c in Course }",
        "{ x | x in Student, x = \"s1\", x = \"s2\" }",
        "{ x | x in Student, (x = \"s1\" or x = \"s2\") }",
        "{ x | x in Student, forall c in Course: exists e in SC: (e.Student = x and e.Course = c) }",
        "{ x | x in Student, exists e in SC: (e.Student = x) and forall c in Course: (c = \"c1\") }",
        "{ x | x in Student, forall e in SC: (e.Student != x) }",
        "{ g | g in Gender, exists s in Student: (s.Gender = g and s.Address = \"a1\") }",
        "{ (s, a) | s in Student, a in Address, s.Address = a }",
        "{ (s, g, a) | s in Student, g in Gender, a in Address, s.Gender = g, s.Address = a }",
        "{ e | e in SC, e.Course = \"c2\" }",
        "{ x | x in Student, exists x in Course: (x = \"c1\") }",
        "{ x | x in Student, not (exists e in SC: (e.Student = x and e.Course = \"c2\")) }",
        "{ x | x in Student, x in Student, not (x in Course) }",
        "{ x, y | x in Student, y in Student, x.Gender = y.Gender, x != y }",
    ] {
        agree(src, &school);
    }
    let family = fixtures::family();
    for src in [
        "{ x | x in Person, exists y in Person: isParent(y.DeweyCode, x.DeweyCode) }",
        "{ x, y | x in Person, y in Person, isChild(x.DeweyCode, y.DeweyCode) }",
        "{ x, y | x in Person, y in Person, isDescendant(x.DeweyCode, y.DeweyCode) }",
        "{ x, y | x in Person, y in Person, isPrecedingSibling(x.DeweyCode, y.DeweyCode) }",
        "{ x, y | x in Person, y in Person, isFollowingSibling(x.DeweyCode, y.DeweyCode) }",
        "{ x, y | x in Person, y in Person, isPreceding(x.DeweyCode, y.DeweyCode) }",
        "{ x, y | x in Person, y in Person, not isFollowing(x.DeweyCode, y.DeweyCode) }",
        "{ d | d in DeweyCode, forall e in DeweyCode: (not isAncestor(e, d)) }",
    ] {
        agree(src, &family);
    }
    let friends = fixtures::friends();
    for src in [
        "{ a, b | a in Source, b in Target, nhop[Edge, 1](a, b) }",
        "{ a, b | a in Source, b in Target, nhop[Edge, 2](a, b) and not reach[Edge](b, a) }",
        "{ a | a in Source, reach[Edge](a, a) }",
    ] {
        agree(src, &friends);
    }
}

#[test]
fn vacuous_quantifiers() {
    let school = fixtures::school();
    let got = agree("{ x | x in Student, forall e in SC: (e.Course = \"c3\" -> e.Student = x) }", &school);
    assert_eq!(got.len(), 4);
    // an empty range: the universal holds everywhere, the existential nowhere
    let empty = crate::model::InstanceCategory::new(
        school.objects().cloned().map(|mut o| {
            if o.name == "Course" {
                o.elements.clear();
            }
            o
        }),
        std::iter::empty(),
    )
    .unwrap();
    assert_eq!(agree("{ x | x in Student, forall c in Course: (c = \"c1\") }", &empty).len(), 4);
    assert_eq!(agree("{ x | x in Student, exists c in Course: (c = c) }", &empty).len(), 0);
    assert_eq!(agree("{ x | x in Student, (exists c in Course: (c = c) or x = \"s1\") }", &empty).len(), 1);
}

#[test]
fn range_literals_refine_ranges() {
    let nq_inst = fixtures::school();
    let q = parse_query("{ x | x in Student, not (x in Address) }", &nq_inst).unwrap();
    let nq = normalize(&q, &nq_inst).unwrap();
    let ranges = gen_ranges(&nq);
    let refined = clause_range("x", &ranges["x"], &nq.clauses[0]);
    assert_eq!(refined, AlgebraExpr::base("Student").difference(AlgebraExpr::base("Address")));
    let union = parse_query("{ x | x in Student union Course }", &nq_inst).unwrap();
    let nq = normalize(&union, &nq_inst).unwrap();
    assert!(matches!(gen_ranges(&nq)["x"], AlgebraExpr::Union(..)));
    assert_eq!(agree("{ x | x in Student union Course }", &nq_inst).len(), 6);
}

#[test]
fn unsafe_queries_do_not_compile() {
    let inst = fixtures::school();
    let q = crate::calculus::parse_query_syntax("{ x | x in Student or x in Course }").unwrap();
    assert!(matches!(compile(&q, &inst), Err(CompileError::Unsafe(_))));
    let text = Value::from("s1");
    assert_eq!(text.to_string(), "s1");
}
