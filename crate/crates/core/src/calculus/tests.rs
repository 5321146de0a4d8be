use super::*;
use crate::check::fixtures::{school, MALE_STUDENTS_QUERY};

fn rows(set: &crate::algebra::ExtSet) -> Vec<Vec<String>> {
    set.rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

fn count(f: &Formula, pred: &impl Fn(&Formula) -> bool) -> usize {
    let mut n = 0;
    f.visit(&mut |g| {
        if pred(g) {
            n += 1;
        }
    });
    n
}

#[test]
fn male_students_query_shape() {
    let q = parse_query(MALE_STUDENTS_QUERY, &school()).unwrap();
    assert_eq!(q.target_vars().len(), 2);
    let quants = |k: Quantifier| move |f: &Formula| matches!(f, Formula::Quant { q, .. } if *q == k);
    assert_eq!(count(&q.body, &quants(Quantifier::ForAll)), 1);
    assert_eq!(count(&q.body, &quants(Quantifier::Exists)), 3);
    let inner_functions = |f: &Formula| match f {
        Formula::Quant { q: Quantifier::ForAll, body, .. } => {
            count(body, &|g| matches!(g, Formula::Atom(a) if a.as_function_term().is_some()))
        }
        _ => 0,
    };
    let mut n = 0;
    q.body.visit(&mut |f| n += inner_functions(f));
    assert_eq!(n, 4);
    assert!(check_safety(&q).is_empty());
}

#[test]
fn male_students_query_answer() {
    let inst = school();
    let q = parse_query(MALE_STUDENTS_QUERY, &inst).unwrap();
    // the female students take c1 and c2; only s3 takes both
    assert_eq!(rows(&brute_eval(&inst, &q).unwrap()), [["s3", "a3"]]);
}

#[test]
fn resolution_errors() {
    let inst = school();
    assert_eq!(parse_query("{ x | y in Student }", &inst).unwrap_err(), CalculusError::UnboundVariable("x".into()));
    assert_eq!(parse_query("{ x | x in Nope }", &inst).unwrap_err(), CalculusError::UnknownObject("Nope".into()));
    assert!(matches!(
        parse_query("{ x | x in Student, x.Course = \"c1\" }", &inst),
        Err(CalculusError::UnresolvablePath { .. })
    ));
    assert!(matches!(
        parse_query("{ x | x in Student union Course, x.Gender = \"Male\" }", &inst),
        Err(CalculusError::AmbiguousPath { .. })
    ));
    assert!(matches!(
        parse_query("{ x | x in Student, reach[Course](x, x) }", &inst),
        Err(CalculusError::NotAnEdgeSet(_))
    ));
    let q = parse_query("{ x | x in Address }", &inst).unwrap();
    assert_eq!(q.target_vars(), ["x"]);
    assert_eq!(q.body.conjuncts().len(), 1);
}

#[test]
fn brute_eval_trivia() {
    let inst = school();
    let run = |src: &str| brute_eval(&inst, &parse_query(src, &inst).unwrap()).unwrap();
    assert!(run("{ x | x in Student, x = \"s1\", x = \"s2\" }").is_empty());
    assert_eq!(run("{ x | x in Student, true }").len(), 4);
    assert_eq!(run("{ x | x in Student, forall c in Course: (c = c) }").len(), 4);
    assert_eq!(run("{ g | g in Gender, exists s in Student: s.Gender = g }").len(), 2);
    assert_eq!(rows(&run("{ s | s in Student, exists e in SC: (e.Student = s and e.Course = \"c2\") }")), [["s2"], ["s3"]]);
    let unsafe_q = parse_query("{ x | x in Student or x in Course }", &inst).unwrap();
    assert!(matches!(brute_eval(&inst, &unsafe_q), Err(CalculusError::UnsafeQuery(_))));
    let mismatch = parse_query("{ x | x in Student, x.Gender = 3 }", &inst).unwrap();
    assert!(matches!(brute_eval(&inst, &mismatch), Err(CalculusError::TypeMismatch(_))));
}

fn safety_names(src: &str) -> Vec<String> {
    let f = parse_formula(src).unwrap_or_else(|e| panic!("{src}: {e}"));
    unsafe_names(&check_formula_safety(&f)).into_iter().map(String::from).collect()
}

#[test]
fn classification_table_safe_rows() {
    for src in crate::check::fixtures::SAFE_FORMULAS {
        assert!(safety_names(src).is_empty(), "{src}");
    }
}

#[test]
fn classification_table_unsafe_rows() {
    for (src, var) in crate::check::fixtures::UNSAFE_FORMULAS {
        assert_eq!(safety_names(src), [var], "{src}");
    }
}

#[test]
fn safety_rules_by_letter() {
    let rules = |src: &str| -> Vec<char> {
        check_formula_safety(&parse_formula(src).unwrap()).iter().map(|u| u.rule.letter()).collect()
    };
    assert_eq!(rules("x in A, (x.B = 1 or y in C)"), ['a', 'c']);
    assert_eq!(rules("x in A, not (y.B = x)"), ['a', 'd']);
    assert_eq!(rules("x in A, (x in B or x in C)"), Vec::<char>::new());
    assert_eq!(rules("x in A, forall y in B: (y.F = x -> y.G = 1)"), Vec::<char>::new());
}
