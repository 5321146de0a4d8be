use std::collections::BTreeSet;

use super::*;
use crate::model::{InstanceCategory, Morphism, ObjectKind, RelComponent, SetObject, Value};

fn v(s: &str) -> Value {
    Value::from(s)
}

fn d(s: &str) -> Value {
    Value::Dewey(s.parse().unwrap())
}

fn rows(set: &ExtSet) -> Vec<Vec<String>> {
    set.rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

fn entity(name: &str, xs: &[&str]) -> SetObject {
    SetObject::with_elements(name, ObjectKind::Entity, xs.iter().map(|x| v(x)))
}

fn pair(a: &str, b: &str) -> Value {
    Value::Tuple(vec![("student".into(), v(a)), ("course".into(), v(b))])
}

/// Students, courses, genders and enrolments.
fn school() -> InstanceCategory {
    let enrol = [("s1", "c1"), ("s1", "c2"), ("s2", "c1"), ("s3", "c2")];
    let sc = SetObject::relationship(
        "SC",
        vec![
            RelComponent { name: "student".into(), object: "Student".into() },
            RelComponent { name: "course".into(), object: "Course".into() },
        ],
        enrol.iter().map(|(a, b)| pair(a, b)),
    );
    InstanceCategory::new(
        vec![
            entity("Student", &["s1", "s2", "s3"]),
            entity("Course", &["c1", "c2"]),
            entity("Gender", &["Female", "Male"]),
            sc,
        ],
        vec![
            Morphism::declared(
                "Student.Gender",
                "Student",
                "Gender",
                [("s1", "Female"), ("s2", "Male"), ("s3", "Male")].map(|(a, b)| (v(a), v(b))),
            ),
            Morphism::declared("SC.student", "SC", "Student", enrol.map(|(a, b)| (pair(a, b), v(a)))),
            Morphism::declared("SC.course", "SC", "Course", enrol.map(|(a, b)| (pair(a, b), v(b)))),
        ],
    )
    .unwrap()
}

fn run(src: &str, inst: &InstanceCategory) -> ExtSet {
    eval_set(&parse_algebra(src).unwrap(), inst).unwrap_or_else(|e| panic!("{src}: {e}"))
}

#[test]
fn map_collapses_to_a_set() {
    let inst = school();
    assert_eq!(rows(&run("map(base(Student), path(Gender))", &inst)), [["Female"], ["Male"]]);
    assert_eq!(rows(&run("map(base(SC), path(course))", &inst)), [["c1"], ["c2"]]);
}

#[test]
fn project_unpacks_relationships_and_reorders() {
    let inst = school();
    let p = run("project(base(SC), [course, student])", &inst);
    assert_eq!(p.column_names(), ["course", "student"]);
    assert_eq!(p.len(), 4);
    assert_eq!(rows(&run("project(base(SC), [student])", &inst)), [["s1"], ["s2"], ["s3"]]);
}

#[test]
fn select_filters_through_paths() {
    let inst = school();
    let s = run("select(base(SC), eq(path(student, Gender), \"Female\"))", &inst);
    assert_eq!(s.len(), 2);
    let err = eval_set(&parse_algebra("select(base(Student), eq(path(Gender), 3))").unwrap(), &inst).unwrap_err();
    assert!(matches!(err, AlgebraError::TypeMismatch(_)));
}

#[test]
fn division_examples() {
    let inst = school();
    // students enrolled in every course
    let q = run("divide(base(SC), [course], base(Course), [Course])", &inst);
    assert_eq!(rows(&q), [["s1"]]);
    // empty divisor: every candidate qualifies
    let q = run(
        "divide(base(SC), [course], select(base(Course), eq(path(), \"none\")), [Course])",
        &inst,
    );
    assert_eq!(q.len(), 3);
    // empty dividend
    let q = run(
        "divide(select(base(SC), eq(path(course), \"none\")), [course], base(Course), [Course])",
        &inst,
    );
    assert!(q.is_empty());
}

#[test]
fn set_operators() {
    let inst = school();
    let u = run("union(select(base(Student), eq(path(Gender), \"Male\")), select(base(Student), eq(path(), \"s1\")))", &inst);
    assert_eq!(u.len(), 3);
    assert!(run("difference(base(Student), base(Student))", &inst).is_empty());
    let p = run("product(base(Gender), base(Course))", &inst);
    assert_eq!(p.len(), 4);
    assert_eq!(p.column_names(), ["Gender", "Course"]);
    let e = parse_algebra("union(base(Student), base(SC))").unwrap();
    assert!(eval_set(&e, &inst).is_err());
    let pp = run("product(base(Course), base(Course))", &inst);
    assert_eq!(pp.column_names(), ["Course", "Course#2"]);
}

#[test]
fn lim_is_filtered_product() {
    let inst = school();
    let lim = run(
        "lim(cat([base(Student) as s, base(Gender) as g], [morph(path(Gender), 0, 1)]))",
        &inst,
    );
    assert_eq!(rows(&lim), [["s1", "Female"], ["s2", "Male"], ["s3", "Male"]]);
    assert_eq!(lim.column_names(), ["s", "g"]);
    let prod = run("lim(cat([base(Student), base(Course)], []))", &inst);
    assert_eq!(prod.rows, run("product(base(Student), base(Course))", &inst).rows);
    // a morphism into a set whose source element was filtered out is partial
    let e = parse_algebra(
        "cat([base(Student), select(base(Gender), eq(path(), \"Male\"))], [morph(path(Gender), 0, 1)])",
    )
    .unwrap();
    assert!(matches!(evaluate(&e, &inst), Err(AlgebraError::PartialFunction { .. })));
    // the smaller target seeds the join, which then runs backwards to every preimage
    let back = run("lim(cat([base(SC), base(Student)], [morph(path(student), 0, 1)]))", &inst);
    assert_eq!(back.len(), 4);
    assert!(back.rows.iter().all(|r| r[0].component("student") == Some(&r[1])));
}

#[test]
fn cat_is_a_category_value() {
    let inst = school();
    let e = parse_algebra("cat([base(Student), base(Gender)], [morph(path(Gender), 0, 1)])").unwrap();
    let Evaluated::Category(c) = evaluate(&e, &inst).unwrap() else { panic!() };
    assert_eq!(c.objects.len(), 2);
    assert_eq!(c.morphisms.len(), 1);
    let single = parse_algebra("cat([base(Student)], [])").unwrap();
    assert_eq!(eval_set(&single, &inst).unwrap().len(), 3);
}

fn tree_instance(codes: &[&str]) -> InstanceCategory {
    InstanceCategory::new(
        vec![SetObject::with_elements("D", ObjectKind::Entity, codes.iter().map(|c| d(c)))],
        vec![],
    )
    .unwrap()
}

#[test]
fn tree_axes_on_examples() {
    let inst = tree_instance(&["", "1", "1.1", "1.2", "2", "2.1"]);
    let parent = run("get_parent(base(D), base(D))", &inst);
    assert_eq!(parent.len(), 5);
    let anc = run("get_ancestor(base(D), base(D))", &inst);
    assert!(parent.rows.is_subset(&anc.rows));
    assert!(!anc.rows.iter().any(|r| r[0] == r[1]));
    assert!(anc.rows.contains(&vec![d(""), d("2.1")]));
    let sib = run("get_sibling(base(D), base(D))", &inst);
    assert!(sib.rows.contains(&vec![d("1.1"), d("1.2")]));
    assert!(!sib.rows.contains(&vec![d("1"), d("1.1")]));
    let pre = run("get_preceding(base(D), base(D))", &inst);
    assert!(!pre.rows.contains(&vec![d("1"), d("1.1")]));
    assert!(pre.rows.contains(&vec![d("1.2"), d("2")]));
    let fol = run("get_following(base(D), base(D))", &inst);
    let flipped: BTreeSet<Vec<Value>> = pre.rows.iter().map(|r| vec![r[1].clone(), r[0].clone()]).collect();
    assert_eq!(fol.rows, flipped);

    let prefix = tree_instance(&["1.2", "1.22"]);
    assert!(run("get_parent(base(D), base(D))", &prefix).is_empty());

    let school = school();
    let e = parse_algebra("get_parent(base(Student), base(Student))").unwrap();
    assert!(matches!(eval_set(&e, &school), Err(AlgebraError::KindMismatch { .. })));
}

fn graph(edges: &[(&str, &str)]) -> InstanceCategory {
    let nodes: BTreeSet<&str> = edges.iter().flat_map(|(a, b)| [*a, *b]).chain(["a", "b", "c"]).collect();
    let nodes: Vec<&str> = nodes.into_iter().collect();
    let t = |a: &str, b: &str| Value::Tuple(vec![("source".into(), v(a)), ("target".into(), v(b))]);
    let e = SetObject::relationship(
        "E",
        vec![
            RelComponent { name: "source".into(), object: "S".into() },
            RelComponent { name: "target".into(), object: "T".into() },
        ],
        edges.iter().map(|(a, b)| t(a, b)),
    );
    InstanceCategory::new(
        vec![entity("S", &nodes), entity("T", &nodes), e],
        vec![
            Morphism::declared("E.source", "E", "S", edges.iter().map(|(a, b)| (t(a, b), v(a)))),
            Morphism::declared("E.target", "E", "T", edges.iter().map(|(a, b)| (t(a, b), v(b)))),
        ],
    )
    .unwrap()
}

#[test]
fn reach_and_nhop() {
    let inst = graph(&[("a", "b"), ("b", "c")]);
    let r = run("get_reach(select(base(S), eq(path(), \"a\")), select(base(T), eq(path(), \"c\")), base(E))", &inst);
    assert_eq!(rows(&r), [["a", "c"]]);
    let one = run("get_nhop(select(base(S), eq(path(), \"a\")), base(T), base(E), 1)", &inst);
    assert_eq!(rows(&one), [["a", "b"]]);
    let two = run("get_nhop(select(base(S), eq(path(), \"a\")), base(T), base(E), 2)", &inst);
    assert_eq!(rows(&two), [["a", "b"], ["a", "c"]]);
    let e = parse_algebra("get_nhop(base(S), base(T), base(E), 0)").unwrap();
    assert_eq!(eval_set(&e, &inst).unwrap_err(), AlgebraError::InvalidHopCount(0));

    let cycle = graph(&[("a", "b"), ("b", "a")]);
    let r = run("get_reach(select(base(S), eq(path(), \"a\")), select(base(T), eq(path(), \"a\")), base(E))", &cycle);
    assert_eq!(rows(&r), [["a", "a"]]);
    let none = graph(&[]);
    assert!(run("get_reach(base(S), base(T), base(E))", &none).is_empty());
}

#[test]
fn typing_catches_bad_plans() {
    let inst = school();
    for (src, check) in [
        ("project(base(SC), [grade])", "UnknownComponent"),
        ("map(base(Student), path(Course))", "UnresolvablePath"),
        ("base(Nope)", "UnknownObject"),
        ("divide(base(SC), [course], base(Course), [])", "ComponentMismatch"),
        ("get_reach(base(Student), base(Student), base(Student))", "ArityMismatch"),
    ] {
        let e = parse_algebra(src).unwrap();
        let err = columns_of(&e, &inst).unwrap_err();
        assert!(format!("{err:?}").starts_with(check), "{src}: {err:?}");
    }
    let e = parse_algebra("project(base(SC), [student])").unwrap();
    assert_eq!(columns_of(&e, &inst).unwrap(), vec![Column::of_object("Student").renamed("student")]);
}

#[test]
fn select_on_empty_and_always_true() {
    let inst = school();
    let all = run("select(base(Student), eq(path(), path()))", &inst);
    assert_eq!(all.len(), 3);
    let none = run("select(select(base(Student), ne(path(), path())), eq(path(Gender), \"Male\"))", &inst);
    assert!(none.is_empty());
}
