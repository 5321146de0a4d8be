use super::*;
use crate::algebra::{eval_set, CatExpr, CatObject, Condition, FunctionExpr as F, MorphismDecl, Operand, TreeAxis};
use crate::calculus::parse_query;
use crate::check::fixtures;
use crate::compiler::compile;
use crate::model::{CmpOp, InstanceCategory, Value};

use AlgebraExpr as E;

fn eq(f: F, v: Value) -> Condition {
    Condition::new(Operand::Fn(f), CmpOp::Eq, Operand::Const(v))
}

fn obj(expr: AlgebraExpr, alias: &str) -> CatObject {
    CatObject { expr, alias: Some(alias.to_string()) }
}

fn morph(func: F, src: usize, dst: usize) -> MorphismDecl {
    MorphismDecl { func, src, dst }
}

/// Student `s` with its gender `g`.
fn student_gender() -> CatExpr {
    CatExpr::new(
        vec![obj(E::base("Student"), "s"), obj(E::base("Gender"), "g")],
        vec![morph(F::path(["Gender"]), 0, 1)],
    )
}

/// Apply rule `id` at the root and check both plans evaluate identically.
fn fires(id: u8, e: &AlgebraExpr, inst: &InstanceCategory) -> AlgebraExpr {
    let out = rule(id).unwrap().apply(e, inst).unwrap_or_else(|| panic!("rule {id} did not fire on {e}"));
    assert_eq!(eval_set(&out, inst).unwrap(), eval_set(e, inst).unwrap(), "rule {id}: {e} => {out}");
    out
}

fn skips(id: u8, e: &AlgebraExpr, inst: &InstanceCategory) {
    assert_eq!(rule(id).unwrap().apply(e, inst), None, "rule {id} fired on {e}");
}

#[test]
fn cascade_fuses_paths() {
    let inst = fixtures::school();
    let e = E::base("SC").map(F::path(["Student"])).map(F::path(["Gender"]));
    assert_eq!(fires(1, &e, &inst), E::base("SC").map(F::path(["Student", "Gender"])));
    skips(1, &E::base("Student").map(F::path(["Gender"])), &inst);
    let composed = E::base("SC").map(F::Compose(vec!["SC.Student".into()])).map(F::Compose(vec!["Student.Gender".into()]));
    assert_eq!(fires(1, &composed, &inst), E::base("SC").map(F::Compose(vec!["SC.Student".into(), "Student.Gender".into()])));
}

#[test]
fn projection_of_a_limit() {
    let inst = fixtures::school();
    let lim = E::Lim(student_gender());
    assert_eq!(fires(2, &lim.clone().project(["s"]), &inst), E::base("Student").rename(["s"]));
    skips(2, &lim.project(["g"]), &inst);
    let free = E::Lim(CatExpr::discrete([E::base("Student"), E::base("Course")]));
    assert_eq!(fires(2, &free.clone().project(["Course"]), &inst), E::base("Course"));
    let no_courses = InstanceCategory::new(
        inst.objects().cloned().map(|mut o| {
            if o.name == "Course" {
                o.elements.clear();
            }
            o
        }),
        std::iter::empty(),
    )
    .unwrap();
    skips(2, &free.project(["Student"]), &no_courses);
}

#[test]
fn selection_into_a_limit() {
    let inst = fixtures::school();
    let lim = E::Lim(student_gender());
    let on_source = lim.clone().select(eq(F::component_path("s", ["Gender"]), "Male".into()));
    let pushed = fires(3, &on_source, &inst);
    let E::Lim(cat) = &pushed else { panic!("{pushed}") };
    assert!(matches!(cat.objects[0].expr, E::Select(..)));
    assert_eq!(cat.objects[1].expr, E::base("Gender"));

    // the target side is filtered together with its preimage
    let on_target = lim.clone().select(eq(F::component("g"), "Female".into()));
    let E::Lim(cat) = fires(3, &on_target, &inst) else { panic!() };
    assert!(cat.objects.iter().all(|o| matches!(o.expr, E::Select(..))));

    let joint = lim.select(Condition::new(
        Operand::Fn(F::component_path("s", ["Gender"])),
        CmpOp::Eq,
        Operand::Fn(F::component("g")),
    ));
    skips(3, &joint, &inst);
}

#[test]
fn selection_into_reachability() {
    let inst = fixtures::friends();
    let reach = E::reach(E::base("Source"), E::base("Target"), E::base("Edge"));
    let by_source = reach.clone().select(eq(F::component_path("Source", ["SName"]), "John".into()));
    assert!(matches!(fires(4, &by_source, &inst), E::GetReach(s, ..) if matches!(*s, E::Select(..))));
    let by_target = E::nhop(E::base("Source"), E::base("Target"), E::base("Edge"), 2)
        .select(eq(F::component_path("Target", ["TName"]), "Paul".into()));
    assert!(matches!(fires(4, &by_target, &inst), E::GetNHop(_, t, ..) if matches!(*t, E::Select(..))));
    skips(4, &reach, &inst);
}

#[test]
fn selection_into_a_tree_axis() {
    let inst = fixtures::family();
    let anc = E::tree(TreeAxis::Ancestor, E::base("DeweyCode"), E::base("DeweyCode"));
    let code: Value = Value::Dewey("1.1".parse().unwrap());
    let below = anc.clone().select(eq(F::component("DeweyCode#2"), code.clone()));
    let pushed = fires(5, &below, &inst);
    assert_eq!(
        pushed,
        E::tree(TreeAxis::Ancestor, E::base("DeweyCode"), E::base("DeweyCode").select(eq(F::component("DeweyCode"), code)))
    );
    skips(5, &anc, &inst);
}

#[test]
fn maps_over_products() {
    let inst = fixtures::school();
    // gender is not injective on students; the equation holds regardless
    let split = E::base("Student").map(F::path(["Gender"])).product(E::base("Course").map(F::identity()));
    let fused = fires(6, &split, &inst);
    assert!(matches!(&fused, E::Map(_, F::ProductOf(..))));
    assert_eq!(fires(6, &fused, &inst), split);
    let empty = E::base("Student").map(F::path(["Gender"])).product(E::base("Course").difference(E::base("Course")).map(F::identity()));
    assert!(eval_set(&fires(6, &empty, &inst), &inst).unwrap().is_empty());
}

#[test]
fn projection_through_a_limit() {
    let inst = fixtures::school();
    let pairs = CatExpr::new(
        vec![CatObject { expr: E::base("Student").product(E::base("Course")), alias: None }, obj(E::base("Student"), "s")],
        vec![morph(F::component("Student"), 0, 1)],
    );
    let lim = E::Lim(pairs);
    let out = fires(7, &lim.clone().project(["Student", "s"]), &inst);
    assert!(matches!(&out, E::Lim(c) if matches!(c.morphisms[0].func, F::Table(_))));
    // a student determines nothing about the course dropped from the pair
    skips(7, &lim.clone().project(["Course", "s"]), &inst);
    fires(7, &lim.project(["Student", "Course", "s"]), &inst);
}

#[test]
fn maps_through_a_limit() {
    let inst = fixtures::school();
    let lim = E::Lim(student_gender());
    fires(8, &lim.clone().map(F::ProductOf(Box::new(F::identity()), Box::new(F::identity()))), &inst);
    // s1 and s4 share an address but not a gender
    skips(8, &lim.map(F::ProductOf(Box::new(F::path(["Address"])), Box::new(F::identity()))), &inst);
}

#[test]
fn limit_and_reachability_commute() {
    let inst = fixtures::friends();
    let named = CatExpr::new(
        vec![obj(E::base("Source"), "x"), obj(E::base("SName"), "n")],
        vec![morph(F::path(["SName"]), 0, 1)],
    );
    let filtered = E::Lim(named).select(Condition::new(Operand::Fn(F::component("n")), CmpOp::Ne, Operand::Const("Sam".into())));
    let after = E::reach(filtered.project(["x"]), E::base("Target"), E::base("Edge")).project(["x"]);
    let before = fires(9, &after, &inst);
    assert!(matches!(&before, E::Project(c, _) if matches!(**c, E::Select(..))));
    assert_eq!(fires(9, &before, &inst), after);
}

#[test]
fn base_estimates_are_exact() {
    let inst = fixtures::school();
    assert_eq!(estimate(&E::base("Student"), &inst), 4.0);
    assert_eq!(estimate(&E::Lim(student_gender()), &inst), 4.0);
    assert!(cost(&E::base("Student"), &inst) < cost(&E::base("Student").rename(["s"]), &inst));
}

#[test]
fn optimizing_the_male_students_plan() {
    let inst = fixtures::school();
    let plan = compile(&parse_query(fixtures::MALE_STUDENTS_QUERY, &inst).unwrap(), &inst).unwrap();
    let out = optimize(&plan, &inst, DEFAULT_MAX_PASSES);
    assert!(out.trace.iter().any(|s| s.rule == 3), "{:?}", out.trace);
    assert!(out.after < out.before);
    assert_eq!(eval_set(&out.plan, &inst).unwrap(), eval_set(&plan, &inst).unwrap());
    assert_eq!(replay(&plan, &out.trace, &inst).unwrap(), out.plan);
    let again = optimize(&out.plan, &inst, DEFAULT_MAX_PASSES);
    assert!(again.trace.is_empty(), "{:?}", again.trace);
    assert_eq!(again.plan, out.plan);
}

#[test]
fn optimal_plans_are_left_alone() {
    let inst = fixtures::school();
    let out = optimize(&E::base("Student"), &inst, DEFAULT_MAX_PASSES);
    assert!(out.trace.is_empty());
    assert_eq!(out.before, out.after);
    assert_eq!(Step { rule: 3, path: vec![0, 2] }.to_string(), "applied rule 3 at /0/2");
    let bad = [Step { rule: 3, path: vec![] }];
    assert_eq!(replay(&E::base("Student"), &bad, &inst), Err(ReplayError::DoesNotApply { index: 0, rule: 3 }));
}
