//! Small hand-built instances used by tests, the acceptance suite and the
//! CLI's self-check.

use crate::model::{InstanceCategory, Morphism, ObjectKind, RelComponent, SetObject, Value};

fn v(s: &str) -> Value {
    Value::from(s)
}

fn entity(name: &str, xs: &[&str]) -> SetObject {
    SetObject::with_elements(name, ObjectKind::Entity, xs.iter().map(|x| v(x)))
}

fn attribute(name: &str, xs: &[&str]) -> SetObject {
    SetObject::with_elements(name, ObjectKind::Attribute, xs.iter().map(|x| v(x)))
}

fn pair(c1: &str, a: &Value, c2: &str, b: &Value) -> Value {
    Value::Tuple(vec![(c1.to_string(), a.clone()), (c2.to_string(), b.clone())])
}

/// A binary relationship object with its two projection morphisms.
pub fn binary_relationship(
    name: &str,
    (c1, o1): (&str, &str),
    (c2, o2): (&str, &str),
    pairs: &[(Value, Value)],
) -> (SetObject, Vec<Morphism>) {
    let elems: Vec<Value> = pairs.iter().map(|(a, b)| pair(c1, a, c2, b)).collect();
    let obj = SetObject::relationship(
        name,
        vec![
            RelComponent { name: c1.into(), object: o1.into() },
            RelComponent { name: c2.into(), object: o2.into() },
        ],
        elems.iter().cloned(),
    );
    let first = Morphism::declared(
        format!("{name}.{c1}"),
        name,
        o1,
        elems.iter().zip(pairs).map(|(e, (a, _))| (e.clone(), a.clone())),
    );
    let second = Morphism::declared(
        format!("{name}.{c2}"),
        name,
        o2,
        elems.iter().zip(pairs).map(|(e, (_, b))| (e.clone(), b.clone())),
    );
    (obj, vec![first, second])
}

/// Students with gender and address, courses, and enrolments `SC`.
/// s1 (Female) takes c1; s2 (Female) takes c2; s3 (Male) takes c1 and c2;
/// s4 (Male) takes c1.
pub fn school() -> InstanceCategory {
    let enrol = [("s1", "c1"), ("s2", "c2"), ("s3", "c1"), ("s3", "c2"), ("s4", "c1")];
    let students = [("s1", "Female", "a1"), ("s2", "Female", "a2"), ("s3", "Male", "a3"), ("s4", "Male", "a1")];
    let pairs: Vec<(Value, Value)> = enrol.iter().map(|(a, b)| (v(a), v(b))).collect();
    let (sc, mut morphisms) = binary_relationship("SC", ("Student", "Student"), ("Course", "Course"), &pairs);
    morphisms.push(Morphism::declared("Student.Gender", "Student", "Gender", students.map(|(s, g, _)| (v(s), v(g)))));
    morphisms.push(Morphism::declared("Student.Address", "Student", "Address", students.map(|(s, _, a)| (v(s), v(a)))));
    InstanceCategory::new(
        vec![
            entity("Student", &["s1", "s2", "s3", "s4"]),
            entity("Course", &["c1", "c2"]),
            attribute("Gender", &["Female", "Male"]),
            attribute("Address", &["a1", "a2", "a3"]),
            sc,
        ],
        morphisms,
    )
    .expect("school fixture is a valid instance")
}

/// Names and tree positions of the family fixture.
pub const FAMILY: [(&str, &str, &str); 6] = [
    ("p1", "Adam", "1"),
    ("p2", "Beth", "1.1"),
    ("p3", "Carl", "1.2"),
    ("p4", "John", "1.1.1"),
    ("p5", "Dora", "1.2.1"),
    ("p6", "Evan", "1.1.1.1"),
];

/// A family tree: `Person` with `Name` and a Dewey-coded `DeweyCode`.
pub fn family() -> InstanceCategory {
    let names: Vec<&str> = FAMILY.iter().map(|(_, n, _)| *n).collect();
    let codes: Vec<Value> = FAMILY.iter().map(|(_, _, c)| Value::Dewey(c.parse().expect("valid code"))).collect();
    InstanceCategory::new(
        vec![
            entity("Person", &FAMILY.map(|(p, _, _)| p)),
            attribute("Name", &names),
            SetObject::with_elements("DeweyCode", ObjectKind::Attribute, codes.iter().cloned()),
        ],
        vec![
            Morphism::declared("Person.Name", "Person", "Name", FAMILY.map(|(p, n, _)| (v(p), v(n)))),
            Morphism::declared(
                "Person.DeweyCode",
                "Person",
                "DeweyCode",
                FAMILY.iter().zip(&codes).map(|((p, _, _), c)| (v(p), c.clone())),
            ),
        ],
    )
    .expect("family fixture is a valid instance")
}

/// Names and directed friendships of the social graph fixture.
pub const FRIENDS: [(&str, &str); 5] = [("n1", "n2"), ("n2", "n3"), ("n3", "n1"), ("n4", "n5"), ("n5", "n2")];

pub const FRIEND_NAMES: [(&str, &str); 6] =
    [("n1", "John"), ("n2", "Mary"), ("n3", "Paul"), ("n4", "Rita"), ("n5", "Sam"), ("n6", "Tess")];

/// A directed graph: nodes as `Source` and `Target`, and an `Edge`
/// relationship projecting onto them. Each side has its own name attribute
/// so that the two paths from `Edge` to a name stay distinct.
pub fn friends() -> InstanceCategory {
    let ids: Vec<&str> = FRIEND_NAMES.iter().map(|(n, _)| *n).collect();
    let names: Vec<&str> = FRIEND_NAMES.iter().map(|(_, n)| *n).collect();
    let pairs: Vec<(Value, Value)> = FRIENDS.iter().map(|(a, b)| (v(a), v(b))).collect();
    let (edge, mut morphisms) = binary_relationship("Edge", ("source", "Source"), ("target", "Target"), &pairs);
    for (obj, attr) in [("Source", "SName"), ("Target", "TName")] {
        morphisms.push(Morphism::declared(
            format!("{obj}.{attr}"),
            obj,
            attr,
            FRIEND_NAMES.map(|(id, n)| (v(id), v(n))),
        ));
    }
    InstanceCategory::new(
        vec![
            entity("Source", &ids),
            entity("Target", &ids),
            attribute("SName", &names),
            attribute("TName", &names),
            edge,
        ],
        morphisms,
    )
    .expect("friends fixture is a valid instance")
}

/// Male students with their addresses who attend every course some female
/// student attends.
pub const MALE_STUDENTS_QUERY: &str = r#"{ (x1, x2) | x1 in Student, x2 in Address, x1.Address = x2, x1.Gender = "Male",
  forall y1 in Student: (y1.Gender = "Female" ->
    exists y2 in SC: exists y3 in SC: exists y4 in Course:
      (y2.Student = x1 and y3.Student = y1 and y2.Course = y4 and y3.Course = y4)) }"#;

/// Names of all ancestors of John.
pub const ANCESTORS_QUERY: &str = r#"{ x | x in Name, exists y1 in Person: exists y2 in Person:
  (isAncestor(y1.DeweyCode, y2.DeweyCode) and y1.Name = x and y2.Name = "John") }"#;

/// Names of everyone reachable from John.
pub const REACHABLE_QUERY: &str = r#"{ x | x in TName, exists y1 in Source: exists y2 in Target:
  (reach[Edge](y1, y2) and y2.TName = x and y1.SName = "John") }"#;

/// Formulas whose variables are all safe, one per row of the
/// classification table. The projection row is written with a
/// relationship variable.
pub const SAFE_FORMULAS: [&str; 6] = [
    "x1 in O1",
    "x1 in O1 and not (x1 in O2)",
    "x1.S2 = x2 and x1 in S1 and x2 in S2",
    "r in R and r.S1 = x1 and r.S2 = x2 and x1 in S1 and x2 in S2",
    "x1 in S1 and x2 in S2 and reach[E](x1, x2) and x1.Name = \"John\"",
    "x1 in D1 and x2 in D2 and isAncestor(x1, x2)",
];

/// Unsafe formulas with the variable each must be reported for.
pub const UNSAFE_FORMULAS: [(&str, &str); 3] = [
    ("x2 in S2, x3 in S3, exists x1: (x1 > x3 and x2 = 6)", "x1"),
    ("forall x1: exists x2 in S2: (x1 > x2)", "x1"),
    ("(x1 in S1) or x1.F = \"a1\"", "x1"),
];
