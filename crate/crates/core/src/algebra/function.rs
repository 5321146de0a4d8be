use std::sync::Arc;

use super::extset::packed_components;
use super::{AlgebraError, Column, FunctionExpr};
use crate::model::{compose, InstanceCategory, ModelError, Morphism, ObjectKind, Value};

type Apply = dyn Fn(&[Value]) -> Option<Vec<Value>> + Send + Sync;

/// A function expression bound to an input schema, ready to apply per row.
/// Application returns `None` where the function is undefined.
pub struct ResolvedFn {
    pub output: Vec<Column>,
    apply: Box<Apply>,
}

impl ResolvedFn {
    pub fn apply(&self, row: &[Value]) -> Option<Vec<Value>> {
        (self.apply)(row)
    }
}

impl std::fmt::Debug for ResolvedFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResolvedFn").field("output", &self.output).finish_non_exhaustive()
    }
}

fn unresolvable(e: ModelError) -> AlgebraError {
    AlgebraError::UnresolvablePath(e.to_string())
}

/// Normalise path hops into object names: a hop naming a component of the
/// current relationship object stands for that component's object.
pub fn normalize_hops(inst: &InstanceCategory, start: &str, hops: &[String]) -> Result<Vec<String>, AlgebraError> {
    let mut here = start.to_string();
    let mut out = Vec::with_capacity(hops.len());
    for hop in hops {
        let next = if inst.morphism_between(&here, hop).is_some() {
            hop.clone()
        } else {
            inst.object(&here)
                .filter(|o| o.kind == ObjectKind::Relationship)
                .and_then(|o| o.components.iter().find(|c| &c.name == hop))
                .map(|c| c.object.clone())
                .ok_or_else(|| {
                    AlgebraError::UnresolvablePath(format!("no morphism from {here} to {hop}"))
                })?
        };
        out.push(next.clone());
        here = next;
    }
    Ok(out)
}

fn single_sort<'a>(input: &'a [Column], what: &str) -> Result<&'a str, AlgebraError> {
    match input {
        [c] => c.sort.as_deref().ok_or_else(|| {
            AlgebraError::UnresolvablePath(format!("column {} has no known object to start {what} from", c.name))
        }),
        _ => Err(AlgebraError::ArityMismatch { op: what.to_string(), expected: 1, found: input.len() }),
    }
}

fn from_morphism(m: Arc<Morphism>) -> ResolvedFn {
    ResolvedFn {
        output: vec![Column::of_object(&m.target)],
        apply: Box::new(move |row| m.apply(&row[0]).map(|v| vec![v.clone()])),
    }
}

pub fn resolve(f: &FunctionExpr, input: &[Column], inst: &InstanceCategory) -> Result<ResolvedFn, AlgebraError> {
    match f {
        FunctionExpr::Path(hops) if hops.is_empty() => {
            Ok(ResolvedFn { output: input.to_vec(), apply: Box::new(|row| Some(row.to_vec())) })
        }
        FunctionExpr::Path(hops) => {
            let start = single_sort(input, "path")?;
            let hops = normalize_hops(inst, start, hops)?;
            inst.resolve_path(start, &hops).map(from_morphism).map_err(unresolvable)
        }
        FunctionExpr::Compose(names) => {
            let start = single_sort(input, "compose")?;
            let mut current: Option<Morphism> = None;
            let mut here = start.to_string();
            for name in names {
                let m = inst.morphism(name).ok_or_else(|| AlgebraError::UnknownMorphism(name.clone()))?;
                if m.source != here {
                    return Err(AlgebraError::UnresolvablePath(format!(
                        "morphism {name} starts at {}, not {here}",
                        m.source
                    )));
                }
                current = Some(match current {
                    None => m.clone(),
                    Some(c) => compose(&c, m).map_err(unresolvable)?,
                });
                here = m.target.clone();
            }
            match current {
                None => resolve(&FunctionExpr::identity(), input, inst),
                Some(m) => Ok(from_morphism(Arc::new(m))),
            }
        }
        FunctionExpr::ProductOf(f, g) => {
            let [a, b] = input else {
                return Err(AlgebraError::ArityMismatch { op: "product_of".into(), expected: 2, found: input.len() });
            };
            let rf = resolve(f, std::slice::from_ref(a), inst)?;
            let rg = resolve(g, std::slice::from_ref(b), inst)?;
            let mut output = rf.output.clone();
            output.extend(rg.output.clone());
            Ok(ResolvedFn {
                output,
                apply: Box::new(move |row| {
                    let mut out = rf.apply(&row[..1])?;
                    out.extend(rg.apply(&row[1..2])?);
                    Some(out)
                }),
            })
        }
        FunctionExpr::ComponentThen(name, rest) => {
            if let Some(idx) = input.iter().position(|c| &c.name == name) {
                let inner = resolve(rest, std::slice::from_ref(&input[idx]), inst)?;
                return Ok(ResolvedFn {
                    output: inner.output.clone(),
                    apply: Box::new(move |row| inner.apply(std::slice::from_ref(&row[idx]))),
                });
            }
            let component = packed_components(input, inst)
                .and_then(|cols| cols.into_iter().find(|c| &c.name == name))
                .ok_or_else(|| AlgebraError::UnknownComponent {
                    component: name.clone(),
                    available: input.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "),
                })?;
            let inner = resolve(rest, std::slice::from_ref(&component), inst)?;
            let name = name.clone();
            Ok(ResolvedFn {
                output: inner.output.clone(),
                apply: Box::new(move |row| {
                    let v = row[0].component(&name)?.clone();
                    inner.apply(&[v])
                }),
            })
        }
        FunctionExpr::Table(t) => {
            let t = Arc::clone(t);
            Ok(ResolvedFn { output: t.output.clone(), apply: Box::new(move |row| t.mapping.get(row).cloned()) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RelComponent, SetObject};

    fn inst() -> InstanceCategory {
        let s = |n: &str, xs: &[&str]| SetObject::with_elements(n, ObjectKind::Entity, xs.iter().map(|x| Value::from(*x)));
        let t = |a: &str, b: &str| Value::Tuple(vec![("student".into(), a.into()), ("course".into(), b.into())]);
        let sc = SetObject::relationship(
            "SC",
            vec![
                RelComponent { name: "student".into(), object: "Student".into() },
                RelComponent { name: "course".into(), object: "Course".into() },
            ],
            [t("s1", "c1"), t("s2", "c1")],
        );
        InstanceCategory::new(
            vec![s("Student", &["s1", "s2"]), s("Course", &["c1"]), s("Gender", &["F", "M"]), sc],
            vec![
                Morphism::declared("Student.Gender", "Student", "Gender", [("s1".into(), "F".into()), ("s2".into(), "M".into())]),
                Morphism::declared("SC.student", "SC", "Student", [(t("s1", "c1"), "s1".into()), (t("s2", "c1"), "s2".into())]),
                Morphism::declared("SC.course", "SC", "Course", [(t("s1", "c1"), "c1".into()), (t("s2", "c1"), "c1".into())]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn component_hops_resolve_to_projections() {
        let inst = inst();
        let f = resolve(&FunctionExpr::path(["student", "Gender"]), &[Column::of_object("SC")], &inst).unwrap();
        let row = vec![Value::Tuple(vec![("student".into(), "s2".into()), ("course".into(), "c1".into())])];
        assert_eq!(f.apply(&row), Some(vec![Value::from("M")]));
        assert_eq!(f.output, vec![Column::of_object("Gender")]);
        let g = resolve(&FunctionExpr::component_path("student", ["Gender"]), &[Column::of_object("SC")], &inst).unwrap();
        assert_eq!(g.apply(&row), f.apply(&row));
    }

    #[test]
    fn compose_checks_endpoints() {
        let inst = inst();
        let f = FunctionExpr::Compose(vec!["SC.student".into(), "Student.Gender".into()]);
        assert!(resolve(&f, &[Column::of_object("SC")], &inst).is_ok());
        assert!(resolve(&f, &[Column::of_object("Student")], &inst).is_err());
    }

    #[test]
    fn product_of_on_pairs() {
        let inst = inst();
        let f = FunctionExpr::ProductOf(Box::new(FunctionExpr::path(["Gender"])), Box::new(FunctionExpr::identity()));
        let r = resolve(&f, &[Column::of_object("Student"), Column::of_object("Course")], &inst).unwrap();
        assert_eq!(r.apply(&["s1".into(), "c1".into()]), Some(vec!["F".into(), "c1".into()]));
    }
}
