use std::collections::{BTreeMap, BTreeSet};

use super::{morphism_name, parse_value, EdgesDecl, IngestError, Part};
use crate::model::{Morphism, Provenance, RelComponent, SetObject, Value, ValueKind};

/// Load a tab-separated edge list into a binary relationship object with
/// projection morphisms to its two endpoint objects.
pub fn load_edges(decl: &EdgesDecl, source: &SetObject, target: &SetObject) -> Result<Part, IngestError> {
    let text = std::fs::read_to_string(&decl.path).map_err(|e| IngestError::io(&decl.path, e))?;
    load_edges_str(&text, decl, source, target)
}

pub fn load_edges_str(
    text: &str,
    decl: &EdgesDecl,
    source: &SetObject,
    target: &SetObject,
) -> Result<Part, IngestError> {
    let (c1, c2) = &decl.components;
    let resolve = |raw: &str, node: &SetObject, row: usize| -> Result<Value, IngestError> {
        let dangling = || IngestError::DanglingEndpoint {
            file: decl.path.clone(),
            row,
            endpoint: raw.to_string(),
            object: node.name.clone(),
        };
        let kind = node.value_kind().unwrap_or(ValueKind::Text);
        let v = parse_value(raw, kind).ok_or_else(dangling)?;
        if node.elements.contains(&v) {
            Ok(v)
        } else {
            Err(dangling())
        }
    };

    let mut tuples = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b] = fields.as_slice() else {
            return Err(IngestError::Csv {
                file: decl.path.clone(),
                message: format!("row {row}: expected two tab-separated columns"),
            });
        };
        let a = resolve(a.trim(), source, row)?;
        let b = resolve(b.trim(), target, row)?;
        tuples.insert(Value::Tuple(vec![(c1.clone(), a), (c2.clone(), b)]));
    }

    let components = vec![
        RelComponent { name: c1.clone(), object: source.name.clone() },
        RelComponent { name: c2.clone(), object: target.name.clone() },
    ];
    let projection = |i: usize, comp: &str, node: &str| {
        let mapping: BTreeMap<Value, Value> = tuples
            .iter()
            .map(|t| (t.clone(), t.component(comp).expect("edge tuple has both components").clone()))
            .collect();
        Morphism {
            name: morphism_name(&decl.object, comp),
            source: decl.object.clone(),
            target: node.to_string(),
            mapping,
            provenance: Provenance::Projection(i),
        }
    };
    let morphisms = vec![projection(0, c1, &source.name), projection(1, c2, &target.name)];
    Ok(Part {
        objects: vec![SetObject::relationship(&decl.object, components, tuples.iter().cloned())],
        morphisms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectKind;

    fn decl() -> EdgesDecl {
        EdgesDecl {
            path: "e.tsv".into(),
            object: "Edge".into(),
            source: "Node".into(),
            target: "Node2".into(),
            components: ("source".into(), "target".into()),
        }
    }

    fn nodes(name: &str) -> SetObject {
        SetObject::with_elements(name, ObjectKind::Entity, ["a", "b", "c"].map(Value::from))
    }

    #[test]
    fn projections_are_definitional() {
        let part = load_edges_str("a\tb\nb\tc\n", &decl(), &nodes("Node"), &nodes("Node2")).unwrap();
        let edge = &part.objects[0];
        assert_eq!(edge.kind, ObjectKind::Relationship);
        assert_eq!(edge.len(), 2);
        let pi1 = &part.morphisms[0];
        let ab = Value::Tuple(vec![("source".into(), "a".into()), ("target".into(), "b".into())]);
        assert_eq!(pi1.apply(&ab), Some(&Value::from("a")));
        assert_eq!(part.morphisms[1].apply(&ab), Some(&Value::from("b")));
    }

    #[test]
    fn empty_and_dangling() {
        let part = load_edges_str("", &decl(), &nodes("Node"), &nodes("Node2")).unwrap();
        assert!(part.objects[0].is_empty());
        assert!(part.morphisms.iter().all(|m| m.mapping.is_empty()));
        let err = load_edges_str("a\tb\na\tz\n", &decl(), &nodes("Node"), &nodes("Node2")).unwrap_err();
        assert!(matches!(err, IngestError::DanglingEndpoint { row: 2, .. }));
    }
}
