use std::collections::BTreeMap;
use std::path::Path;

use super::{load_csv, load_edges, load_xml, Derivation, IngestError, MorphismDecl, Part, SchemaManifest, SourceDecl};
use crate::model::{InstanceCategory, ModelError, Morphism, SetObject, ThinnessMode, Value};

/// Parse a manifest and load everything it declares.
pub fn load_manifest(path: &Path) -> Result<InstanceCategory, IngestError> {
    let manifest = SchemaManifest::from_file(path)?;
    let parts = load_sources(&manifest)?;
    assemble(parts, &manifest)
}

/// Load the CSV and XML sources of a manifest, one thread per file. Edge
/// lists are resolved against node objects and so wait for [`assemble`].
pub fn load_sources(manifest: &SchemaManifest) -> Result<Vec<Part>, IngestError> {
    std::thread::scope(|s| {
        let handles: Vec<_> = manifest
            .sources
            .iter()
            .filter_map(|src| match src {
                SourceDecl::Csv(d) => Some(s.spawn(move || load_csv(d))),
                SourceDecl::Xml(d) => Some(s.spawn(move || load_xml(d))),
                SourceDecl::Edges(_) => None,
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("source loader panicked")).collect()
    })
}

#[derive(Default)]
struct Merged {
    objects: BTreeMap<String, SetObject>,
    morphisms: BTreeMap<String, Morphism>,
}

impl Merged {
    fn add(&mut self, part: Part, manifest: &SchemaManifest) -> Result<(), IngestError> {
        for o in part.objects {
            match self.objects.get_mut(&o.name) {
                None => {
                    self.objects.insert(o.name.clone(), o);
                }
                Some(existing) if manifest.objects.contains_key(&o.name) => {
                    if existing.kind != o.kind || existing.components != o.components {
                        return Err(IngestError::KindMismatch {
                            name: o.name.clone(),
                            declared: existing.kind.to_string(),
                            actual: o.kind.to_string(),
                        });
                    }
                    existing.elements.extend(o.elements);
                }
                Some(_) => return Err(IngestError::NameClash(o.name)),
            }
        }
        for m in part.morphisms {
            if self.morphisms.contains_key(&m.name) {
                return Err(IngestError::NameClash(m.name));
            }
            self.morphisms.insert(m.name.clone(), m);
        }
        Ok(())
    }

    fn object(&self, name: &str) -> Result<&SetObject, IngestError> {
        self.objects.get(name).ok_or_else(|| IngestError::UnknownObject(name.to_string()))
    }

    fn derive(&self, decl: &MorphismDecl) -> Result<Morphism, IngestError> {
        let src = self.object(&decl.source)?;
        let dst = self.object(&decl.target)?;
        let missing = |x: &Value, why: String| IngestError::TotalityViolation {
            morphism: decl.name.clone(),
            element: format!("{x} ({why})"),
        };
        let lookup = |x: &Value, image: Value| {
            if dst.elements.contains(&image) {
                Ok((x.clone(), image))
            } else {
                Err(missing(x, format!("{image} is not an element of {}", dst.name)))
            }
        };
        let mapping = match &decl.via {
            Derivation::Key => src.elements.iter().map(|x| lookup(x, x.clone())).collect::<Result<Vec<_>, _>>()?,
            Derivation::Parent => src
                .elements
                .iter()
                .map(|x| {
                    let parent = x
                        .as_dewey()
                        .and_then(|d| d.parent())
                        .ok_or_else(|| missing(x, "not an XML node with a parent".into()))?;
                    lookup(x, Value::Dewey(parent))
                })
                .collect::<Result<Vec<_>, _>>()?,
            Derivation::Column(attr) => {
                let column = self
                    .morphisms
                    .values()
                    .find(|m| m.source == decl.source && &m.target == attr)
                    .ok_or_else(|| ModelError::MissingMorphism { from: decl.source.clone(), to: attr.clone() })?;
                src.elements
                    .iter()
                    .map(|x| {
                        let v = column.apply(x).ok_or_else(|| missing(x, format!("no {attr} value")))?;
                        lookup(x, v.clone())
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        Ok(Morphism::declared(&decl.name, &decl.source, &decl.target, mapping))
    }
}

/// Merge loaded parts, attach edge lists and manifest-declared morphisms,
/// and validate the result: totality of every morphism and thinness.
///
/// Object names must be disjoint across parts unless the manifest declares
/// the object with an `object` line, in which case the element sets are
/// united.
pub fn assemble(parts: Vec<Part>, manifest: &SchemaManifest) -> Result<InstanceCategory, IngestError> {
    let mut merged = Merged::default();
    for part in parts {
        merged.add(part, manifest)?;
    }
    for src in &manifest.sources {
        if let SourceDecl::Edges(decl) = src {
            let part = load_edges(decl, merged.object(&decl.source)?, merged.object(&decl.target)?)?;
            merged.add(part, manifest)?;
        }
    }
    let derived = manifest.morphisms.iter().map(|d| merged.derive(d)).collect::<Result<Vec<_>, _>>()?;
    merged.add(Part { objects: Vec::new(), morphisms: derived }, manifest)?;

    for (name, kind) in &manifest.objects {
        let o = merged.object(name)?;
        if o.kind != *kind {
            return Err(IngestError::KindMismatch {
                name: name.clone(),
                declared: kind.to_string(),
                actual: o.kind.to_string(),
            });
        }
    }

    let inst = InstanceCategory::new(merged.objects.into_values(), merged.morphisms.into_values()).map_err(
        |e| match e {
            ModelError::TotalityViolation { morphism, element } => IngestError::TotalityViolation { morphism, element },
            ModelError::NameClash(n) => IngestError::NameClash(n),
            other => IngestError::Model(other),
        },
    )?;
    let violations = inst.check_thinness(ThinnessMode::default());
    if !violations.is_empty() {
        return Err(IngestError::ThinnessViolation(violations));
    }
    Ok(inst)
}
