use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use super::{ModelError, Value, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    Entity,
    Attribute,
    Relationship,
}

impl ObjectKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "entity" => Some(ObjectKind::Entity),
            "attribute" => Some(ObjectKind::Attribute),
            "relationship" => Some(ObjectKind::Relationship),
            _ => None,
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectKind::Entity => "entity",
            ObjectKind::Attribute => "attribute",
            ObjectKind::Relationship => "relationship",
        })
    }
}

/// A named component of a relationship object and the object it projects to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelComponent {
    pub name: String,
    pub object: String,
}

/// An object of the category: a finite set of values of one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SetObject {
    pub name: String,
    pub kind: ObjectKind,
    pub elements: BTreeSet<Value>,
    /// Present iff `kind == Relationship`.
    pub components: Vec<RelComponent>,
}

impl SetObject {
    pub fn new(name: impl Into<String>, kind: ObjectKind) -> Self {
        SetObject { name: name.into(), kind, elements: BTreeSet::new(), components: Vec::new() }
    }

    pub fn with_elements(
        name: impl Into<String>,
        kind: ObjectKind,
        elements: impl IntoIterator<Item = Value>,
    ) -> Self {
        SetObject { elements: elements.into_iter().collect(), ..SetObject::new(name, kind) }
    }

    pub fn relationship(
        name: impl Into<String>,
        components: Vec<RelComponent>,
        elements: impl IntoIterator<Item = Value>,
    ) -> Self {
        SetObject {
            name: name.into(),
            kind: ObjectKind::Relationship,
            elements: elements.into_iter().collect(),
            components,
        }
    }

    pub fn arity(&self) -> usize {
        if self.kind == ObjectKind::Relationship {
            self.components.len()
        } else {
            1
        }
    }

    pub fn value_kind(&self) -> Option<ValueKind> {
        self.elements.iter().next().map(Value::kind)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn validate(&self) -> Result<(), ModelError> {
        let mut kinds = self.elements.iter().map(Value::kind);
        if let Some(first) = kinds.next() {
            if kinds.any(|k| k != first) {
                return Err(ModelError::MixedKinds(self.name.clone()));
            }
        }
        if self.kind == ObjectKind::Relationship {
            if self.components.is_empty() {
                return Err(ModelError::BadRelationship(self.name.clone(), "no components".into()));
            }
            let names: BTreeSet<_> = self.components.iter().map(|c| &c.name).collect();
            if names.len() != self.components.len() {
                return Err(ModelError::BadRelationship(
                    self.name.clone(),
                    "duplicate component names".into(),
                ));
            }
            for e in &self.elements {
                let ok = match e {
                    Value::Tuple(fields) => {
                        fields.len() == self.components.len()
                            && fields.iter().zip(&self.components).all(|((n, _), c)| *n == c.name)
                    }
                    _ => false,
                };
                if !ok {
                    return Err(ModelError::BadRelationship(
                        self.name.clone(),
                        format!("element {e} does not match the declared components"),
                    ));
                }
            }
        } else if !self.components.is_empty() {
            return Err(ModelError::BadRelationship(
                self.name.clone(),
                "components declared on a non-relationship object".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Declared,
    /// Projection of a relationship onto its i-th component (0-based).
    Projection(usize),
    /// Composite of the named stored morphisms, applied left to right.
    Composite(Vec<String>),
}

/// A total function between two objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Morphism {
    pub name: String,
    pub source: String,
    pub target: String,
    pub mapping: BTreeMap<Value, Value>,
    pub provenance: Provenance,
}

impl Morphism {
    pub fn declared(
        name: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
        mapping: impl IntoIterator<Item = (Value, Value)>,
    ) -> Self {
        Morphism {
            name: name.into(),
            source: source.into(),
            target: target.into(),
            mapping: mapping.into_iter().collect(),
            provenance: Provenance::Declared,
        }
    }

    pub fn identity(object: &SetObject) -> Self {
        Morphism {
            name: format!("id[{}]", object.name),
            source: object.name.clone(),
            target: object.name.clone(),
            mapping: object.elements.iter().map(|e| (e.clone(), e.clone())).collect(),
            provenance: Provenance::Composite(Vec::new()),
        }
    }

    pub fn apply(&self, x: &Value) -> Option<&Value> {
        self.mapping.get(x)
    }
}

/// Function composition: `compose(f, g)(x) = g(f(x))`.
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism, ModelError> {
    if f.target != g.source {
        return Err(ModelError::CompositionMismatch {
            first: f.name.clone(),
            second: g.name.clone(),
            first_end: f.target.clone(),
            second_start: g.source.clone(),
        });
    }
    let mut mapping = BTreeMap::new();
    for (x, y) in &f.mapping {
        let z = g.apply(y).ok_or_else(|| ModelError::TotalityViolation {
            morphism: g.name.clone(),
            element: y.to_string(),
        })?;
        mapping.insert(x.clone(), z.clone());
    }
    let chain_of = |m: &Morphism| match &m.provenance {
        Provenance::Composite(chain) => chain.clone(),
        _ => vec![m.name.clone()],
    };
    let mut chain = chain_of(f);
    chain.extend(chain_of(g));
    Ok(Morphism {
        name: chain.join(";"),
        source: f.source.clone(),
        target: g.target.clone(),
        mapping,
        provenance: Provenance::Composite(chain),
    })
}

/// A witness that the instance is not a thin category.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub source: String,
    pub target: String,
    /// A source element on which two paths disagree, when there is one.
    pub witness: Option<Value>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}: {}", self.source, self.target, self.detail)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness {w})")?;
        }
        Ok(())
    }
}

/// How far `check_thinness` follows composite paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThinnessMode {
    /// Paths of at most this many stored morphisms.
    Bounded(usize),
    /// Paths up to the number of objects; only sensible for tiny schemas.
    Exhaustive,
}

impl Default for ThinnessMode {
    fn default() -> Self {
        ThinnessMode::Bounded(3)
    }
}

/// The loaded database: objects, stored morphisms, and an index from
/// `(source, target)` to the unique morphism between them.
///
/// Immutable after construction. Composites built by [`resolve_path`] are
/// memoised behind a lock so concurrent readers can share them.
///
/// [`resolve_path`]: InstanceCategory::resolve_path
#[derive(Debug, Default)]
pub struct InstanceCategory {
    objects: BTreeMap<String, SetObject>,
    morphisms: BTreeMap<String, Morphism>,
    pair_index: BTreeMap<(String, String), String>,
    composites: RwLock<HashMap<(String, Vec<String>), Arc<Morphism>>>,
}

impl Clone for InstanceCategory {
    fn clone(&self) -> Self {
        InstanceCategory {
            objects: self.objects.clone(),
            morphisms: self.morphisms.clone(),
            pair_index: self.pair_index.clone(),
            composites: RwLock::new(HashMap::new()),
        }
    }
}

impl PartialEq for InstanceCategory {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects && self.morphisms == other.morphisms
    }
}

impl InstanceCategory {
    /// Build an instance, checking referential integrity, element kinds, and
    /// totality of every morphism. Thinness is not enforced here; see
    /// [`check_thinness`](Self::check_thinness).
    pub fn new(
        objects: impl IntoIterator<Item = SetObject>,
        morphisms: impl IntoIterator<Item = Morphism>,
    ) -> Result<Self, ModelError> {
        let mut object_map = BTreeMap::new();
        for o in objects {
            o.validate()?;
            if object_map.contains_key(&o.name) {
                return Err(ModelError::NameClash(o.name));
            }
            object_map.insert(o.name.clone(), o);
        }
        let mut morphism_map = BTreeMap::new();
        let mut pair_index = BTreeMap::new();
        for m in morphisms {
            let source = object_map
                .get(&m.source)
                .ok_or_else(|| ModelError::UnknownObject(m.source.clone()))?;
            let target = object_map
                .get(&m.target)
                .ok_or_else(|| ModelError::UnknownObject(m.target.clone()))?;
            for x in &source.elements {
                let y = m.apply(x).ok_or_else(|| ModelError::TotalityViolation {
                    morphism: m.name.clone(),
                    element: x.to_string(),
                })?;
                if !target.elements.contains(y) {
                    return Err(ModelError::TotalityViolation {
                        morphism: m.name.clone(),
                        element: format!("{x} (image {y} not in {})", m.target),
                    });
                }
            }
            if let Some(extra) = m.mapping.keys().find(|x| !source.elements.contains(*x)) {
                return Err(ModelError::TotalityViolation {
                    morphism: m.name.clone(),
                    element: format!("{extra} (not an element of {})", m.source),
                });
            }
            if morphism_map.contains_key(&m.name) {
                return Err(ModelError::NameClash(m.name));
            }
            pair_index.entry((m.source.clone(), m.target.clone())).or_insert_with(|| m.name.clone());
            morphism_map.insert(m.name.clone(), m);
        }
        Ok(InstanceCategory {
            objects: object_map,
            morphisms: morphism_map,
            pair_index,
            composites: RwLock::new(HashMap::new()),
        })
    }

    pub fn objects(&self) -> impl Iterator<Item = &SetObject> {
        self.objects.values()
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &Morphism> {
        self.morphisms.values()
    }

    pub fn object(&self, name: &str) -> Option<&SetObject> {
        self.objects.get(name)
    }

    pub fn morphism(&self, name: &str) -> Option<&Morphism> {
        self.morphisms.get(name)
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.contains_key(name)
    }

    /// The stored morphism from `source` to `target`, if any.
    pub fn morphism_between(&self, source: &str, target: &str) -> Option<&Morphism> {
        self.pair_index
            .get(&(source.to_string(), target.to_string()))
            .and_then(|n| self.morphisms.get(n))
    }

    pub fn pair_index(&self) -> &BTreeMap<(String, String), String> {
        &self.pair_index
    }

    /// Resolve the path notation `x · S1 · ... · Sn` starting at object
    /// `start` into one composite morphism. An empty path yields the identity.
    pub fn resolve_path(&self, start: &str, path: &[String]) -> Result<Arc<Morphism>, ModelError> {
        let key = (start.to_string(), path.to_vec());
        if let Some(m) = self.composites.read().expect("composite cache poisoned").get(&key) {
            return Ok(Arc::clone(m));
        }
        let start_obj = self.object(start).ok_or_else(|| ModelError::UnknownObject(start.to_string()))?;
        let mut current = Morphism::identity(start_obj);
        let mut here = start;
        for next in path {
            let hop = self.morphism_between(here, next).ok_or_else(|| ModelError::MissingMorphism {
                from: here.to_string(),
                to: next.clone(),
            })?;
            current = if matches!(&current.provenance, Provenance::Composite(c) if c.is_empty()) {
                Morphism {
                    provenance: Provenance::Composite(vec![hop.name.clone()]),
                    name: hop.name.clone(),
                    ..hop.clone()
                }
            } else {
                compose(&current, hop)?
            };
            here = next;
        }
        let resolved = Arc::new(current);
        self.composites
            .write()
            .expect("composite cache poisoned")
            .insert(key, Arc::clone(&resolved));
        Ok(resolved)
    }

    /// Target object of a path, without materialising the composite.
    pub fn path_target<'a>(&'a self, start: &'a str, path: &'a [String]) -> Result<&'a str, ModelError> {
        if !self.has_object(start) {
            return Err(ModelError::UnknownObject(start.to_string()));
        }
        let mut here = start;
        for next in path {
            if self.morphism_between(here, next).is_none() {
                return Err(ModelError::MissingMorphism { from: here.to_string(), to: next.clone() });
            }
            here = next;
        }
        Ok(here)
    }

    /// Composites memoised so far, keyed by their morphism chain.
    pub fn cached_composites(&self) -> Vec<Arc<Morphism>> {
        self.composites.read().expect("composite cache poisoned").values().cloned().collect()
    }

    /// Report every pair of objects joined by two different stored morphisms,
    /// or by two directed paths (up to the mode's length bound) whose
    /// composites disagree on some element. At most one violation per pair.
    pub fn check_thinness(&self, mode: ThinnessMode) -> Vec<Violation> {
        let max_len = match mode {
            ThinnessMode::Bounded(n) => n,
            ThinnessMode::Exhaustive => self.objects.len().max(1),
        };
        let mut outgoing: BTreeMap<&str, Vec<&Morphism>> = BTreeMap::new();
        for m in self.morphisms.values() {
            outgoing.entry(m.source.as_str()).or_default().push(m);
        }

        // composite mapping for every path, grouped by (source, target)
        let mut by_pair: BTreeMap<(String, String), Vec<(Vec<String>, BTreeMap<Value, Value>)>> =
            BTreeMap::new();
        let mut frontier: Vec<(Vec<String>, &str, BTreeMap<Value, Value>, String)> = Vec::new();
        for m in self.morphisms.values() {
            frontier.push((vec![m.name.clone()], m.target.as_str(), m.mapping.clone(), m.source.clone()));
        }
        for len in 1..=max_len {
            let mut next = Vec::new();
            for (chain, end, mapping, start) in frontier {
                if len < max_len {
                    for m in outgoing.get(end).into_iter().flatten() {
                        let composed: BTreeMap<Value, Value> = mapping
                            .iter()
                            .filter_map(|(x, y)| m.apply(y).map(|z| (x.clone(), z.clone())))
                            .collect();
                        let mut c = chain.clone();
                        c.push(m.name.clone());
                        next.push((c, m.target.as_str(), composed, start.clone()));
                    }
                }
                by_pair.entry((start, end.to_string())).or_default().push((chain, mapping));
            }
            frontier = next;
        }

        let mut violations = Vec::new();
        for ((source, target), paths) in by_pair {
            let direct: Vec<_> = paths.iter().filter(|(c, _)| c.len() == 1).collect();
            let disagreement = paths.iter().enumerate().find_map(|(i, (ca, ma))| {
                paths[i + 1..].iter().find_map(|(cb, mb)| {
                    ma.iter()
                        .find(|(x, y)| mb.get(*x) != Some(*y))
                        .map(|(x, _)| (ca.clone(), cb.clone(), x.clone()))
                })
            });
            if direct.len() > 1 {
                let names: Vec<_> = direct.iter().map(|(c, _)| c[0].as_str()).collect();
                violations.push(Violation {
                    source,
                    target,
                    witness: disagreement.map(|(_, _, w)| w),
                    detail: format!("multiple stored morphisms: {}", names.join(", ")),
                });
            } else if let Some((a, b, w)) = disagreement {
                violations.push(Violation {
                    source,
                    target,
                    witness: Some(w),
                    detail: format!("paths {} and {} disagree", a.join(";"), b.join(";")),
                });
            }
        }
        violations
    }

    /// Element counts per object, for summaries.
    pub fn cardinalities(&self) -> BTreeMap<&str, usize> {
        self.objects.iter().map(|(n, o)| (n.as_str(), o.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::Int(x)).collect()
    }

    fn map(pairs: &[(i64, i64)]) -> Vec<(Value, Value)> {
        pairs.iter().map(|&(a, b)| (Value::Int(a), Value::Int(b))).collect()
    }

    fn obj(name: &str, xs: &[i64]) -> SetObject {
        SetObject::with_elements(name, ObjectKind::Entity, ints(xs))
    }

    #[test]
    fn compose_is_function_composition() {
        let f = Morphism::declared("f", "A", "B", vec![(Value::text("a"), 1.into()), (Value::text("b"), 2.into())]);
        let g = Morphism::declared("g", "B", "C", vec![(1.into(), Value::text("x")), (2.into(), Value::text("x"))]);
        let h = compose(&f, &g).unwrap();
        assert_eq!(h.apply(&Value::text("a")), Some(&Value::text("x")));
        assert_eq!(h.apply(&Value::text("b")), Some(&Value::text("x")));
        assert_eq!(h.provenance, Provenance::Composite(vec!["f".into(), "g".into()]));
        assert!(matches!(compose(&g, &f), Err(ModelError::CompositionMismatch { .. })));
    }

    #[test]
    fn identity_law_and_associativity() {
        let a = obj("A", &[1, 2, 3]);
        let f = Morphism::declared("f", "A", "B", map(&[(1, 10), (2, 20), (3, 10)]));
        let g = Morphism::declared("g", "B", "C", map(&[(10, 5), (20, 6)]));
        let h = Morphism::declared("h", "C", "D", map(&[(5, 0), (6, 1)]));
        let id_a = Morphism::identity(&a);
        assert_eq!(compose(&id_a, &f).unwrap().mapping, f.mapping);
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        assert_eq!(left.mapping, right.mapping);
    }

    #[test]
    fn resolve_path_caches_composites() {
        let inst = InstanceCategory::new(
            vec![obj("A", &[1, 2]), obj("B", &[10, 20]), obj("C", &[7])],
            vec![
                Morphism::declared("f", "A", "B", map(&[(1, 10), (2, 20)])),
                Morphism::declared("g", "B", "C", map(&[(10, 7), (20, 7)])),
            ],
        )
        .unwrap();
        let p = inst.resolve_path("A", &["B".into(), "C".into()]).unwrap();
        assert_eq!(p.apply(&Value::Int(2)), Some(&Value::Int(7)));
        assert_eq!(p.provenance, Provenance::Composite(vec!["f".into(), "g".into()]));
        assert_eq!(inst.cached_composites().len(), 1);
        let id = inst.resolve_path("A", &[]).unwrap();
        assert_eq!(id.apply(&Value::Int(1)), Some(&Value::Int(1)));
        let err = inst.resolve_path("A", &["C".into()]).unwrap_err();
        assert_eq!(err, ModelError::MissingMorphism { from: "A".into(), to: "C".into() });
    }

    #[test]
    fn totality_is_enforced() {
        let err = InstanceCategory::new(
            vec![obj("A", &[1, 2]), obj("B", &[10])],
            vec![Morphism::declared("f", "A", "B", map(&[(1, 10)]))],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::TotalityViolation { .. }));
        let err = InstanceCategory::new(
            vec![obj("A", &[1]), obj("B", &[10])],
            vec![Morphism::declared("f", "A", "B", map(&[(1, 11)]))],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::TotalityViolation { .. }));
    }

    #[test]
    fn mixed_kind_objects_rejected() {
        let o = SetObject::with_elements("A", ObjectKind::Attribute, vec![Value::Int(1), Value::text("x")]);
        assert_eq!(InstanceCategory::new(vec![o], vec![]).unwrap_err(), ModelError::MixedKinds("A".into()));
    }

    #[test]
    fn parallel_morphisms_violate_thinness_once() {
        let inst = InstanceCategory::new(
            vec![obj("A", &[1, 2]), obj("B", &[10, 20])],
            vec![
                Morphism::declared("f", "A", "B", map(&[(1, 10), (2, 20)])),
                Morphism::declared("g", "A", "B", map(&[(1, 10), (2, 10)])),
            ],
        )
        .unwrap();
        let v = inst.check_thinness(ThinnessMode::default());
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].source.as_str(), v[0].target.as_str()), ("A", "B"));
        assert_eq!(v[0].witness, Some(Value::Int(2)));
    }

    #[test]
    fn commuting_triangle_is_thin() {
        let inst = InstanceCategory::new(
            vec![obj("A", &[1, 2]), obj("B", &[10, 20]), obj("C", &[0, 1])],
            vec![
                Morphism::declared("f", "A", "B", map(&[(1, 10), (2, 20)])),
                Morphism::declared("g", "B", "C", map(&[(10, 0), (20, 1)])),
                Morphism::declared("h", "A", "C", map(&[(1, 0), (2, 1)])),
            ],
        )
        .unwrap();
        assert!(inst.check_thinness(ThinnessMode::default()).is_empty());
        assert!(inst.check_thinness(ThinnessMode::Exhaustive).is_empty());
    }

    #[test]
    fn non_commuting_triangle_names_witness() {
        let inst = InstanceCategory::new(
            vec![obj("A", &[1, 2]), obj("B", &[10, 20]), obj("C", &[0, 1])],
            vec![
                Morphism::declared("f", "A", "B", map(&[(1, 10), (2, 20)])),
                Morphism::declared("g", "B", "C", map(&[(10, 0), (20, 1)])),
                Morphism::declared("h", "A", "C", map(&[(1, 0), (2, 0)])),
            ],
        )
        .unwrap();
        let v = inst.check_thinness(ThinnessMode::default());
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].source.as_str(), v[0].target.as_str()), ("A", "C"));
        assert_eq!(v[0].witness, Some(Value::Int(2)));
    }

    #[test]
    fn pair_index_is_a_bijection_on_thin_instances() {
        let inst = InstanceCategory::new(
            vec![obj("A", &[1]), obj("B", &[2]), obj("C", &[3])],
            vec![
                Morphism::declared("f", "A", "B", map(&[(1, 2)])),
                Morphism::declared("g", "B", "C", map(&[(2, 3)])),
            ],
        )
        .unwrap();
        assert_eq!(inst.pair_index().len(), inst.morphisms().count());
        for ((s, t), name) in inst.pair_index() {
            let m = inst.morphism(name).unwrap();
            assert_eq!((&m.source, &m.target), (s, t));
        }
    }
}
