//! Random instances, queries, graphs and trees.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::fixtures::binary_relationship;
use crate::model::{DeweyCode, InstanceCategory, Morphism, ObjectKind, SetObject, Value, ValueKind};

pub type CheckRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CheckRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Node labels shared by the `A` and `B` entities, so that `R ⊆ A × B`
/// doubles as an edge set.
pub const NODES: [&str; 6] = ["n1", "n2", "n3", "n4", "n5", "n6"];

/// Objects of the random schema: entities `A` and `B`, an integer attribute
/// `X` of `A`, a Dewey attribute `D` of `B`, and a relationship `R(A, B)`.
pub const SCHEMA_OBJECTS: [&str; 5] = ["A", "X", "B", "D", "R"];

/// Paths out of each schema object, with the object they land in.
pub fn schema_paths(object: &str) -> &'static [(&'static [&'static str], &'static str)] {
    match object {
        "A" => &[(&[], "A"), (&["X"], "X")],
        "B" => &[(&[], "B"), (&["D"], "D")],
        "R" => &[(&[], "R"), (&["A"], "A"), (&["B"], "B"), (&["A", "X"], "X"), (&["B", "D"], "D")],
        "X" => &[(&[], "X")],
        "D" => &[(&[], "D")],
        _ => &[],
    }
}

pub fn schema_kind(object: &str) -> ValueKind {
    match object {
        "A" | "B" => ValueKind::Text,
        "X" => ValueKind::Int,
        "D" => ValueKind::Dewey,
        _ => ValueKind::Tuple,
    }
}

fn subset<T: Clone>(rng: &mut CheckRng, pool: &[T], min: usize, max: usize) -> Vec<T> {
    let n = rng.gen_range(min..=max.min(pool.len()));
    let mut v: Vec<T> = pool.to_vec();
    v.shuffle(rng);
    v.truncate(n);
    v
}

/// A random rooted tree on `n` nodes as parent pointers: node 0 is the root
/// and every later node hangs off an earlier one. Children are ordered by
/// node index.
pub fn random_parents(rng: &mut CheckRng, n: usize) -> Vec<Option<usize>> {
    (0..n).map(|i| (i > 0).then(|| rng.gen_range(0..i))).collect()
}

/// Dewey labels for a parent-pointer tree whose root is labelled `1`.
pub fn dewey_labels(parents: &[Option<usize>]) -> Vec<DeweyCode> {
    let mut labels: Vec<DeweyCode> = Vec::with_capacity(parents.len());
    let mut next_child = vec![0u32; parents.len()];
    for p in parents {
        let label = match p {
            None => DeweyCode::new(vec![1]),
            Some(p) => {
                next_child[*p] += 1;
                labels[*p].child(next_child[*p])
            }
        };
        labels.push(label);
    }
    labels
}

fn total_map(rng: &mut CheckRng, from: &[Value], to: &[Value]) -> Vec<(Value, Value)> {
    from.iter().map(|x| (x.clone(), to.choose(rng).expect("non-empty codomain").clone())).collect()
}

/// A random instance of the five-object schema with at most six elements per
/// object. Entities are occasionally empty.
pub fn random_instance(rng: &mut CheckRng) -> InstanceCategory {
    let text = |xs: Vec<&str>| xs.into_iter().map(Value::from).collect::<Vec<_>>();
    let min_nodes = usize::from(!rng.gen_bool(0.1));
    let a = text(subset(rng, &NODES, min_nodes, 6));
    let b = text(subset(rng, &NODES, min_nodes, 6));
    let ints: Vec<Value> = (0..6).map(Value::Int).collect();
    let x = subset(rng, &ints, 1, 6);
    let tree_size = rng.gen_range(1..=6);
    let d: Vec<Value> = dewey_labels(&random_parents(rng, tree_size)).into_iter().map(Value::Dewey).collect();
    let mut pairs = Vec::new();
    for p in a.iter().flat_map(|p| b.iter().map(move |q| (p.clone(), q.clone()))) {
        pairs.push(p);
    }
    let pairs = subset(rng, &pairs, 0, 6);
    let (r, mut morphisms) = binary_relationship("R", ("A", "A"), ("B", "B"), &pairs);
    morphisms.push(Morphism::declared("A.X", "A", "X", total_map(rng, &a, &x)));
    morphisms.push(Morphism::declared("B.D", "B", "D", total_map(rng, &b, &d)));
    InstanceCategory::new(
        vec![
            SetObject::with_elements("A", ObjectKind::Entity, a),
            SetObject::with_elements("X", ObjectKind::Attribute, x),
            SetObject::with_elements("B", ObjectKind::Entity, b),
            SetObject::with_elements("D", ObjectKind::Attribute, d),
            r,
        ],
        morphisms,
    )
    .expect("generated instance is valid")
}

/// Random safe calculus queries over the five-object schema, as text.
pub struct QueryGen<'a> {
    rng: &'a mut CheckRng,
    quantifiers_left: usize,
    fresh: usize,
}

#[derive(Clone)]
struct Var {
    name: String,
    /// Home object, when paths may be taken from the variable.
    home: Option<&'static str>,
    kind: ValueKind,
}

impl<'a> QueryGen<'a> {
    pub fn new(rng: &'a mut CheckRng) -> Self {
        QueryGen { rng, quantifiers_left: 0, fresh: 0 }
    }

    /// A range object set and the home and kind of variables ranging over it.
    fn range(&mut self, allow_tuples: bool) -> (String, Option<&'static str>, ValueKind) {
        let roll = self.rng.gen_range(0..10);
        match roll {
            0 => ("A union B".into(), None, ValueKind::Text),
            1 => ("A intersect B".into(), Some("A"), ValueKind::Text),
            2 if allow_tuples => ("R".into(), Some("R"), ValueKind::Tuple),
            _ => {
                let o = *["A", "B", "X", "D", "A", "B"].choose(self.rng).expect("non-empty");
                (o.into(), Some(o), schema_kind(o))
            }
        }
    }

    fn constant(&mut self, kind: ValueKind) -> Option<String> {
        Some(match kind {
            ValueKind::Text => format!("\"{}\"", NODES.choose(self.rng).expect("non-empty")),
            ValueKind::Int => self.rng.gen_range(-1..7).to_string(),
            ValueKind::Dewey => {
                let codes = ["1", "1.1", "1.2", "1.1.1", "1.2.1", "1.3"];
                format!("dewey\"{}\"", codes.choose(self.rng).expect("non-empty"))
            }
            _ => return None,
        })
    }

    /// A path expression on some in-scope variable: text, kind, landing object.
    fn path(&mut self, scope: &[Var]) -> (String, ValueKind, Option<&'static str>) {
        let v = scope.choose(self.rng).expect("scope is never empty").clone();
        match v.home {
            None => (v.name, v.kind, None),
            Some(home) => {
                let (hops, lands) = *schema_paths(home).choose(self.rng).expect("every object has paths");
                let text = std::iter::once(v.name.as_str()).chain(hops.iter().copied()).collect::<Vec<_>>().join(".");
                (text, schema_kind(lands), Some(lands))
            }
        }
    }

    /// A path of the given kind, trying a few random picks.
    fn path_of_kind(&mut self, scope: &[Var], kind: ValueKind) -> Option<String> {
        (0..8).map(|_| self.path(scope)).find(|(_, k, _)| *k == kind).map(|(t, ..)| t)
    }

    fn atom(&mut self, scope: &[Var]) -> String {
        match self.rng.gen_range(0..12) {
            0..=4 => {
                let (left, kind, _) = self.path(scope);
                let op = *["=", "!=", "<", "<=", ">", ">="].choose(self.rng).expect("non-empty");
                let right = if self.rng.gen_bool(0.5) { self.constant(kind) } else { None };
                let right = right.or_else(|| self.path_of_kind(scope, kind)).unwrap_or_else(|| left.clone());
                format!("{left} {op} {right}")
            }
            5..=6 => {
                // a function term between two variables
                let (left, _, lands) = self.path(scope);
                let target = scope.iter().filter(|v| v.home.is_some() && v.home == lands).collect::<Vec<_>>();
                match target.choose(self.rng) {
                    Some(v) => format!("{left} = {}", v.name),
                    None => format!("{left} = {left}"),
                }
            }
            7 => {
                let pred = *[
                    "isParent",
                    "isChild",
                    "isAncestor",
                    "isDescendant",
                    "isSibling",
                    "isPreceding",
                    "isFollowing",
                    "isPrecedingSibling",
                    "isFollowingSibling",
                ]
                .choose(self.rng)
                .expect("non-empty");
                match (self.path_of_kind(scope, ValueKind::Dewey), self.path_of_kind(scope, ValueKind::Dewey)) {
                    (Some(a), Some(b)) => format!("{pred}({a}, {b})"),
                    _ => self.atom(scope),
                }
            }
            8 => match (self.path_of_kind(scope, ValueKind::Text), self.path_of_kind(scope, ValueKind::Text)) {
                (Some(a), Some(b)) if self.rng.gen_bool(0.5) => format!("reach[R]({a}, {b})"),
                (Some(a), Some(b)) => format!("nhop[R, {}]({a}, {b})", self.rng.gen_range(1..=3)),
                _ => self.atom(scope),
            },
            9 => {
                let v = scope.choose(self.rng).expect("non-empty");
                let set = match v.kind {
                    ValueKind::Text => *["A", "B"].choose(self.rng).expect("non-empty"),
                    ValueKind::Int => "X",
                    ValueKind::Dewey => "D",
                    _ => "R",
                };
                format!("{} in {set}", v.name)
            }
            10 => if self.rng.gen_bool(0.5) { "true" } else { "false" }.into(),
            _ => {
                let (left, kind, _) = self.path(scope);
                match self.constant(kind) {
                    Some(c) => format!("{left} = {c}"),
                    None => format!("{left} = {left}"),
                }
            }
        }
    }

    fn formula(&mut self, scope: &[Var], depth: usize) -> String {
        let roll = if depth == 0 { 9 } else { self.rng.gen_range(0..10) };
        if self.quantifiers_left > 0 && (roll < 3 || depth == 0) {
            self.quantifiers_left -= 1;
            self.fresh += 1;
            let name = format!("q{}", self.fresh);
            let (set, home, kind) = self.range(true);
            let q = if self.rng.gen_bool(0.5) { "exists" } else { "forall" };
            let mut inner = scope.to_vec();
            inner.push(Var { name: name.clone(), home, kind });
            let body = self.formula(&inner, depth.saturating_sub(1));
            return format!("{q} {name} in {set}: ({body})");
        }
        match roll {
            3 | 4 => format!("({} and {})", self.formula(scope, depth - 1), self.formula(scope, depth - 1)),
            5 | 6 => format!("({} or {})", self.formula(scope, depth - 1), self.formula(scope, depth - 1)),
            7 => format!("not ({})", self.formula(scope, depth - 1)),
            8 => format!("({} -> {})", self.formula(scope, depth - 1), self.formula(scope, depth - 1)),
            _ => self.atom(scope),
        }
    }

    /// One query with one or two targets and at most two quantifiers.
    pub fn query(&mut self) -> String {
        self.quantifiers_left = self.rng.gen_range(0..=2);
        self.fresh = 0;
        let n_targets = self.rng.gen_range(1..=2);
        let mut scope = Vec::new();
        let mut ranges = Vec::new();
        for i in 1..=n_targets {
            let (set, home, kind) = self.range(i == 1);
            let name = format!("t{i}");
            ranges.push(format!("{name} in {set}"));
            scope.push(Var { name, home, kind });
        }
        let targets: Vec<&str> = scope.iter().map(|v| v.name.as_str()).collect();
        let head = if targets.len() == 1 { targets[0].to_string() } else { format!("({})", targets.join(", ")) };
        let depth = self.rng.gen_range(1..=3);
        let body = self.formula(&scope, depth);
        format!("{{ {head} | {}, {body} }}", ranges.join(", "))
    }
}

/// A random digraph on `n` nodes with edge probability `p`, as index pairs.
pub fn random_digraph(rng: &mut CheckRng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn node_name(i: usize) -> Value {
    Value::Text(format!("v{i}"))
}

/// A graph instance: node sets `From` and `To` (all nodes), start and end
/// subsets `S` and `T`, and `E(from, to)`.
pub fn graph_instance(n: usize, edges: &[(usize, usize)], s: &[usize], t: &[usize]) -> InstanceCategory {
    let all: Vec<Value> = (0..n).map(node_name).collect();
    let pairs: Vec<(Value, Value)> = edges.iter().map(|&(a, b)| (node_name(a), node_name(b))).collect();
    let (e, morphisms) = binary_relationship("E", ("from", "From"), ("to", "To"), &pairs);
    let entity = |name: &str, xs: Vec<Value>| SetObject::with_elements(name, ObjectKind::Entity, xs);
    InstanceCategory::new(
        vec![
            entity("From", all.clone()),
            entity("To", all),
            entity("S", s.iter().copied().map(node_name).collect()),
            entity("T", t.iter().copied().map(node_name).collect()),
            e,
        ],
        morphisms,
    )
    .expect("graph instance is valid")
}

/// Random subset of `0..n`.
pub fn index_subset(rng: &mut CheckRng, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}
