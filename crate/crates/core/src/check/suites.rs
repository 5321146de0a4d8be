use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use super::gen::{self, schema_kind, schema_paths, CheckRng, QueryGen, NODES};
use super::oracle::{composite_divide, warshall, within_hops, PointerTree};
use crate::algebra::{
    divide, eval_set, AlgebraExpr as E, CatExpr, CatObject, Column, Condition, ExtSet, FunctionExpr as F,
    MorphismDecl, Operand, TreeAxis,
};
use crate::calculus::{brute_eval, parse_query};
use crate::compiler::compile;
use crate::model::{CmpOp, DeweyCode, InstanceCategory, Morphism, ObjectKind, SetObject, Value, ValueKind};
use crate::optimizer::{optimize, RewriteRule, DEFAULT_MAX_PASSES, RULES};

/// Result of one property run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub property: String,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {} trials, {} failures, {:.2?}", self.property, self.trials, self.failures, self.elapsed)?;
        if let Some(first) = &self.first_failure {
            write!(f, "\n  first failure: {first}")?;
        }
        Ok(())
    }
}

/// Accumulates trial results for one property.
struct Tally {
    property: String,
    trials: usize,
    failures: usize,
    first_failure: Option<String>,
    started: Instant,
}

impl Tally {
    fn new(property: impl Into<String>) -> Self {
        Tally { property: property.into(), trials: 0, failures: 0, first_failure: None, started: Instant::now() }
    }

    fn record(&mut self, result: Result<(), String>) {
        self.trials += 1;
        if let Err(why) = result {
            self.failures += 1;
            self.first_failure.get_or_insert(why);
        }
    }

    fn finish(self) -> Outcome {
        Outcome {
            property: self.property,
            trials: self.trials,
            failures: self.failures,
            first_failure: self.first_failure,
            elapsed: self.started.elapsed(),
        }
    }
}

fn same_rows(got: &ExtSet, want: &ExtSet, context: impl FnOnce() -> String) -> Result<(), String> {
    if got.rows == want.rows {
        Ok(())
    } else {
        Err(format!("{}: got {} rows, expected {}", context(), got.len(), want.len()))
    }
}

/// Compare a query's compiled plan, and its optimized plan, with the oracle.
pub fn check_query(src: &str, inst: &InstanceCategory) -> Result<(), String> {
    let q = parse_query(src, inst).map_err(|e| format!("{src}: {e}"))?;
    let oracle = brute_eval(inst, &q).map_err(|e| format!("{src}: oracle: {e}"))?;
    let plan = compile(&q, inst).map_err(|e| format!("{src}: compile: {e}"))?;
    let got = eval_set(&plan, inst).map_err(|e| format!("{src}: eval: {e}"))?;
    same_rows(&got, &oracle, || format!("{src}: compiled plan"))?;
    if got.column_names() != oracle.column_names() {
        return Err(format!("{src}: columns {:?} vs {:?}", got.column_names(), oracle.column_names()));
    }
    let opt = optimize(&plan, inst, DEFAULT_MAX_PASSES);
    let got = eval_set(&opt.plan, inst).map_err(|e| format!("{src}: optimized eval: {e}"))?;
    same_rows(&got, &oracle, || format!("{src}: optimized plan"))
}

/// Named queries evaluated on one instance.
pub fn golden_corpus<'a>(inst: &InstanceCategory, queries: impl IntoIterator<Item = (&'a str, &'a str)>) -> Outcome {
    let mut t = Tally::new("golden corpus: compiled plans equal the oracle");
    for (name, src) in queries {
        t.record(check_query(src, inst).map_err(|e| format!("{name}: {e}")));
    }
    t.finish()
}

/// `queries` random safe queries, each run on `instances` random instances.
pub fn compiler_equivalence(seed: u64, queries: usize, instances: usize) -> Outcome {
    let mut rng = gen::rng(seed);
    let texts: Vec<String> = {
        let mut g = QueryGen::new(&mut rng);
        (0..queries).map(|_| g.query()).collect()
    };
    let mut t = Tally::new(format!("compiled plans equal the oracle ({queries} queries x {instances} instances)"));
    for _ in 0..instances {
        let inst = gen::random_instance(&mut rng);
        for src in &texts {
            t.record(check_query(src, &inst));
        }
    }
    t.finish()
}

fn random_op(rng: &mut CheckRng) -> CmpOp {
    *CmpOp::ALL.choose(rng).expect("non-empty")
}

fn random_constant(rng: &mut CheckRng, kind: ValueKind) -> Value {
    match kind {
        ValueKind::Int => Value::Int(rng.gen_range(-1..7)),
        ValueKind::Dewey => {
            let codes = ["1", "1.1", "1.2", "1.1.1", "1.2.1", "1.3"];
            Value::Dewey(codes.choose(rng).expect("non-empty").parse().expect("valid code"))
        }
        _ => Value::from(*NODES.choose(rng).expect("non-empty")),
    }
}

/// A random comparison on column `col` whose values live in `home`.
fn random_condition(rng: &mut CheckRng, col: &str, home: &str) -> Condition {
    let choices: Vec<_> = schema_paths(home).iter().filter(|(_, lands)| *lands != "R").collect();
    let (hops, lands) = **choices.choose(rng).expect("a non-tuple path");
    let f = F::component_path(col, hops.iter().copied());
    Condition::new(Operand::Fn(f), random_op(rng), Operand::Const(random_constant(rng, schema_kind(lands))))
}

fn obj(expr: E, alias: Option<&str>) -> CatObject {
    CatObject { expr, alias: alias.map(String::from) }
}

fn morph(func: F, src: usize, dst: usize) -> MorphismDecl {
    MorphismDecl { func, src, dst }
}

/// Two schema objects joined by a morphism: (source, target, path).
const LINKED: [(&str, &str, &str); 4] = [("A", "X", "X"), ("B", "D", "D"), ("R", "A", "A"), ("R", "B", "B")];

/// A random two-object category over a linked pair, with optional aliases
/// and either object order. Returns the category and the objects' homes.
fn linked_pair(rng: &mut CheckRng, with_morphism: bool) -> (CatExpr, [&'static str; 2]) {
    let (s, t, hop) = *LINKED.choose(rng).expect("non-empty");
    let aliased = rng.gen_bool(0.5);
    let swap = rng.gen_bool(0.5);
    let (alias_s, alias_t) = if aliased { (Some("o1"), Some("o2")) } else { (None, None) };
    let mut objects = vec![obj(E::base(s), alias_s), obj(E::base(t), alias_t)];
    let (mut si, mut ti) = (0, 1);
    let mut homes = [s, t];
    if swap {
        objects.swap(0, 1);
        homes.swap(0, 1);
        (si, ti) = (1, 0);
    }
    let morphisms = if with_morphism { vec![morph(F::path([hop]), si, ti)] } else { Vec::new() };
    (CatExpr::new(objects, morphisms), homes)
}

fn lim_names(cat: &CatExpr) -> Vec<String> {
    cat.objects
        .iter()
        .map(|o| match (&o.alias, &o.expr) {
            (Some(a), _) => a.clone(),
            (None, E::Base(n)) => n.clone(),
            _ => String::new(),
        })
        .collect()
}

/// A random plan shaped so that rule `id` has a chance to fire at its root.
pub fn rule_candidate(id: u8, rng: &mut CheckRng) -> E {
    match id {
        1 => match rng.gen_range(0..4) {
            0 => {
                let (a, b) = *[("A", "X"), ("B", "D")].choose(rng).expect("non-empty");
                E::base("R").map(F::path([a])).map(F::path([b]))
            }
            1 => E::base("R").map(F::Compose(vec!["R.A".into()])).map(F::Compose(vec!["A.X".into()])),
            2 => E::base("A").map(F::identity()).map(F::path(["X"])),
            _ => E::base("R").map(F::component_path("R", ["B"])).map(F::path(["D"])),
        },
        2 => {
            let with_morphism = rng.gen_bool(0.6);
            let (cat, _) = linked_pair(rng, with_morphism);
            let names = lim_names(&cat);
            let side = rng.gen_range(0..2);
            E::Lim(cat).project([names[side].clone()])
        }
        3 => {
            let mut objects = vec![
                obj(E::base("R"), Some("r")),
                obj(E::base("A"), Some("a")),
                obj(E::base("B"), Some("b")),
            ];
            let mut morphisms = vec![morph(F::path(["A"]), 0, 1), morph(F::path(["B"]), 0, 2)];
            let mut homes = vec![("r", "R"), ("a", "A"), ("b", "B")];
            if rng.gen_bool(0.5) {
                objects.push(obj(E::base("X"), Some("x")));
                morphisms.push(morph(F::path(["X"]), 1, 3));
                homes.push(("x", "X"));
            }
            let (col, home) = *homes.choose(rng).expect("non-empty");
            E::Lim(CatExpr::new(objects, morphisms)).select(random_condition(rng, col, home))
        }
        4 => {
            let s = if rng.gen_bool(0.3) { E::base("A").select(random_condition(rng, "A", "A")) } else { E::base("A") };
            let inner = if rng.gen_bool(0.5) {
                E::reach(s, E::base("B"), E::base("R"))
            } else {
                E::nhop(s, E::base("B"), E::base("R"), rng.gen_range(1..=3))
            };
            let (col, home) = *[("A", "A"), ("B", "B")].choose(rng).expect("non-empty");
            inner.select(random_condition(rng, col, home))
        }
        5 => {
            let axis = *TreeAxis::ALL.choose(rng).expect("non-empty");
            let d2 = if rng.gen_bool(0.5) { E::base("D") } else { E::base("B").map(F::path(["D"])) };
            let col = *["D", "D#2"].choose(rng).expect("non-empty");
            E::tree(axis, E::base("D"), d2).select(random_condition(rng, col, "D"))
        }
        6 => {
            let pick = |rng: &mut CheckRng| {
                let (o, f) = *[("A", Some("X")), ("B", Some("D")), ("X", None), ("D", None), ("A", None)]
                    .choose(rng)
                    .expect("non-empty");
                (E::base(o), f.map_or_else(F::identity, |h| F::path([h])))
            };
            let ((a, f), (b, g)) = (pick(rng), pick(rng));
            if rng.gen_bool(0.5) {
                a.map(f).product(b.map(g))
            } else {
                a.product(b).map(F::ProductOf(Box::new(f), Box::new(g)))
            }
        }
        7 => {
            let (pair, attr, hop) = *[(["A", "X"], "X", "X"), (["B", "D"], "D", "D")].choose(rng).expect("non-empty");
            let whole = if rng.gen_bool(0.3) {
                // a relationship object and one of its projections
                let c = *["A", "B"].choose(rng).expect("non-empty");
                let cat = CatExpr::new(
                    vec![obj(E::base("R"), None), obj(E::base(c), Some("y"))],
                    vec![morph(F::path([c]), 0, 1)],
                );
                return E::Lim(cat).project(["R", "y"]);
            } else {
                CatExpr::new(
                    vec![obj(E::base(pair[0]).product(E::base(pair[1])), None), obj(E::base(attr), Some("y"))],
                    vec![morph(F::component_path(pair[0], [hop]), 0, 1)],
                )
            };
            let mut names: Vec<String> = pair.iter().filter(|_| rng.gen_bool(0.6)).map(|s| s.to_string()).collect();
            if names.is_empty() {
                names.push(pair[rng.gen_range(0..2)].to_string());
            }
            names.push("y".into());
            E::Lim(whole).project(names)
        }
        8 => {
            let (cat, homes) = linked_pair(rng, true);
            let g = |rng: &mut CheckRng, home: &str| {
                let (hops, _) = *schema_paths(home).choose(rng).expect("non-empty");
                F::path(hops.iter().copied())
            };
            let (g1, g2) = (g(rng, homes[0]), g(rng, homes[1]));
            E::Lim(cat).map(F::ProductOf(Box::new(g1), Box::new(g2)))
        }
        _ => {
            let cat = CatExpr::new(
                vec![obj(E::base("A"), Some("a")), obj(E::base("X"), Some("x"))],
                vec![morph(F::path(["X"]), 0, 1)],
            );
            let conds: Vec<Condition> = (0..rng.gen_range(0..=2))
                .map(|_| {
                    let (col, home) = *[("a", "A"), ("x", "X")].choose(rng).expect("non-empty");
                    random_condition(rng, col, home)
                })
                .collect();
            let wrap = |mut e: E| {
                for c in &conds {
                    e = e.select(c.clone());
                }
                e
            };
            if rng.gen_bool(0.5) {
                let filtered = wrap(E::Lim(cat)).project(["a"]);
                E::reach(filtered, E::base("B"), E::base("R")).project(["a"])
            } else {
                let mut cat = cat;
                cat.objects[0].expr = E::reach(E::base("A"), E::base("B"), E::base("R")).project(["A"]);
                wrap(E::Lim(cat)).project(["a"])
            }
        }
    }
}

/// Fire `rule` on random instances and plans until it has fired `trials`
/// times, comparing both plans' results each time.
pub fn rule_soundness(rule: &RewriteRule, seed: u64, trials: usize) -> Outcome {
    let mut rng = gen::rng(seed ^ (u64::from(rule.id) << 32));
    let mut t = Tally::new(format!("rule {} ({}) preserves results", rule.id, rule.name));
    let mut attempts = 0;
    while t.trials < trials && attempts < trials * 50 {
        attempts += 1;
        let inst = gen::random_instance(&mut rng);
        let plan = rule_candidate(rule.id, &mut rng);
        let Ok(before) = eval_set(&plan, &inst) else { continue };
        let Some(after_plan) = rule.apply(&plan, &inst) else { continue };
        let result = match eval_set(&after_plan, &inst) {
            Ok(after) => same_rows(&after, &before, || format!("rule {}: {plan} => {after_plan}", rule.id)),
            Err(e) => Err(format!("rule {}: {after_plan} fails: {e}", rule.id)),
        };
        t.record(result);
    }
    if t.trials < trials {
        let fired = t.trials;
        t.failures += 1;
        t.first_failure.get_or_insert(format!("rule {} fired only {fired} times in {attempts} attempts", rule.id));
    }
    t.finish()
}

pub fn all_rule_soundness(seed: u64, trials: usize) -> Vec<Outcome> {
    RULES.iter().map(|r| rule_soundness(r, seed, trials)).collect()
}

fn int_rows(rng: &mut CheckRng, arity: usize, max_rows: usize, domain: i64) -> BTreeSet<Vec<Value>> {
    let n = rng.gen_range(0..=max_rows);
    (0..n).map(|_| (0..arity).map(|_| Value::Int(rng.gen_range(0..domain))).collect()).collect()
}

/// Division against the composite difference-of-products formula.
pub fn division_identity(seed: u64, trials: usize) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("divide equals the difference-of-products formula");
    for _ in 0..trials {
        let r_arity = rng.gen_range(2..=4);
        let s_arity = rng.gen_range(1..r_arity);
        let mut positions: Vec<usize> = (0..r_arity).collect();
        positions.shuffle(&mut rng);
        let r_b: Vec<usize> = positions[..s_arity].to_vec();
        let s_b: Vec<usize> = (0..s_arity).collect();
        let r_rows = int_rows(&mut rng, r_arity, 16, 3);
        let s_rows = int_rows(&mut rng, s_arity, 4, 3);
        let r_cols: Vec<Column> = (0..r_arity).map(|i| Column::new(format!("r{i}"), None)).collect();
        let s_cols: Vec<Column> = (0..s_arity).map(|i| Column::new(format!("s{i}"), None)).collect();
        let a: Vec<String> = r_b.iter().map(|&i| format!("r{i}")).collect();
        let b: Vec<String> = s_b.iter().map(|&i| format!("s{i}")).collect();
        let r = ExtSet::from_rows(r_cols, r_rows.clone());
        let s = ExtSet::from_rows(s_cols, s_rows.clone());
        let want = composite_divide(&r_rows, r_arity, &r_b, &s_rows, &s_b);
        t.record(match divide(&r, &a, &s, &b) {
            Ok(got) if got.rows == want => Ok(()),
            Ok(got) => Err(format!("R={r_rows:?} on {a:?}, S={s_rows:?}: got {:?}, want {want:?}", got.rows)),
            Err(e) => Err(e.to_string()),
        });
    }
    t.finish()
}

fn pair_rows(pairs: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<Vec<Value>> {
    pairs.into_iter().map(|(a, b)| vec![gen::node_name(a), gen::node_name(b)]).collect()
}

/// `GetReach` against Warshall's closure, and `GetNHop` against bounded
/// matrix powers, nested inside one another.
pub fn reachability(seed: u64, trials: usize, max_nodes: usize) -> Vec<Outcome> {
    let mut rng = gen::rng(seed);
    let mut closure = Tally::new(format!("get_reach equals the transitive closure (digraphs up to {max_nodes} nodes)"));
    let mut hops = Tally::new("get_nhop(n) within get_nhop(n+1) within get_reach");
    for _ in 0..trials {
        let n = rng.gen_range(1..=max_nodes);
        let p = rng.gen_range(0.5..3.0) / n as f64;
        let edges = gen::random_digraph(&mut rng, n, p.min(1.0));
        let s = gen::index_subset(&mut rng, n);
        let t = gen::index_subset(&mut rng, n);
        let inst = gen::graph_instance(n, &edges, &s, &t);
        let tc = warshall(n, &edges);
        let want = pair_rows(s.iter().flat_map(|&a| t.iter().map(move |&b| (a, b))).filter(|&(a, b)| tc[a][b]));
        let reach = E::reach(E::base("S"), E::base("T"), E::base("E"));
        let got = match eval_set(&reach, &inst) {
            Ok(g) => g,
            Err(e) => {
                closure.record(Err(e.to_string()));
                continue;
            }
        };
        closure.record(if got.rows == want { Ok(()) } else { Err(format!("{n} nodes, edges {edges:?}")) });
        let mut previous: Option<BTreeSet<Vec<Value>>> = None;
        let mut result = Ok(());
        for k in 1..=4 {
            let bounded = within_hops(n, &edges, k);
            let want_k = pair_rows(s.iter().flat_map(|&a| t.iter().map(move |&b| (a, b))).filter(|&(a, b)| bounded[a][b]));
            let got_k = eval_set(&E::nhop(E::base("S"), E::base("T"), E::base("E"), k as i64), &inst)
                .map(|s| s.rows)
                .map_err(|e| e.to_string());
            result = result.and_then(|()| {
                let got_k = got_k?;
                if got_k != want_k {
                    return Err(format!("nhop {k} differs from the bounded closure on {edges:?}"));
                }
                if previous.as_ref().is_some_and(|p| !p.is_subset(&got_k)) || !got_k.is_subset(&got.rows) {
                    return Err(format!("nhop {k} breaks nesting on {edges:?}"));
                }
                previous = Some(got_k);
                Ok(())
            });
        }
        hops.record(result);
    }
    vec![closure.finish(), hops.finish()]
}

fn dewey_object(name: &str, codes: impl IntoIterator<Item = DeweyCode>) -> SetObject {
    SetObject::with_elements(name, ObjectKind::Attribute, codes.into_iter().map(Value::Dewey))
}

/// Tree axes against a parent-pointer tree.
pub fn tree_axes(seed: u64, trials: usize, max_nodes: usize) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new(format!("tree axes equal pointer-tree axes (trees up to {max_nodes} nodes)"));
    for _ in 0..trials {
        let n = rng.gen_range(1..=max_nodes);
        let parents = gen::random_parents(&mut rng, n);
        let labels = gen::dewey_labels(&parents);
        let tree = PointerTree::new(parents);
        let d1 = gen::index_subset(&mut rng, n);
        let d2 = gen::index_subset(&mut rng, n);
        let inst = InstanceCategory::new(
            vec![
                dewey_object("D1", d1.iter().map(|&i| labels[i].clone())),
                dewey_object("D2", d2.iter().map(|&i| labels[i].clone())),
            ],
            Vec::<Morphism>::new(),
        )
        .expect("two attribute objects");
        let mut result = Ok(());
        let mut parent_rows = BTreeSet::new();
        for axis in TreeAxis::ALL {
            let want: BTreeSet<Vec<Value>> = d1
                .iter()
                .flat_map(|&x| d2.iter().map(move |&y| (x, y)))
                .filter(|&(x, y)| tree.holds(axis, x, y))
                .map(|(x, y)| vec![Value::Dewey(labels[x].clone()), Value::Dewey(labels[y].clone())])
                .collect();
            let got = eval_set(&E::tree(axis, E::base("D1"), E::base("D2")), &inst).map_err(|e| e.to_string());
            result = result.and_then(|()| match got {
                Ok(g) if g.rows == want => Ok(()),
                Ok(g) => Err(format!("{}: got {} pairs, want {}", axis.keyword(), g.len(), want.len())),
                Err(e) => Err(e),
            });
            match axis {
                TreeAxis::Parent => parent_rows = want,
                TreeAxis::Ancestor if !parent_rows.is_subset(&want) => {
                    result = result.and(Err("a parent pair is not an ancestor pair".into()));
                }
                _ => {}
            }
        }
        let levels_ok = parent_rows.iter().all(|r| match (&r[0], &r[1]) {
            (Value::Dewey(a), Value::Dewey(b)) => a.level() + 1 == b.level(),
            _ => false,
        });
        t.record(result.and(if levels_ok { Ok(()) } else { Err("a parent pair skips a level".into()) }));
    }
    t.finish()
}

fn int_object(name: &str, xs: impl IntoIterator<Item = i64>) -> SetObject {
    SetObject::with_elements(name, ObjectKind::Attribute, xs.into_iter().map(Value::Int))
}

/// A limit over a chain `S1 → S2 → ... → Sn` sends every projected element
/// into the next object, and equals the filtered cartesian product.
pub fn chain_limits(seed: u64, trials: usize) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("limits over chains respect every morphism");
    for _ in 0..trials {
        let n = rng.gen_range(2..=4);
        let sets: Vec<Vec<i64>> = (0..n).map(|_| (0..rng.gen_range(1..=5)).map(|j| j * 10 + rng.gen_range(0..10)).collect()).collect();
        let sets: Vec<Vec<i64>> = sets.into_iter().map(|s| s.into_iter().collect::<BTreeSet<_>>().into_iter().collect()).collect();
        let maps: Vec<Vec<(i64, i64)>> = (0..n - 1)
            .map(|i| sets[i].iter().map(|&x| (x, *sets[i + 1].choose(&mut rng).expect("non-empty"))).collect())
            .collect();
        let names: Vec<String> = (1..=n).map(|i| format!("S{i}")).collect();
        let objects = names.iter().zip(&sets).map(|(nm, s)| int_object(nm, s.iter().copied()));
        let morphisms = maps.iter().enumerate().map(|(i, m)| {
            Morphism::declared(
                format!("f{}", i + 1),
                names[i].as_str(),
                names[i + 1].as_str(),
                m.iter().map(|&(a, b)| (Value::Int(a), Value::Int(b))),
            )
        });
        let inst = InstanceCategory::new(objects, morphisms).expect("chain instance");
        let cat = CatExpr::new(
            names.iter().map(|nm| obj(E::base(nm.as_str()), None)).collect(),
            (0..n - 1).map(|i| morph(F::path([names[i + 1].as_str()]), i, i + 1)).collect(),
        );
        let result = eval_set(&E::Lim(cat), &inst).map_err(|e| e.to_string()).and_then(|lim| {
            for i in 0..n - 1 {
                for row in &lim.rows {
                    let Value::Int(x) = row[i] else { return Err("non-integer component".into()) };
                    let image = maps[i].iter().find(|(a, _)| *a == x).map(|(_, b)| *b);
                    if !image.is_some_and(|y| sets[i + 1].contains(&y)) {
                        return Err(format!("{x} in S{} has no image in S{}", i + 1, i + 2));
                    }
                }
            }
            // every consistent tuple of the product
            let mut want: BTreeSet<Vec<Value>> = BTreeSet::new();
            for &x in &sets[0] {
                let mut row = vec![x];
                for m in &maps {
                    let last = *row.last().expect("non-empty");
                    row.push(m.iter().find(|(a, _)| *a == last).expect("total").1);
                }
                want.insert(row.into_iter().map(Value::Int).collect());
            }
            if lim.rows == want {
                Ok(())
            } else {
                Err(format!("limit has {} rows, the chain {}", lim.len(), want.len()))
            }
        });
        t.record(result);
    }
    t.finish()
}

fn text_object(name: &str, xs: &[&str]) -> SetObject {
    SetObject::with_elements(name, ObjectKind::Entity, xs.iter().map(|x| Value::from(*x)))
}

fn random_pairs(rng: &mut CheckRng, left: &[&str], right: &[&str], max: usize) -> Vec<(Value, Value)> {
    let mut all: Vec<(Value, Value)> =
        left.iter().flat_map(|a| right.iter().map(move |b| (Value::from(*a), Value::from(*b)))).collect();
    all.shuffle(rng);
    all.truncate(rng.gen_range(0..=max.min(all.len())));
    all
}

fn node_subset<'a>(rng: &mut CheckRng, min: usize) -> Vec<&'a str> {
    let mut v: Vec<&str> = NODES.to_vec();
    v.shuffle(rng);
    v.truncate(rng.gen_range(min..=NODES.len()));
    v.sort_unstable();
    v
}

/// Universal quantifiers over non-empty ranges, computed by dividing the
/// limit's projection onto the free and universal variables by the
/// product of the universal ranges.
pub fn division_pattern(seed: u64, trials: usize) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("nested universals equal division of the limit");
    for _ in 0..trials {
        let n = rng.gen_range(1..=2);
        let s1 = node_subset(&mut rng, 1);
        let ranges: Vec<Vec<&str>> = (0..n).map(|_| node_subset(&mut rng, 1)).collect();
        let mut objects = vec![text_object("S1", &s1)];
        let mut morphisms = Vec::new();
        for (i, r) in ranges.iter().enumerate() {
            let s = format!("S{}", i + 2);
            objects.push(text_object(&s, r));
            let pairs = random_pairs(&mut rng, &s1, r, 12);
            let (rel, ms) = super::fixtures::binary_relationship(&format!("R{}", i + 1), ("S1", "S1"), (&s, &s), &pairs);
            objects.push(rel);
            morphisms.extend(ms);
        }
        let inst = InstanceCategory::new(objects, morphisms).expect("division instance");

        let ys: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
        let zs: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
        let foralls: String = (0..n).map(|i| format!("forall {} in S{}: ", ys[i], i + 2)).collect();
        let exists: String = (0..n).map(|i| format!("exists {} in R{}: ", zs[i], i + 1)).collect();
        let terms: Vec<String> =
            (0..n).map(|i| format!("{z}.S1 = x1 and {z}.S{} = {}", i + 2, ys[i], z = zs[i])).collect();
        let src = format!("{{ x1 | x1 in S1, {foralls}{exists}({}) }}", terms.join(" and "));

        let mut objects = vec![obj(E::base("S1"), Some("x1"))];
        let mut decls = Vec::new();
        for i in 0..n {
            objects.push(obj(E::base(format!("S{}", i + 2)), Some(&ys[i])));
        }
        for i in 0..n {
            let z = objects.len();
            objects.push(obj(E::base(format!("R{}", i + 1)), Some(&zs[i])));
            decls.push(morph(F::path(["S1"]), z, 0));
            decls.push(morph(F::path([format!("S{}", i + 2)]), z, i + 1));
        }
        let lim = E::Lim(CatExpr::new(objects, decls));
        let mut kept = vec!["x1".to_string()];
        kept.extend(ys.iter().cloned());
        let divisor = (0..n)
            .map(|i| E::base(format!("S{}", i + 2)).rename([ys[i].clone()]))
            .reduce(E::product)
            .expect("at least one range");
        let plan = lim.project(kept).divide(ys.clone(), divisor, ys.clone()).project(["x1"]);

        let result = (|| {
            let q = parse_query(&src, &inst).map_err(|e| format!("{src}: {e}"))?;
            let oracle = brute_eval(&inst, &q).map_err(|e| e.to_string())?;
            let got = eval_set(&plan, &inst).map_err(|e| e.to_string())?;
            same_rows(&got, &oracle, || src.clone())?;
            check_query(&src, &inst)
        })();
        t.record(result);
    }
    t.finish()
}

/// Reachability joined with a relationship, against reach, limit and
/// projection composed by hand.
pub fn reach_join_pattern(seed: u64, trials: usize) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("reach joined with a relationship equals reach, limit, projection");
    let src = "{ (x1, x2) | x1 in S1, x2 in S2, reach[E](x1, x2), exists x3 in S3: (x3.S1 = x1 and x3.S2 = x2) }";
    for _ in 0..trials {
        let s1 = node_subset(&mut rng, 0);
        let s2 = node_subset(&mut rng, 0);
        let edges = random_pairs(&mut rng, &s1, &s2, 14);
        let joined = random_pairs(&mut rng, &s1, &s2, 10);
        let (e, mut morphisms) = super::fixtures::binary_relationship("E", ("S1", "S1"), ("S2", "S2"), &edges);
        let (s3, more) = super::fixtures::binary_relationship("S3", ("S1", "S1"), ("S2", "S2"), &joined);
        morphisms.extend(more.into_iter().map(|mut m| {
            m.name = format!("{}'", m.name);
            m
        }));
        let Ok(inst) = InstanceCategory::new(vec![text_object("S1", &s1), text_object("S2", &s2), e, s3], morphisms)
        else {
            t.record(Err("could not build the instance".into()));
            continue;
        };
        let s4 = E::reach(E::base("S1"), E::base("S2"), E::base("E"));
        let s5 = E::Lim(CatExpr::new(
            vec![
                obj(E::base("S1"), Some("a")),
                obj(E::base("S2"), Some("b")),
                obj(E::base("S3"), Some("c")),
                obj(s4, None),
            ],
            vec![
                morph(F::path(["S1"]), 2, 0),
                morph(F::path(["S2"]), 2, 1),
                morph(F::component("S1"), 3, 0),
                morph(F::component("S2"), 3, 1),
            ],
        ));
        let s6 = s5.project(["a", "b"]);
        let result = (|| {
            let q = parse_query(src, &inst).map_err(|e| e.to_string())?;
            let oracle = brute_eval(&inst, &q).map_err(|e| e.to_string())?;
            let got = eval_set(&s6, &inst).map_err(|e| e.to_string())?;
            same_rows(&got, &oracle, || format!("edges {edges:?}, S3 {joined:?}"))?;
            check_query(src, &inst)
        })();
        t.record(result);
    }
    t.finish()
}

/// A chain `S1 → S2 → S3` with `n` elements per object.
pub fn chain_instance(n: usize) -> InstanceCategory {
    let xs = |tag: &str| (0..n).map(|i| Value::Text(format!("{tag}{i}"))).collect::<Vec<_>>();
    let (s1, s2, s3) = (xs("a"), xs("b"), xs("c"));
    let f = Morphism::declared("S1.S2", "S1", "S2", s1.iter().cloned().zip(s2.iter().cloned()));
    let g = Morphism::declared("S2.S3", "S2", "S3", s2.iter().cloned().zip(s3.iter().cloned().rev()));
    InstanceCategory::new(
        vec![
            SetObject::with_elements("S1", ObjectKind::Entity, s1),
            SetObject::with_elements("S2", ObjectKind::Entity, s2),
            SetObject::with_elements("S3", ObjectKind::Entity, s3),
        ],
        [f, g],
    )
    .expect("chain instance")
}

pub const CHAIN_QUERY: &str = "{ (x, y, z) | x in S1, y in S2, z in S3, x.S2 = y, y.S3 = z }";

/// Median seconds to compile and evaluate the chain query at each size, and
/// the least-squares slope of log time against log size.
pub fn scaling(sizes: &[usize]) -> (Vec<(usize, f64)>, f64) {
    let mut points = Vec::new();
    for &n in sizes {
        let inst = chain_instance(n);
        let q = parse_query(CHAIN_QUERY, &inst).expect("chain query parses");
        let mut samples = Vec::new();
        let budget = Instant::now();
        while samples.len() < 5 || (budget.elapsed() < Duration::from_millis(200) && samples.len() < 2000) {
            let start = Instant::now();
            let plan = compile(&q, &inst).expect("chain query compiles");
            let out = eval_set(&plan, &inst).expect("chain plan evaluates");
            assert_eq!(out.len(), n);
            samples.push(start.elapsed().as_secs_f64());
        }
        samples.sort_by(f64::total_cmp);
        points.push((n, samples[samples.len() / 2]));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| ((n as f64).ln(), t.max(1e-9).ln())).collect();
    let k = logs.len() as f64;
    let (mx, my) = (logs.iter().map(|p| p.0).sum::<f64>() / k, logs.iter().map(|p| p.1).sum::<f64>() / k);
    let num: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (points, if den > 0.0 { num / den } else { 0.0 })
}

/// Every randomized property with `trials` trials each.
pub fn run_all(seed: u64, trials: usize) -> Vec<Outcome> {
    let mut out = vec![compiler_equivalence(seed, trials, (trials / 10).clamp(1, 20).min(trials))];
    out.extend(all_rule_soundness(seed, trials));
    out.push(division_identity(seed, trials));
    out.extend(reachability(seed, trials, 50));
    out.push(tree_axes(seed, trials, 40));
    out.push(chain_limits(seed, trials));
    out.push(division_pattern(seed, trials));
    out.push(reach_join_pattern(seed, trials));
    out
}

/// The safety classifier on the classification table's rows.
pub fn safety_table() -> Outcome {
    use super::fixtures::{SAFE_FORMULAS, UNSAFE_FORMULAS};
    use crate::calculus::{check_formula_safety, parse_formula, unsafe_names};
    let mut t = Tally::new("safety classifier reproduces the classification table");
    let names = |src: &str| -> Result<Vec<String>, String> {
        let f = parse_formula(src).map_err(|e| format!("{src}: {e}"))?;
        Ok(unsafe_names(&check_formula_safety(&f)).into_iter().map(String::from).collect())
    };
    for src in SAFE_FORMULAS {
        t.record(names(src).and_then(|n| if n.is_empty() { Ok(()) } else { Err(format!("{src}: flagged {n:?}")) }));
    }
    for (src, var) in UNSAFE_FORMULAS {
        t.record(names(src).and_then(|n| if n == [var] { Ok(()) } else { Err(format!("{src}: flagged {n:?}, expected {var}")) }));
    }
    t.finish()
}
