use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::algebra::{
    cat_object_columns, columns_of, dedupe_names, eval_set, resolve, AlgebraExpr, CatExpr, CatObject, Column,
    Condition, ExtSet, FunctionExpr, MorphismDecl, Operand, TableFn,
};
use crate::model::{InstanceCategory, Value};

use AlgebraExpr as E;

pub type Rewrite = fn(&AlgebraExpr, &InstanceCategory) -> Option<AlgebraExpr>;

/// One algebraic rewrite. `rewrite` returns `None` when the node does not
/// match or a precondition fails on the instance.
#[derive(Clone, Copy)]
pub struct RewriteRule {
    pub id: u8,
    pub name: &'static str,
    rewrite: Rewrite,
}

impl std::fmt::Debug for RewriteRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rule {} ({})", self.id, self.name)
    }
}

impl RewriteRule {
    pub const fn new(id: u8, name: &'static str, rewrite: Rewrite) -> Self {
        RewriteRule { id, name, rewrite }
    }

    /// Rewrite the node, keeping only results that type-check with the same
    /// output column names.
    pub fn apply(&self, expr: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
        let out = (self.rewrite)(expr, inst)?;
        let before = columns_of(expr, inst).ok()?;
        let after = columns_of(&out, inst).ok()?;
        let names = |cs: &[Column]| cs.iter().map(|c| c.name.clone()).collect::<Vec<_>>();
        (names(&before) == names(&after) && out != *expr).then_some(out)
    }
}

pub const RULES: [RewriteRule; 9] = [
    RewriteRule { id: 1, name: "cascade of functions", rewrite: cascade_maps },
    RewriteRule { id: 2, name: "projection of a limit", rewrite: project_lim },
    RewriteRule { id: 3, name: "push selection into a limit", rewrite: push_select_lim },
    RewriteRule { id: 4, name: "push selection into reachability", rewrite: push_select_reach },
    RewriteRule { id: 5, name: "push selection into a tree axis", rewrite: push_select_tree },
    RewriteRule { id: 6, name: "map over a product", rewrite: product_map },
    RewriteRule { id: 7, name: "commute projection with a limit", rewrite: commute_project_lim },
    RewriteRule { id: 8, name: "commute a map with a limit", rewrite: commute_map_lim },
    RewriteRule { id: 9, name: "commute a limit with reachability", rewrite: commute_lim_reach },
];

pub fn rule(id: u8) -> Option<&'static RewriteRule> {
    RULES.iter().find(|r| r.id == id)
}

/// `f` followed by `g`, when expressible as a single function expression.
pub fn compose_fn(f: &FunctionExpr, g: &FunctionExpr) -> Option<FunctionExpr> {
    use FunctionExpr as F;
    if g.is_identity() {
        return Some(f.clone());
    }
    if f.is_identity() {
        return Some(g.clone());
    }
    match (f, g) {
        (F::ComponentThen(c, rest), _) => Some(F::ComponentThen(c.clone(), Box::new(compose_fn(rest, g)?))),
        (F::Path(a), F::Path(b)) => Some(F::Path(a.iter().chain(b).cloned().collect())),
        (F::Compose(a), F::Compose(b)) => Some(F::Compose(a.iter().chain(b).cloned().collect())),
        _ => None,
    }
}

fn names_of(cols: &[Column]) -> Vec<String> {
    cols.iter().map(|c| c.name.clone()).collect()
}

/// Column names read by a condition, or `None` if some operand reads the
/// whole row positionally.
fn condition_columns(c: &Condition) -> Option<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for o in c.operands() {
        if let Operand::Fn(f) = o {
            out.extend(f.referenced_columns()?.into_iter().map(String::from));
        }
    }
    Some(out)
}

fn rename_fn(f: &FunctionExpr, map: &HashMap<String, String>) -> Option<FunctionExpr> {
    match f {
        FunctionExpr::ComponentThen(c, rest) => Some(FunctionExpr::ComponentThen(map.get(c)?.clone(), rest.clone())),
        _ => None,
    }
}

fn rename_condition(c: &Condition, map: &HashMap<String, String>) -> Option<Condition> {
    let side = |o: &Operand| match o {
        Operand::Const(v) => Some(Operand::Const(v.clone())),
        Operand::Fn(f) => rename_fn(f, map).map(Operand::Fn),
    };
    Some(Condition::new(side(&c.left)?, c.op, side(&c.right)?))
}

/// Column layout of a `Cat` or `Lim`: each object's columns before and
/// after its alias, and the limit's deduplicated names per object.
struct Layout {
    inner: Vec<Vec<Column>>,
    outer: Vec<Vec<Column>>,
    lim_names: Vec<Vec<String>>,
}

impl Layout {
    fn of(cat: &CatExpr, inst: &InstanceCategory) -> Option<Layout> {
        let inner = cat.objects.iter().map(|o| columns_of(&o.expr, inst).ok()).collect::<Option<Vec<_>>>()?;
        let outer = cat_object_columns(cat, &inner).ok()?;
        let flat = dedupe_names(outer.iter().flatten().cloned().collect());
        let mut lim_names = Vec::new();
        let mut at = 0;
        for cols in &outer {
            lim_names.push(flat[at..at + cols.len()].iter().map(|c| c.name.clone()).collect());
            at += cols.len();
        }
        Some(Layout { inner, outer, lim_names })
    }

    /// The object owning every one of `names`, if there is exactly one.
    fn owner<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> Option<usize> {
        let mut owners = BTreeSet::new();
        for n in names {
            owners.insert(self.lim_names.iter().position(|ns| ns.contains(n))?);
        }
        match owners.len() {
            1 => owners.into_iter().next(),
            _ => None,
        }
    }

    /// Limit column names of object `i` mapped to the object's own column
    /// names before its alias.
    fn to_inner(&self, i: usize) -> HashMap<String, String> {
        self.lim_names[i].iter().cloned().zip(names_of(&self.inner[i])).collect()
    }
}

fn rebuild(like: &AlgebraExpr, cat: CatExpr) -> AlgebraExpr {
    match like {
        E::Cat(_) => E::Cat(cat),
        _ => E::Lim(cat),
    }
}

fn as_cat(e: &AlgebraExpr) -> Option<&CatExpr> {
    match e {
        E::Cat(c) | E::Lim(c) => Some(c),
        _ => None,
    }
}

/// `e` under the column names `names`, renaming only when they differ.
fn renamed_to(e: AlgebraExpr, current: &[Column], names: &[String]) -> AlgebraExpr {
    if names_of(current) == names {
        e
    } else {
        e.rename(names.iter().cloned())
    }
}

/// (1) `Map(Map(S, f), g)` becomes `Map(S, g ∘ f)`.
fn cascade_maps(e: &AlgebraExpr, _: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Map(inner, g) = e else { return None };
    let E::Map(s, f) = inner.as_ref() else { return None };
    Some(s.as_ref().clone().map(compose_fn(f, g)?))
}

/// (2) Projecting a two-object limit onto the source of its only morphism,
/// or onto either side of a morphism-free limit whose other side is
/// non-empty, gives back that object.
fn project_lim(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Project(child, names) = e else { return None };
    let cat = as_cat(child)?;
    if cat.objects.len() != 2 {
        return None;
    }
    let layout = Layout::of(cat, inst)?;
    let i = (0..2).find(|&i| &layout.lim_names[i] == names)?;
    let other = 1 - i;
    let allowed = match cat.morphisms.as_slice() {
        [] => !eval_set(&cat.objects[other].expr, inst).ok()?.is_empty(),
        [m] => m.src == i && m.dst == other,
        _ => false,
    };
    allowed.then(|| renamed_to(cat.objects[i].expr.clone(), &layout.inner[i], names))
}

/// A condition on object `i`'s single value, moved along morphism `m` into
/// its source: the operand reads `m`, then what it read before.
fn pull_back(c: &Condition, m: &MorphismDecl, src_obj: &CatObject, src_inner: &[Column]) -> Option<Condition> {
    let side = |o: &Operand| -> Option<Operand> {
        let Operand::Fn(f) = o else { return Some(o.clone()) };
        let rest = match f {
            FunctionExpr::ComponentThen(_, rest) => rest.as_ref().clone(),
            FunctionExpr::ProductOf(..) => return None,
            other => other.clone(),
        };
        let through = compose_fn(&m.func, &rest)?;
        // the morphism reads the aliased column; the selection sits below the alias
        let local = match (&src_obj.alias, through) {
            (Some(a), FunctionExpr::ComponentThen(c, r)) if &c == a => {
                FunctionExpr::ComponentThen(src_inner.first()?.name.clone(), r)
            }
            (_, other) => other,
        };
        Some(Operand::Fn(local))
    };
    Some(Condition::new(side(&c.left)?, c.op, side(&c.right)?))
}

/// Filter object `i` by `c` (over its own columns), re-filtering every
/// object with a morphism into it so the morphisms stay total.
fn filter_object(
    cat: &mut CatExpr,
    layout: &Layout,
    i: usize,
    c: Condition,
    seen: &mut BTreeSet<usize>,
) -> Option<()> {
    if !seen.insert(i) {
        return None;
    }
    let incoming: Vec<MorphismDecl> = cat.morphisms.iter().filter(|m| m.dst == i).cloned().collect();
    if !incoming.is_empty() && layout.outer[i].len() != 1 {
        return None;
    }
    for m in incoming {
        if m.src == i {
            return None;
        }
        let pulled = pull_back(&c, &m, &cat.objects[m.src], &layout.inner[m.src])?;
        filter_object(cat, layout, m.src, pulled, seen)?;
    }
    let obj = &mut cat.objects[i];
    obj.expr = std::mem::replace(&mut obj.expr, E::Base(String::new())).select(c);
    Some(())
}

/// (3) A selection reading one object of a limit moves onto that object.
fn push_select_lim(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Select(child, c) = e else { return None };
    let cat = as_cat(child)?;
    let layout = Layout::of(cat, inst)?;
    let cols = condition_columns(c)?;
    let i = layout.owner(&cols)?;
    let local = rename_condition(c, &layout.to_inner(i))?;
    let mut out = cat.clone();
    filter_object(&mut out, &layout, i, local, &mut BTreeSet::new())?;
    Some(rebuild(child, out))
}

/// Push a selection on one side of a binary pairing operator onto that side.
fn push_into_pair(c: &Condition, child: &AlgebraExpr, sides: [&AlgebraExpr; 2], inst: &InstanceCategory) -> Option<(usize, AlgebraExpr)> {
    let out = columns_of(child, inst).ok()?;
    let cols = condition_columns(c)?;
    let side = (0..2).find(|&s| !cols.is_empty() && cols.iter().all(|n| n == &out[s].name))?;
    let inner = columns_of(sides[side], inst).ok()?;
    let map = HashMap::from([(out[side].name.clone(), inner.first()?.name.clone())]);
    Some((side, sides[side].clone().select(rename_condition(c, &map)?)))
}

/// (4) Selections on the source or target side of `GetReach`/`GetNHop`.
fn push_select_reach(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Select(child, c) = e else { return None };
    let (s, t, edges) = match child.as_ref() {
        E::GetReach(s, t, e) | E::GetNHop(s, t, e, _) => (s, t, e),
        _ => return None,
    };
    let (side, pushed) = push_into_pair(c, child, [s, t], inst)?;
    let (s, t) = if side == 0 { (pushed, t.as_ref().clone()) } else { (s.as_ref().clone(), pushed) };
    Some(match child.as_ref() {
        E::GetNHop(.., n) => E::nhop(s, t, edges.as_ref().clone(), *n),
        _ => E::reach(s, t, edges.as_ref().clone()),
    })
}

/// (5) Selections on either argument of a tree axis.
fn push_select_tree(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Select(child, c) = e else { return None };
    let E::Tree(axis, d1, d2) = child.as_ref() else { return None };
    let (side, pushed) = push_into_pair(c, child, [d1, d2], inst)?;
    Some(if side == 0 {
        E::tree(*axis, pushed, d2.as_ref().clone())
    } else {
        E::tree(*axis, d1.as_ref().clone(), pushed)
    })
}

fn unary(e: &AlgebraExpr, inst: &InstanceCategory) -> bool {
    columns_of(e, inst).is_ok_and(|c| c.len() == 1)
}

/// (6) `f(S1) × g(S2)` and `(f ⊗ g)(S1 × S2)`, in either direction.
fn product_map(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    match e {
        E::Product(l, r) => {
            let (E::Map(a, f), E::Map(b, g)) = (l.as_ref(), r.as_ref()) else { return None };
            (unary(a, inst) && unary(b, inst)).then(|| {
                a.as_ref()
                    .clone()
                    .product(b.as_ref().clone())
                    .map(FunctionExpr::ProductOf(Box::new(f.clone()), Box::new(g.clone())))
            })
        }
        E::Map(inner, FunctionExpr::ProductOf(f, g)) => {
            let E::Product(a, b) = inner.as_ref() else { return None };
            (unary(a, inst) && unary(b, inst))
                .then(|| a.as_ref().clone().map(f.as_ref().clone()).product(b.as_ref().clone().map(g.as_ref().clone())))
        }
        _ => None,
    }
}

/// Output columns of a table function landing in `cols`.
fn table_output(name: &str, cols: &[Column]) -> Vec<Column> {
    cols.iter()
        .enumerate()
        .map(|(i, c)| match &c.sort {
            Some(s) => Column::of_object(s),
            None => Column::new(format!("{name}#{i}"), None),
        })
        .collect()
}

/// The function `a ↦ b` over the given pairs, if single-valued.
fn table_of(name: &str, pairs: impl IntoIterator<Item = (Vec<Value>, Vec<Value>)>, dst: &[Column]) -> Option<FunctionExpr> {
    let mut mapping = BTreeMap::new();
    for (a, b) in pairs {
        if mapping.insert(a, b.clone()).is_some_and(|prev| prev != b) {
            return None;
        }
    }
    Some(FunctionExpr::Table(Arc::new(TableFn { name: name.to_string(), output: table_output(name, dst), mapping })))
}

/// Object `i`'s rows under its aliased columns.
fn object_rows(cat: &CatExpr, layout: &Layout, i: usize, inst: &InstanceCategory) -> Option<ExtSet> {
    let mut s = eval_set(&cat.objects[i].expr, inst).ok()?;
    s.columns = layout.outer[i].clone();
    Some(s)
}

/// Images of every source row under the morphism, as (source row, image) pairs.
fn graph_of(m: &MorphismDecl, src: &ExtSet, inst: &InstanceCategory) -> Option<Vec<(Vec<Value>, Vec<Value>)>> {
    let f = resolve(&m.func, &src.columns, inst).ok()?;
    src.rows.iter().map(|r| Some((r.clone(), f.apply(r)?))).collect()
}

fn pick(row: &[Value], idx: &[usize]) -> Vec<Value> {
    idx.iter().map(|&i| row[i].clone()).collect()
}

/// (7) `π_L(Lim(R1, R2, f1))` becomes `Lim(π_L1 R1, π_L2 R2, f2)` when the
/// induced `f2` is single-valued on the instance.
fn commute_project_lim(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Project(child, names) = e else { return None };
    let cat = as_cat(child)?;
    let ([_, _], [m]) = (cat.objects.as_slice(), cat.morphisms.as_slice()) else { return None };
    if m.src == m.dst {
        return None;
    }
    let layout = Layout::of(cat, inst)?;
    // positions of the projected names within each object, in projection order
    let mut idx: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut last_side = 0;
    for n in names {
        let side = (0..2).find(|&s| layout.lim_names[s].contains(n))?;
        if side < last_side {
            return None;
        }
        last_side = side;
        let at = layout.lim_names[side].iter().position(|x| x == n)?;
        if idx[side].contains(&at) {
            return None;
        }
        idx[side].push(at);
    }
    if idx.iter().any(Vec::is_empty) {
        return None;
    }
    let src = object_rows(cat, &layout, m.src, inst)?;
    let pairs = graph_of(m, &src, inst)?
        .into_iter()
        .map(|(x, y)| (pick(&x, &idx[m.src]), pick(&y, &idx[m.dst])));
    let dst_cols: Vec<Column> = idx[m.dst].iter().map(|&i| layout.outer[m.dst][i].clone()).collect();
    let f2 = table_of("f2", pairs, &dst_cols)?;
    let objects: Vec<CatObject> = (0..2)
        .map(|s| {
            let o = &cat.objects[s];
            let inner: Vec<String> = idx[s].iter().map(|&i| layout.inner[s][i].name.clone()).collect();
            CatObject { expr: o.expr.clone().project(inner), alias: o.alias.clone() }
        })
        .collect();
    let out = rebuild(child, CatExpr::new(objects, vec![MorphismDecl { func: f2, src: m.src, dst: m.dst }]));
    let cols = columns_of(&out, inst).ok()?;
    Some(renamed_to(out, &cols, names))
}

/// (8) `(g1 ⊗ g2)(Lim(S1, S2, f1))` becomes `Lim(g1(S1), g2(S2), f2)` when
/// `f2 = g1(x) ↦ g2(f1(x))` is single-valued on the instance.
fn commute_map_lim(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Map(child, FunctionExpr::ProductOf(g1, g2)) = e else { return None };
    let cat = as_cat(child)?;
    let ([_, _], [m]) = (cat.objects.as_slice(), cat.morphisms.as_slice()) else { return None };
    if m.src == m.dst {
        return None;
    }
    let layout = Layout::of(cat, inst)?;
    if layout.outer.iter().any(|c| c.len() != 1) {
        return None;
    }
    let g = [g1.as_ref(), g2.as_ref()];
    let resolved = (0..2).map(|s| resolve(g[s], &layout.outer[s], inst).ok()).collect::<Option<Vec<_>>>()?;
    let src = object_rows(cat, &layout, m.src, inst)?;
    let pairs = graph_of(m, &src, inst)?
        .into_iter()
        .map(|(x, y)| Some((resolved[m.src].apply(&x)?, resolved[m.dst].apply(&y)?)))
        .collect::<Option<Vec<_>>>()?;
    let f2 = table_of("f2", pairs, &resolved[m.dst].output)?;
    // the maps read the aliased column, so the alias moves below them
    let objects: Vec<CatObject> = (0..2)
        .map(|s| {
            let o = &cat.objects[s];
            let base = match &o.alias {
                Some(a) => o.expr.clone().rename([a.clone()]),
                None => o.expr.clone(),
            };
            CatObject { expr: base.map(g[s].clone()), alias: None }
        })
        .collect();
    Some(rebuild(child, CatExpr::new(objects, vec![MorphismDecl { func: f2, src: m.src, dst: m.dst }])))
}

/// Peel a chain of selections off `e`, outermost first.
fn selections(mut e: &AlgebraExpr) -> (Vec<&Condition>, &AlgebraExpr) {
    let mut conds = Vec::new();
    while let E::Select(inner, c) = e {
        conds.push(c);
        e = inner;
    }
    (conds, e)
}

fn with_selections(mut e: AlgebraExpr, conds: &[&Condition]) -> AlgebraExpr {
    for c in conds.iter().rev() {
        e = e.select((*c).clone());
    }
    e
}

/// The object of a limit owning exactly the single column `name`, provided
/// no morphism enters it.
fn sole_object(cat: &CatExpr, layout: &Layout, name: &str) -> Option<usize> {
    let i = layout.lim_names.iter().position(|ns| ns.len() == 1 && ns[0] == name)?;
    (!cat.morphisms.iter().any(|m| m.dst == i)).then_some(i)
}

/// (9) Filtering a limit object by reachability before or after the limit:
/// `π_S(getReach(π_S σ_C(Lim(S, ..)), T, E))` and
/// `π_S σ_C(Lim(π_S getReach(S, T, E), ..))`, in either direction.
fn commute_lim_reach(e: &AlgebraExpr, inst: &InstanceCategory) -> Option<AlgebraExpr> {
    let E::Project(child, names) = e else { return None };
    let [name] = names.as_slice() else { return None };
    if let E::GetReach(s, t, edges) = child.as_ref() {
        // reach applied after the limit
        let E::Project(inner, inner_names) = s.as_ref() else { return None };
        if inner_names != names {
            return None;
        }
        let (conds, lim) = selections(inner);
        let cat = as_cat(lim)?;
        let layout = Layout::of(cat, inst)?;
        let i = sole_object(cat, &layout, name)?;
        let local = layout.inner[i].first()?.name.clone();
        let mut out = cat.clone();
        let obj = &mut out.objects[i];
        obj.expr = E::reach(obj.expr.clone(), t.as_ref().clone(), edges.as_ref().clone()).project([local]);
        return Some(with_selections(rebuild(lim, out), &conds).project(names.clone()));
    }
    // reach applied to the limit object
    let (conds, lim) = selections(child);
    let cat = as_cat(lim)?;
    let layout = Layout::of(cat, inst)?;
    let i = sole_object(cat, &layout, name)?;
    let E::Project(reach, reach_names) = &cat.objects[i].expr else { return None };
    let E::GetReach(s, t, edges) = reach.as_ref() else { return None };
    if reach_names.as_slice() != [columns_of(s, inst).ok()?.first()?.name.clone()] {
        return None;
    }
    let mut out = cat.clone();
    out.objects[i].expr = s.as_ref().clone();
    // the wider object must still carry its outgoing morphisms totally
    crate::algebra::eval_cat(&out, inst).ok()?;
    let filtered = with_selections(rebuild(lim, out), &conds).project(names.clone());
    Some(E::reach(filtered, t.as_ref().clone(), edges.as_ref().clone()).project(names.clone()))
}
