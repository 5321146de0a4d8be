use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::function::{resolve, ResolvedFn};
use super::typing::{cat_object_columns, node_columns};
use super::{AlgebraError, AlgebraExpr, CatExpr, Column, Condition, ExtSet, MorphismDecl, Operand, TreeAxis};
use crate::model::{DeweyCode, InstanceCategory, Value, ValueKind};

use AlgebraExpr as E;

/// Result of evaluating a plan: a set, or (for a top-level `Cat`) a small
/// category over materialised sets.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluated {
    Set(ExtSet),
    Category(CatValue),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatValue {
    pub objects: Vec<ExtSet>,
    pub morphisms: Vec<MorphismDecl>,
}

impl Evaluated {
    pub fn into_set(self, inst: &InstanceCategory) -> Result<ExtSet, AlgebraError> {
        match self {
            Evaluated::Set(s) => Ok(s),
            Evaluated::Category(c) => lim_of(c, inst),
        }
    }
}

/// Evaluate a plan. A root `Cat` yields a category; everything else a set.
pub fn evaluate(expr: &AlgebraExpr, inst: &InstanceCategory) -> Result<Evaluated, AlgebraError> {
    super::columns_of(expr, inst)?;
    match expr {
        E::Cat(cat) => Ok(Evaluated::Category(eval_cat(cat, inst)?)),
        other => Ok(Evaluated::Set(eval_node(other, inst)?)),
    }
}

/// Evaluate a plan to a set, flattening a root `Cat` through its limit.
pub fn eval_set(expr: &AlgebraExpr, inst: &InstanceCategory) -> Result<ExtSet, AlgebraError> {
    evaluate(expr, inst)?.into_set(inst)
}

fn eval_node(expr: &AlgebraExpr, inst: &InstanceCategory) -> Result<ExtSet, AlgebraError> {
    match expr {
        E::Base(name) => {
            let obj = inst.object(name).ok_or_else(|| AlgebraError::UnknownObject(name.clone()))?;
            Ok(ExtSet::unary(Column::of_object(name), obj.elements.iter().cloned()))
        }
        E::Map(child, f) => {
            let s = eval_node(child, inst)?;
            let r = resolve(f, &s.columns, inst)?;
            let columns = node_columns(expr, &[s.columns.clone()], inst)?;
            let rows = s.rows.iter().map(|row| apply_total(&r, row, f)).collect::<Result<BTreeSet<_>, _>>()?;
            Ok(ExtSet { columns, rows })
        }
        E::Project(child, names) => {
            let s = eval_node(child, inst)?.unpacked_for(names, inst);
            let idx = s.column_indices(names)?;
            let columns = node_columns(expr, &[s.columns.clone()], inst)?;
            Ok(ExtSet { columns, rows: s.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect() })
        }
        E::Select(child, c) => {
            let s = eval_node(child, inst)?;
            select(s, c, inst)
        }
        E::Union(l, r) | E::Intersect(l, r) | E::Difference(l, r) => {
            let (a, b) = (eval_node(l, inst)?, eval_node(r, inst)?);
            if let (Some(ka), Some(kb)) = (a.kinds(), b.kinds()) {
                if ka != kb {
                    return Err(AlgebraError::UnionIncompatible(format!("component kinds {ka:?} and {kb:?} differ")));
                }
            }
            let columns = node_columns(expr, &[a.columns.clone(), b.columns.clone()], inst)?;
            let rows = match expr {
                E::Union(..) => a.rows.union(&b.rows).cloned().collect(),
                E::Intersect(..) => a.rows.intersection(&b.rows).cloned().collect(),
                _ => a.rows.difference(&b.rows).cloned().collect(),
            };
            Ok(ExtSet { columns, rows })
        }
        E::Product(l, r) => {
            let (a, b) = (eval_node(l, inst)?, eval_node(r, inst)?);
            let columns = node_columns(expr, &[a.columns.clone(), b.columns.clone()], inst)?;
            let mut rows = BTreeSet::new();
            for x in &a.rows {
                for y in &b.rows {
                    rows.insert(x.iter().chain(y).cloned().collect());
                }
            }
            Ok(ExtSet { columns, rows })
        }
        E::Divide { left, a, right, b } => {
            let r = eval_node(left, inst)?.unpacked_for(a, inst);
            let s = eval_node(right, inst)?.unpacked_for(b, inst);
            divide(&r, a, &s, b)
        }
        E::Tree(axis, d1, d2) => {
            let (x, y) = (eval_node(d1, inst)?, eval_node(d2, inst)?);
            let columns = node_columns(expr, &[x.columns.clone(), y.columns.clone()], inst)?;
            tree_axis(*axis, &x, &y, columns)
        }
        E::GetReach(s, t, e) | E::GetNHop(s, t, e, _) => {
            let (sv, tv) = (eval_node(s, inst)?, eval_node(t, inst)?);
            let ev = eval_node(e, inst)?.unpacked(inst);
            let columns = node_columns(expr, &[sv.columns.clone(), tv.columns.clone(), ev.columns.clone()], inst)?;
            let bound = match expr {
                E::GetNHop(.., n) if *n < 1 => return Err(AlgebraError::InvalidHopCount(*n)),
                E::GetNHop(.., n) => Some(*n as usize),
                _ => None,
            };
            reach(&sv, &tv, &ev, bound, columns)
        }
        E::Cat(cat) => lim_of(eval_cat(cat, inst)?, inst),
        E::Lim(cat) => lim_of(eval_cat(cat, inst)?, inst),
        E::Rename(child, names) => {
            let s = eval_node(child, inst)?;
            let columns = node_columns(expr, &[s.columns.clone()], inst)?;
            debug_assert_eq!(columns.len(), names.len());
            Ok(ExtSet { columns, rows: s.rows })
        }
    }
}

fn apply_total(r: &ResolvedFn, row: &[Value], f: &super::FunctionExpr) -> Result<Vec<Value>, AlgebraError> {
    r.apply(row).ok_or_else(|| AlgebraError::PartialFunction {
        morphism: super::syntax::function_text(f),
        witness: format_row(row),
    })
}

pub(crate) fn format_row(row: &[Value]) -> String {
    match row {
        [v] => v.to_string(),
        _ => format!("({})", row.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")),
    }
}

enum Side {
    Fn(ResolvedFn),
    Const(Value),
}

impl Side {
    fn new(o: &Operand, cols: &[Column], inst: &InstanceCategory) -> Result<Self, AlgebraError> {
        Ok(match o {
            Operand::Const(v) => Side::Const(v.clone()),
            Operand::Fn(f) => Side::Fn(resolve(f, cols, inst)?),
        })
    }

    fn value(&self, row: &[Value]) -> Option<Value> {
        match self {
            Side::Const(v) => Some(v.clone()),
            Side::Fn(f) => f.apply(row).and_then(|mut v| v.pop()),
        }
    }
}

/// Rows of `s` satisfying `c`.
pub fn select(s: ExtSet, c: &Condition, inst: &InstanceCategory) -> Result<ExtSet, AlgebraError> {
    let left = Side::new(&c.left, &s.columns, inst)?;
    let right = Side::new(&c.right, &s.columns, inst)?;
    let mut rows = BTreeSet::new();
    for row in s.rows {
        let undefined = || AlgebraError::PartialFunction { morphism: "select operand".into(), witness: format_row(&row) };
        let a = left.value(&row).ok_or_else(undefined)?;
        let b = right.value(&row).ok_or_else(undefined)?;
        if a.compare(c.op, &b)? {
            rows.insert(row);
        }
    }
    Ok(ExtSet { columns: s.columns, rows })
}

/// Relational division of `r` by `s`, aligning `r`'s `a` components with
/// `s`'s `b` components. Both arguments are already unpacked.
pub fn divide(r: &ExtSet, a: &[String], s: &ExtSet, b: &[String]) -> Result<ExtSet, AlgebraError> {
    let ai = r.column_indices(a)?;
    let bi = s.column_indices(b)?;
    if ai.len() != bi.len() || ai.is_empty() {
        return Err(AlgebraError::ComponentMismatch(format!("cannot align {a:?} with {b:?}")));
    }
    let rest: Vec<usize> = (0..r.arity()).filter(|i| !ai.contains(i)).collect();
    if rest.is_empty() {
        return Err(AlgebraError::ComponentMismatch("divide leaves no components".into()));
    }
    if let (Some(rk), Some(sk)) = (r.kinds(), s.kinds()) {
        let ra: Vec<ValueKind> = ai.iter().map(|&i| rk[i]).collect();
        let sb: Vec<ValueKind> = bi.iter().map(|&i| sk[i]).collect();
        if ra != sb {
            return Err(AlgebraError::ComponentMismatch(format!("component kinds {ra:?} and {sb:?} differ")));
        }
    }
    let pick = |row: &[Value], idx: &[usize]| -> Vec<Value> { idx.iter().map(|&i| row[i].clone()).collect() };
    let divisor: HashSet<Vec<Value>> = s.rows.iter().map(|row| pick(row, &bi)).collect();
    let mut groups: HashMap<Vec<Value>, HashSet<Vec<Value>>> = HashMap::new();
    for row in &r.rows {
        groups.entry(pick(row, &rest)).or_default().insert(pick(row, &ai));
    }
    let rows: BTreeSet<Vec<Value>> =
        groups.into_iter().filter(|(_, have)| divisor.is_subset(have)).map(|(t, _)| t).collect();

    if cfg!(debug_assertions) {
        let composite = divide_by_composite(r, &ai, &rest, &divisor);
        assert_eq!(rows, composite, "direct division disagrees with π R − π((π R × π S) − R)");
    }
    Ok(ExtSet { columns: rest.iter().map(|&i| r.columns[i].clone()).collect(), rows })
}

/// π_Ā R − π_Ā((π_Ā R × π_B S) − R), with the product aligned to R's layout.
fn divide_by_composite(r: &ExtSet, ai: &[usize], rest: &[usize], divisor: &HashSet<Vec<Value>>) -> BTreeSet<Vec<Value>> {
    let candidates: BTreeSet<Vec<Value>> = r.rows.iter().map(|row| rest.iter().map(|&i| row[i].clone()).collect()).collect();
    let mut missing = BTreeSet::new();
    for t in &candidates {
        for bv in divisor {
            let mut full = vec![Value::Int(0); r.arity()];
            for (k, &i) in rest.iter().enumerate() {
                full[i] = t[k].clone();
            }
            for (k, &i) in ai.iter().enumerate() {
                full[i] = bv[k].clone();
            }
            if !r.rows.contains(&full) {
                missing.insert(t.clone());
            }
        }
    }
    candidates.difference(&missing).cloned().collect()
}

fn dewey_values<'a>(s: &'a ExtSet, op: &str) -> Result<Vec<&'a DeweyCode>, AlgebraError> {
    s.values()
        .map(|v| {
            v.as_dewey().ok_or_else(|| AlgebraError::KindMismatch {
                op: op.to_string(),
                expected: ValueKind::Dewey,
                found: v.kind(),
            })
        })
        .collect()
}

/// Pairs `(x, y)` with `x` in `d1`, `y` in `d2` and `x` related to `y` on the axis.
pub fn tree_axis(axis: TreeAxis, d1: &ExtSet, d2: &ExtSet, columns: Vec<Column>) -> Result<ExtSet, AlgebraError> {
    let xs = dewey_values(d1, axis.keyword())?;
    let ys = dewey_values(d2, axis.keyword())?;
    let pair = |x: &DeweyCode, y: &DeweyCode| vec![Value::Dewey(x.clone()), Value::Dewey(y.clone())];
    let mut rows = BTreeSet::new();
    match axis {
        TreeAxis::Parent => {
            let set: HashSet<&DeweyCode> = xs.iter().copied().collect();
            for y in &ys {
                if let Some(p) = y.parent() {
                    if set.contains(&p) {
                        rows.insert(pair(&p, y));
                    }
                }
            }
        }
        TreeAxis::Ancestor => {
            let set: HashSet<&DeweyCode> = xs.iter().copied().collect();
            for y in &ys {
                let c = y.components();
                for len in 0..c.len() {
                    let prefix = DeweyCode::new(c[..len].to_vec());
                    if set.contains(&prefix) {
                        rows.insert(pair(&prefix, y));
                    }
                }
            }
        }
        TreeAxis::Sibling => {
            let mut by_parent: HashMap<DeweyCode, Vec<&DeweyCode>> = HashMap::new();
            for x in &xs {
                if let Some(p) = x.parent() {
                    by_parent.entry(p).or_default().push(x);
                }
            }
            for y in &ys {
                for x in y.parent().and_then(|p| by_parent.get(&p)).into_iter().flatten() {
                    if x != y {
                        rows.insert(pair(x, y));
                    }
                }
            }
        }
        TreeAxis::Preceding | TreeAxis::Following => {
            for x in &xs {
                for y in &ys {
                    let hit = if axis == TreeAxis::Preceding { x.precedes(y) } else { x.follows(y) };
                    if hit {
                        rows.insert(pair(x, y));
                    }
                }
            }
        }
    }
    Ok(ExtSet { columns, rows })
}

/// Pairs `(x, y)` from `s × t` joined by a path of at least one and (when
/// bounded) at most `bound` edges of `e`.
pub fn reach(s: &ExtSet, t: &ExtSet, e: &ExtSet, bound: Option<usize>, columns: Vec<Column>) -> Result<ExtSet, AlgebraError> {
    if let Some(ek) = e.kinds() {
        for (set, k, end) in [(s, ek[0], "source"), (t, ek[1], "target")] {
            if let Some(sk) = set.kinds() {
                if sk[0] != k {
                    return Err(AlgebraError::KindMismatch { op: format!("reach {end}"), expected: k, found: sk[0] });
                }
            }
        }
    }
    let mut adj: HashMap<&Value, Vec<&Value>> = HashMap::new();
    for row in &e.rows {
        adj.entry(&row[0]).or_default().push(&row[1]);
    }
    let targets: HashSet<&Value> = t.values().collect();
    let mut rows = BTreeSet::new();
    for start in s.values() {
        let mut seen: HashSet<&Value> = HashSet::new();
        let mut queue: VecDeque<(&Value, usize)> = VecDeque::from([(start, 0)]);
        while let Some((v, depth)) = queue.pop_front() {
            if bound.is_some_and(|b| depth >= b) {
                continue;
            }
            for &w in adj.get(v).into_iter().flatten() {
                if seen.insert(w) {
                    if targets.contains(w) {
                        rows.insert(vec![start.clone(), w.clone()]);
                    }
                    queue.push_back((w, depth + 1));
                }
            }
        }
    }
    Ok(ExtSet { columns, rows })
}

/// Materialise the objects of a `Cat` and check that every declared
/// morphism is a total function between them.
pub fn eval_cat(cat: &CatExpr, inst: &InstanceCategory) -> Result<CatValue, AlgebraError> {
    let mut sets = cat.objects.iter().map(|o| eval_node(&o.expr, inst)).collect::<Result<Vec<_>, _>>()?;
    let child_cols: Vec<Vec<Column>> = sets.iter().map(|s| s.columns.clone()).collect();
    let renamed = cat_object_columns(cat, &child_cols)?;
    for (s, cols) in sets.iter_mut().zip(renamed) {
        s.columns = cols;
    }
    for d in &cat.morphisms {
        let (src, dst) = (&sets[d.src], &sets[d.dst]);
        let f = resolve(&d.func, &src.columns, inst)?;
        for row in &src.rows {
            match f.apply(row) {
                Some(image) if dst.rows.contains(&image) => {}
                _ => {
                    return Err(AlgebraError::PartialFunction {
                        morphism: format!("{} : {} -> {}", super::syntax::function_text(&d.func), d.src, d.dst),
                        witness: format_row(row),
                    })
                }
            }
        }
    }
    Ok(CatValue { objects: sets, morphisms: cat.morphisms.clone() })
}

/// The limit of a finite category: all tuples picking one row per object
/// such that every declared morphism maps the chosen source row to the
/// chosen target row.
pub fn lim_of(cat: CatValue, inst: &InstanceCategory) -> Result<ExtSet, AlgebraError> {
    let n = cat.objects.len();
    let columns = super::extset::dedupe_names(cat.objects.iter().flat_map(|s| s.columns.clone()).collect());
    let rows: Vec<Vec<&Vec<Value>>> = cat.objects.iter().map(|s| s.rows.iter().collect()).collect();
    if rows.iter().any(Vec::is_empty) {
        return Ok(ExtSet::new(columns));
    }
    let decls = cat
        .morphisms
        .iter()
        .map(|d| Ok((d.src, d.dst, resolve(&d.func, &cat.objects[d.src].columns, inst)?)))
        .collect::<Result<Vec<_>, AlgebraError>>()?;

    let seed = (0..n).min_by_key(|&i| rows[i].len()).expect("cat has objects");
    let mut bound = vec![false; n];
    bound[seed] = true;
    let mut partial: Vec<Vec<usize>> = (0..rows[seed].len())
        .map(|r| {
            let mut t = vec![usize::MAX; n];
            t[seed] = r;
            t
        })
        .collect();

    while bound.iter().any(|b| !b) {
        if let Some((s, d, f)) = decls.iter().find(|(s, d, _)| bound[*s] && !bound[*d]) {
            let index: HashMap<&Vec<Value>, usize> = rows[*d].iter().enumerate().map(|(i, r)| (*r, i)).collect();
            partial = partial
                .into_iter()
                .filter_map(|mut t| {
                    let image = f.apply(rows[*s][t[*s]])?;
                    t[*d] = *index.get(&image)?;
                    Some(t)
                })
                .collect();
            bound[*d] = true;
        } else if let Some((s, d, f)) = decls.iter().find(|(s, d, _)| !bound[*s] && bound[*d]) {
            let mut preimage: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
            for (i, r) in rows[*s].iter().enumerate() {
                if let Some(image) = f.apply(r) {
                    preimage.entry(image).or_default().push(i);
                }
            }
            partial = partial
                .into_iter()
                .flat_map(|t| {
                    let srcs = preimage.get(rows[*d][t[*d]]).cloned().unwrap_or_default();
                    srcs.into_iter().map(move |i| {
                        let mut t = t.clone();
                        t[*s] = i;
                        t
                    })
                })
                .collect();
            bound[*s] = true;
        } else {
            let next = (0..n).filter(|&i| !bound[i]).min_by_key(|&i| rows[i].len()).expect("an unbound object");
            partial = partial
                .into_iter()
                .flat_map(|t| {
                    (0..rows[next].len()).map(move |i| {
                        let mut t = t.clone();
                        t[next] = i;
                        t
                    })
                })
                .collect();
            bound[next] = true;
        }
    }

    let out = partial
        .into_iter()
        .filter(|t| decls.iter().all(|(s, d, f)| f.apply(rows[*s][t[*s]]).as_ref() == Some(rows[*d][t[*d]])))
        .map(|t| t.iter().enumerate().flat_map(|(i, &r)| rows[i][r].iter().cloned()).collect())
        .collect();
    Ok(ExtSet { columns, rows: out })
}
