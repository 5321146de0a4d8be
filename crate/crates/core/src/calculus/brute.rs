use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};

use super::ast::{Arg, Atom, CalculusQuery, Formula, ObjectSet, TreePred, VarPath};
use super::{check_safety, CalculusError};
use crate::algebra::{Column, ExtSet};
use crate::model::{DeweyCode, InstanceCategory, Value};

/// Evaluate a safe query by enumerating every assignment of its ranged
/// variables.
pub fn brute_eval(inst: &InstanceCategory, q: &CalculusQuery) -> Result<ExtSet, CalculusError> {
    let report = check_safety(q);
    if !report.is_empty() {
        return Err(CalculusError::UnsafeQuery(report));
    }
    super::resolve(q, inst)?;
    let targets = q.target_vars();
    let mut columns = Vec::new();
    let mut domains = Vec::new();
    for t in &targets {
        let set = q.target_range(t).expect("safe targets are ranged");
        columns.push(Column::new(t.clone(), set.home().map(String::from)));
        domains.push(elements(inst, set));
    }
    let ev = Evaluator { inst, closures: RefCell::new(HashMap::new()) };
    let mut out = ExtSet::new(columns);
    let mut env: Vec<Binding> = Vec::new();
    ev.enumerate(&targets, &domains, q, &mut env, &mut out)?;
    Ok(out)
}

struct Binding {
    var: String,
    value: Value,
    home: Option<String>,
}

/// Members of an object set, in value order.
pub fn elements(inst: &InstanceCategory, set: &ObjectSet) -> Vec<Value> {
    match set {
        ObjectSet::Name(n) => inst.object(n).map(|o| o.elements.iter().cloned().collect()).unwrap_or_default(),
        ObjectSet::Union(a, b) => {
            let mut out = elements(inst, a);
            out.extend(elements(inst, b));
            out.sort();
            out.dedup();
            out
        }
        ObjectSet::Intersect(a, b) => {
            let right = elements(inst, b);
            elements(inst, a).into_iter().filter(|v| right.binary_search(v).is_ok()).collect()
        }
    }
}

fn member(inst: &InstanceCategory, set: &ObjectSet, v: &Value) -> bool {
    match set {
        ObjectSet::Name(n) => inst.object(n).is_some_and(|o| o.elements.contains(v)),
        ObjectSet::Union(a, b) => member(inst, a, v) || member(inst, b, v),
        ObjectSet::Intersect(a, b) => member(inst, a, v) && member(inst, b, v),
    }
}

/// Shortest positive path length between node pairs of one edge set.
type Distances = HashMap<(Value, Value), usize>;

struct Evaluator<'a> {
    inst: &'a InstanceCategory,
    closures: RefCell<HashMap<String, std::rc::Rc<Distances>>>,
}

impl Evaluator<'_> {
    fn enumerate(
        &self,
        targets: &[String],
        domains: &[Vec<Value>],
        q: &CalculusQuery,
        env: &mut Vec<Binding>,
        out: &mut ExtSet,
    ) -> Result<(), CalculusError> {
        let k = env.len();
        if k == targets.len() {
            if self.holds(&q.body, env)? {
                out.rows.insert(env.iter().map(|b| b.value.clone()).collect());
            }
            return Ok(());
        }
        let home = q.target_range(&targets[k]).and_then(ObjectSet::home).map(String::from);
        for v in &domains[k] {
            env.push(Binding { var: targets[k].clone(), value: v.clone(), home: home.clone() });
            let r = self.enumerate(targets, domains, q, env, out);
            env.pop();
            r?;
        }
        Ok(())
    }

    fn holds(&self, f: &Formula, env: &mut Vec<Binding>) -> Result<bool, CalculusError> {
        Ok(match f {
            Formula::Const(b) => *b,
            Formula::Atom(a) => self.atom(a, env)?,
            Formula::Not(g) => !self.holds(g, env)?,
            Formula::And(a, b) => self.holds(a, env)? && self.holds(b, env)?,
            Formula::Or(a, b) => self.holds(a, env)? || self.holds(b, env)?,
            Formula::Implies(a, b) => !self.holds(a, env)? || self.holds(b, env)?,
            Formula::Quant { q, var, range, body } => {
                let range = range.as_ref().expect("safe quantifiers are ranged");
                let home = range.home().map(String::from);
                let want = *q == super::Quantifier::Exists;
                for v in elements(self.inst, range) {
                    env.push(Binding { var: var.clone(), value: v, home: home.clone() });
                    let r = self.holds(body, env);
                    env.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                !want
            }
        })
    }

    fn lookup<'e>(&self, env: &'e [Binding], var: &str) -> &'e Binding {
        env.iter().rev().find(|b| b.var == var).expect("resolved queries bind every variable")
    }

    fn path_value(&self, p: &VarPath, env: &[Binding]) -> Result<Value, CalculusError> {
        let b = self.lookup(env, &p.var);
        if p.is_bare() {
            return Ok(b.value.clone());
        }
        let home = b.home.as_deref().ok_or_else(|| CalculusError::AmbiguousPath {
            var: p.var.clone(),
            path: p.to_string(),
        })?;
        let hops = crate::algebra::normalize_hops(self.inst, home, &p.path).map_err(|e| {
            CalculusError::UnresolvablePath { path: p.to_string(), reason: e.to_string() }
        })?;
        let m = self.inst.resolve_path(home, &hops).map_err(|e| CalculusError::UnresolvablePath {
            path: p.to_string(),
            reason: e.to_string(),
        })?;
        m.apply(&b.value).cloned().ok_or_else(|| CalculusError::UnresolvablePath {
            path: p.to_string(),
            reason: format!("no image for {}", b.value),
        })
    }

    fn arg(&self, a: &Arg, env: &[Binding]) -> Result<Value, CalculusError> {
        match a {
            Arg::Const(v) => Ok(v.clone()),
            Arg::Path(p) => self.path_value(p, env),
        }
    }

    fn atom(&self, a: &Atom, env: &[Binding]) -> Result<bool, CalculusError> {
        match a {
            Atom::Range { var, set } => Ok(member(self.inst, set, &self.lookup(env, var).value)),
            Atom::Compare { left, op, right } => Ok(self.arg(left, env)?.compare(*op, &self.arg(right, env)?)?),
            Atom::Tree { pred, left, right } => {
                let (l, r) = (self.path_value(left, env)?, self.path_value(right, env)?);
                let dewey = |v: &Value| {
                    v.as_dewey().cloned().ok_or(CalculusError::NotDewey { pred: pred.keyword().into(), found: v.kind() })
                };
                Ok(tree_holds(*pred, &dewey(&l)?, &dewey(&r)?))
            }
            Atom::Reach { edges, hops, left, right } => {
                let (l, r) = (self.path_value(left, env)?, self.path_value(right, env)?);
                let dist = self.distances(edges);
                Ok(match dist.get(&(l, r)) {
                    None => false,
                    Some(&d) => hops.is_none_or(|n| d as i64 <= n),
                })
            }
        }
    }

    fn distances(&self, edges: &str) -> std::rc::Rc<Distances> {
        if let Some(d) = self.closures.borrow().get(edges) {
            return d.clone();
        }
        let d = std::rc::Rc::new(shortest_paths(self.inst, edges));
        self.closures.borrow_mut().insert(edges.to_string(), d.clone());
        d
    }
}

/// Whether `a pred b` holds between two Dewey codes.
pub(crate) fn tree_holds(pred: TreePred, a: &DeweyCode, b: &DeweyCode) -> bool {
    match pred {
        TreePred::IsParent => a.is_parent_of(b),
        TreePred::IsChild => b.is_parent_of(a),
        TreePred::IsAncestor => a.is_ancestor_of(b),
        TreePred::IsDescendant => b.is_ancestor_of(a),
        TreePred::IsSibling => a.is_sibling_of(b),
        TreePred::IsPreceding => a.precedes(b),
        TreePred::IsFollowing => a.follows(b),
        TreePred::IsPrecedingSibling => a.is_sibling_of(b) && a < b,
        TreePred::IsFollowingSibling => a.is_sibling_of(b) && a > b,
    }
}

fn shortest_paths(inst: &InstanceCategory, edges: &str) -> Distances {
    let mut adj: HashMap<Value, Vec<Value>> = HashMap::new();
    for e in inst.object(edges).into_iter().flat_map(|o| o.elements.iter()) {
        if let Value::Tuple(fields) = e {
            if let [(_, s), (_, t)] = fields.as_slice() {
                adj.entry(s.clone()).or_default().push(t.clone());
            }
        }
    }
    let mut out = HashMap::new();
    for start in adj.keys() {
        let mut queue = VecDeque::from([(start, 0usize)]);
        let mut seen: HashMap<&Value, usize> = HashMap::new();
        while let Some((v, d)) = queue.pop_front() {
            for w in adj.get(v).into_iter().flatten() {
                if !seen.contains_key(w) {
                    seen.insert(w, d + 1);
                    queue.push_back((w, d + 1));
                }
            }
        }
        for (w, d) in seen {
            out.insert((start.clone(), w.clone()), d);
        }
    }
    out
}
