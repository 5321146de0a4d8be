use std::collections::BTreeMap;

use super::normalize::{Literal, NormalizedQuery, QuantDecl};
use super::CompileError;
use crate::algebra::{AlgebraExpr, CatExpr, CatObject, Condition, FunctionExpr, MorphismDecl, Operand, TreeAxis};
use crate::calculus::{path_object, Arg, Atom, ObjectSet, Quantifier, TreePred, VarPath};
use crate::model::{CmpOp, InstanceCategory};

use AlgebraExpr as E;

/// The algebra expression for an object set.
pub fn set_expr(set: &ObjectSet) -> AlgebraExpr {
    match set {
        ObjectSet::Name(n) => E::base(n.clone()),
        ObjectSet::Union(a, b) => set_expr(a).union(set_expr(b)),
        ObjectSet::Intersect(a, b) => set_expr(a).intersect(set_expr(b)),
    }
}

/// Per variable, the set it ranges over before any clause refines it.
pub fn gen_ranges(nq: &NormalizedQuery) -> BTreeMap<String, AlgebraExpr> {
    let mut out = BTreeMap::new();
    for t in &nq.targets {
        let sets = &nq.target_ranges[t];
        let expr = sets.iter().map(set_expr).reduce(|a, b| a.intersect(b)).expect("targets are ranged");
        out.insert(t.clone(), expr);
    }
    for QuantDecl { var, range, .. } in &nq.prefix {
        out.insert(var.clone(), set_expr(range));
    }
    out
}

/// A variable's range inside one clause: range literals on it become
/// intersections and differences.
pub fn clause_range(var: &str, base: &AlgebraExpr, clause: &[Literal]) -> AlgebraExpr {
    let mut expr = base.clone();
    for l in clause {
        if let Atom::Range { var: v, set } = &l.atom {
            if v == var {
                expr = if l.positive { expr.intersect(set_expr(set)) } else { expr.difference(set_expr(set)) };
            }
        }
    }
    expr
}

fn component(name: &str) -> FunctionExpr {
    FunctionExpr::component(name)
}

/// The relationship object for a tree or graph literal between two unary
/// sets, with columns `(a, b)` in argument order.
pub fn predicate_object(atom: &Atom, left: AlgebraExpr, right: AlgebraExpr, a: &str, b: &str) -> AlgebraExpr {
    match atom {
        Atom::Tree { pred, .. } => {
            let (axis, swap, order) = match pred {
                TreePred::IsParent => (TreeAxis::Parent, false, None),
                TreePred::IsChild => (TreeAxis::Parent, true, None),
                TreePred::IsAncestor => (TreeAxis::Ancestor, false, None),
                TreePred::IsDescendant => (TreeAxis::Ancestor, true, None),
                TreePred::IsSibling => (TreeAxis::Sibling, false, None),
                TreePred::IsPreceding => (TreeAxis::Preceding, false, None),
                TreePred::IsFollowing => (TreeAxis::Following, false, None),
                TreePred::IsPrecedingSibling => (TreeAxis::Sibling, false, Some(CmpOp::Lt)),
                TreePred::IsFollowingSibling => (TreeAxis::Sibling, false, Some(CmpOp::Gt)),
            };
            let rel = if swap {
                E::tree(axis, right, left).rename([b, a]).project([a, b])
            } else {
                E::tree(axis, left, right).rename([a, b])
            };
            match order {
                None => rel,
                Some(op) => rel.select(Condition::new(Operand::Fn(component(a)), op, Operand::Fn(component(b)))),
            }
        }
        Atom::Reach { edges, hops, .. } => {
            let e = E::base(edges.clone());
            match hops {
                None => E::reach(left, right, e),
                Some(n) => E::nhop(left, right, e, *n),
            }
            .rename([a, b])
        }
        other => unreachable!("not a tree or graph literal: {other}"),
    }
}

struct ClauseBuilder<'a> {
    inst: &'a InstanceCategory,
    homes: &'a BTreeMap<String, Option<String>>,
    objects: Vec<CatObject>,
    index: BTreeMap<String, usize>,
    morphisms: Vec<MorphismDecl>,
    selections: Vec<Condition>,
    fresh: usize,
}

impl ClauseBuilder<'_> {
    fn var_object(&self, v: &str) -> &AlgebraExpr {
        &self.objects[self.index[v]].expr
    }

    fn home(&self, v: &str) -> Option<&str> {
        self.homes.get(v).and_then(Option::as_deref)
    }

    fn fresh_name(&mut self, stem: &str) -> String {
        self.fresh += 1;
        format!("_{stem}{}", self.fresh)
    }

    /// The object holding the values of `p`: the variable's own object for
    /// a bare variable, otherwise a new image object linked to it.
    fn endpoint(&mut self, p: &VarPath) -> usize {
        let src = self.index[&p.var];
        if p.is_bare() {
            return src;
        }
        let f = FunctionExpr::Path(p.path.clone());
        let image = self.var_object(&p.var).clone().map(f.clone());
        let alias = self.fresh_name("v");
        self.objects.push(CatObject { expr: image, alias: Some(alias) });
        let dst = self.objects.len() - 1;
        self.morphisms.push(MorphismDecl { func: f, src, dst });
        dst
    }

    fn operand(p: &Arg) -> Operand {
        match p {
            Arg::Const(v) => Operand::Const(v.clone()),
            Arg::Path(vp) => Operand::Fn(FunctionExpr::component_path(vp.var.clone(), vp.path.clone())),
        }
    }

    /// Whether `from.path = to` can be a morphism of the clause category:
    /// the path must land in `to`'s object and `to` must range over all of it.
    fn as_morphism(&self, from: &VarPath, to: &str) -> Result<bool, CompileError> {
        if from.var == to {
            return Ok(false);
        }
        let (Some(src_home), Some(dst_home)) = (self.home(&from.var), self.home(to)) else { return Ok(false) };
        let lands = path_object(self.inst, src_home, &from.path)? == dst_home;
        Ok(lands && *self.var_object(to) == E::base(dst_home))
    }

    fn literal(&mut self, l: &Literal) -> Result<(), CompileError> {
        match &l.atom {
            Atom::Range { .. } => {}
            Atom::Compare { left, op, right } => {
                if let (true, Some((from, to))) = (l.positive, l.atom.as_function_term()) {
                    if self.as_morphism(from, to)? {
                        let func = FunctionExpr::Path(from.path.clone());
                        self.morphisms.push(MorphismDecl { func, src: self.index[&from.var], dst: self.index[to] });
                        return Ok(());
                    }
                }
                let op = if l.positive { *op } else { op.complement() };
                self.selections.push(Condition::new(Self::operand(left), op, Self::operand(right)));
            }
            Atom::Tree { left, right, .. } | Atom::Reach { left, right, .. } => {
                let (li, ri) = (self.endpoint(left), self.endpoint(right));
                let (lx, rx) = (self.objects[li].expr.clone(), self.objects[ri].expr.clone());
                let stem = self.fresh_name("r");
                let (a, b) = (format!("{stem}a"), format!("{stem}b"));
                let mut rel = predicate_object(&l.atom, lx.clone(), rx.clone(), &a, &b);
                if !l.positive {
                    rel = lx.product(rx).rename([a.as_str(), b.as_str()]).difference(rel);
                }
                self.objects.push(CatObject { expr: rel, alias: None });
                let r = self.objects.len() - 1;
                self.morphisms.push(MorphismDecl { func: component(&a), src: r, dst: li });
                self.morphisms.push(MorphismDecl { func: component(&b), src: r, dst: ri });
            }
        }
        Ok(())
    }
}

/// The plan for one DNF clause: a limit over the clause's variables, image
/// objects and predicate objects, then selections, then a projection onto
/// the query's variables.
pub fn build_clause(
    nq: &NormalizedQuery,
    ranges: &BTreeMap<String, AlgebraExpr>,
    clause: &[Literal],
    inst: &InstanceCategory,
) -> Result<AlgebraExpr, CompileError> {
    let homes = nq.homes();
    let order = nq.var_order();
    let mut b = ClauseBuilder {
        inst,
        homes: &homes,
        objects: Vec::new(),
        index: BTreeMap::new(),
        morphisms: Vec::new(),
        selections: Vec::new(),
        fresh: 0,
    };
    for v in &order {
        b.index.insert(v.clone(), b.objects.len());
        b.objects.push(CatObject { expr: clause_range(v, &ranges[v], clause), alias: Some(v.clone()) });
    }
    for l in clause {
        b.literal(l)?;
    }
    let limit = E::Lim(CatExpr::new(b.objects, b.morphisms));
    let selected = b.selections.into_iter().fold(limit, AlgebraExpr::select);
    Ok(selected.project(order))
}

/// Combine clause plans by union, then eliminate the quantifier prefix
/// innermost first: division for universal blocks, projection for
/// existential ones.
pub fn apply_quantifiers(
    nq: &NormalizedQuery,
    ranges: &BTreeMap<String, AlgebraExpr>,
    clauses: Vec<AlgebraExpr>,
    empty: AlgebraExpr,
) -> AlgebraExpr {
    let mut plan = clauses.into_iter().reduce(AlgebraExpr::union).unwrap_or_else(|| empty.clone().difference(empty));
    let mut columns = nq.var_order();
    let mut i = nq.prefix.len();
    while i > 0 {
        let kind = nq.prefix[i - 1].q;
        let mut start = i - 1;
        while start > 0 && nq.prefix[start - 1].q == kind {
            start -= 1;
        }
        let block: Vec<String> = nq.prefix[start..i].iter().map(|d| d.var.clone()).collect();
        columns.retain(|c| !block.contains(c));
        plan = match kind {
            Quantifier::Exists => plan.project(columns.clone()),
            Quantifier::ForAll => {
                let divisor = block
                    .iter()
                    .map(|v| ranges[v].clone().rename([v.as_str()]))
                    .reduce(AlgebraExpr::product)
                    .expect("blocks are nonempty");
                plan.divide(block.clone(), divisor, block)
            }
        };
        i = start;
    }
    plan
}

/// Present the targets: when top-level function terms between targets form
/// a tree rooted at one target, the result is a category of the projected
/// targets linked by those functions; otherwise a projection.
pub fn project_targets(nq: &NormalizedQuery, combined: AlgebraExpr, inst: &InstanceCategory) -> AlgebraExpr {
    let targets = &nq.targets;
    if targets.len() < 2 {
        return combined.project(targets.clone());
    }
    let homes = nq.homes();
    let mut incoming: BTreeMap<&str, (&str, &Vec<String>)> = BTreeMap::new();
    for link in &nq.links {
        let from_home = homes.get(&link.from).and_then(Option::as_deref);
        let to_home = homes.get(&link.to).and_then(Option::as_deref);
        let lands = match (from_home, to_home) {
            (Some(f), Some(t)) => path_object(inst, f, &link.path).is_ok_and(|o| o == t),
            _ => false,
        };
        if lands && !incoming.contains_key(link.to.as_str()) {
            incoming.insert(&link.to, (&link.from, &link.path));
        }
    }
    let roots: Vec<&String> = targets.iter().filter(|t| !incoming.contains_key(t.as_str())).collect();
    let reaches_root = |t: &str| {
        let mut here = t;
        for _ in 0..targets.len() {
            match incoming.get(here) {
                None => return true,
                Some((from, _)) => here = from,
            }
        }
        false
    };
    if roots.len() != 1 || !targets.iter().all(|t| reaches_root(t)) {
        return combined.project(targets.clone());
    }
    let pos = |v: &str| targets.iter().position(|t| t == v).expect("links join targets");
    let objects = targets
        .iter()
        .map(|t| CatObject { expr: combined.clone().project([t.as_str()]), alias: None })
        .collect();
    let morphisms = targets
        .iter()
        .filter_map(|t| incoming.get(t.as_str()).map(|(from, path)| (t, from, path)))
        .map(|(t, from, path)| MorphismDecl { func: FunctionExpr::Path((*path).clone()), src: pos(from), dst: pos(t) })
        .collect();
    E::Cat(CatExpr::new(objects, morphisms))
}
