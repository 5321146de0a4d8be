use std::collections::BTreeMap;
use std::sync::Arc;

use crate::model::{CmpOp, Value};

/// A column of an [`ExtSet`](super::ExtSet). `sort` names the object whose
/// elements the column holds, when known; paths are resolved from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Column {
    pub name: String,
    pub sort: Option<String>,
}

impl Column {
    pub fn new(name: impl Into<String>, sort: Option<String>) -> Self {
        Column { name: name.into(), sort }
    }

    pub fn of_object(object: &str) -> Self {
        Column { name: object.to_string(), sort: Some(object.to_string()) }
    }

    pub fn renamed(self, name: impl Into<String>) -> Self {
        Column { name: name.into(), ..self }
    }
}

/// A finite function given by its graph, produced by rewrites that need a
/// function with no expression in terms of stored morphisms.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFn {
    pub name: String,
    pub output: Vec<Column>,
    pub mapping: BTreeMap<Vec<Value>, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionExpr {
    /// Stored morphisms by name, applied first to last.
    Compose(Vec<String>),
    /// Object path `S1 · ... · Sn` from the input's sort. Empty is the identity.
    Path(Vec<String>),
    /// `f ⊗ g` on a two-column input.
    ProductOf(Box<FunctionExpr>, Box<FunctionExpr>),
    /// Pick one column (or one component of a packed relationship element),
    /// then apply the function.
    ComponentThen(String, Box<FunctionExpr>),
    Table(Arc<TableFn>),
}

impl FunctionExpr {
    pub fn identity() -> Self {
        FunctionExpr::Path(Vec::new())
    }

    pub fn path<S: Into<String>>(hops: impl IntoIterator<Item = S>) -> Self {
        FunctionExpr::Path(hops.into_iter().map(Into::into).collect())
    }

    pub fn component(name: impl Into<String>) -> Self {
        FunctionExpr::ComponentThen(name.into(), Box::new(FunctionExpr::identity()))
    }

    pub fn component_path<S: Into<String>>(name: impl Into<String>, hops: impl IntoIterator<Item = S>) -> Self {
        FunctionExpr::ComponentThen(name.into(), Box::new(FunctionExpr::path(hops)))
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, FunctionExpr::Path(p) if p.is_empty())
    }

    /// Columns read by this function, when it reads named columns only.
    pub fn referenced_columns(&self) -> Option<Vec<&str>> {
        match self {
            FunctionExpr::ComponentThen(c, _) => Some(vec![c.as_str()]),
            FunctionExpr::ProductOf(f, g) => {
                let mut out = f.referenced_columns()?;
                out.extend(g.referenced_columns()?);
                Some(out)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Fn(FunctionExpr),
    Const(Value),
}

/// `left op right`, evaluated per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub left: Operand,
    pub op: CmpOp,
    pub right: Operand,
}

impl Condition {
    pub fn new(left: Operand, op: CmpOp, right: Operand) -> Self {
        Condition { left, op, right }
    }

    pub fn negated(&self) -> Self {
        Condition { op: self.op.complement(), ..self.clone() }
    }

    pub fn operands(&self) -> [&Operand; 2] {
        [&self.left, &self.right]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeAxis {
    Parent,
    Ancestor,
    Sibling,
    Preceding,
    Following,
}

impl TreeAxis {
    pub const ALL: [TreeAxis; 5] =
        [TreeAxis::Parent, TreeAxis::Ancestor, TreeAxis::Sibling, TreeAxis::Preceding, TreeAxis::Following];

    pub fn keyword(self) -> &'static str {
        match self {
            TreeAxis::Parent => "get_parent",
            TreeAxis::Ancestor => "get_ancestor",
            TreeAxis::Sibling => "get_sibling",
            TreeAxis::Preceding => "get_preceding",
            TreeAxis::Following => "get_following",
        }
    }
}

/// One object of a `Cat`, optionally renaming its single column.
#[derive(Debug, Clone, PartialEq)]
pub struct CatObject {
    pub expr: AlgebraExpr,
    pub alias: Option<String>,
}

/// `func(x_src) = x_dst` between two objects of a `Cat`, by position.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphismDecl {
    pub func: FunctionExpr,
    pub src: usize,
    pub dst: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatExpr {
    pub objects: Vec<CatObject>,
    pub morphisms: Vec<MorphismDecl>,
}

impl CatExpr {
    pub fn new(objects: Vec<CatObject>, morphisms: Vec<MorphismDecl>) -> Self {
        CatExpr { objects, morphisms }
    }

    pub fn discrete(exprs: impl IntoIterator<Item = AlgebraExpr>) -> Self {
        CatExpr {
            objects: exprs.into_iter().map(|expr| CatObject { expr, alias: None }).collect(),
            morphisms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraExpr {
    Base(String),
    Map(Box<AlgebraExpr>, FunctionExpr),
    Project(Box<AlgebraExpr>, Vec<String>),
    Select(Box<AlgebraExpr>, Condition),
    Union(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Intersect(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Difference(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Product(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Divide { left: Box<AlgebraExpr>, a: Vec<String>, right: Box<AlgebraExpr>, b: Vec<String> },
    Tree(TreeAxis, Box<AlgebraExpr>, Box<AlgebraExpr>),
    GetReach(Box<AlgebraExpr>, Box<AlgebraExpr>, Box<AlgebraExpr>),
    GetNHop(Box<AlgebraExpr>, Box<AlgebraExpr>, Box<AlgebraExpr>, i64),
    Cat(CatExpr),
    Lim(CatExpr),
    /// Rename every column, keeping sorts.
    Rename(Box<AlgebraExpr>, Vec<String>),
}

use AlgebraExpr as E;

impl AlgebraExpr {
    pub fn base(name: impl Into<String>) -> Self {
        E::Base(name.into())
    }

    pub fn map(self, f: FunctionExpr) -> Self {
        E::Map(Box::new(self), f)
    }

    pub fn project<S: Into<String>>(self, cols: impl IntoIterator<Item = S>) -> Self {
        E::Project(Box::new(self), cols.into_iter().map(Into::into).collect())
    }

    pub fn select(self, c: Condition) -> Self {
        E::Select(Box::new(self), c)
    }

    pub fn union(self, other: Self) -> Self {
        E::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: Self) -> Self {
        E::Intersect(Box::new(self), Box::new(other))
    }

    pub fn difference(self, other: Self) -> Self {
        E::Difference(Box::new(self), Box::new(other))
    }

    pub fn product(self, other: Self) -> Self {
        E::Product(Box::new(self), Box::new(other))
    }

    pub fn divide<S: Into<String>>(self, a: impl IntoIterator<Item = S>, right: Self, b: impl IntoIterator<Item = S>) -> Self {
        E::Divide {
            left: Box::new(self),
            a: a.into_iter().map(Into::into).collect(),
            right: Box::new(right),
            b: b.into_iter().map(Into::into).collect(),
        }
    }

    pub fn tree(axis: TreeAxis, d1: Self, d2: Self) -> Self {
        E::Tree(axis, Box::new(d1), Box::new(d2))
    }

    pub fn reach(s: Self, t: Self, e: Self) -> Self {
        E::GetReach(Box::new(s), Box::new(t), Box::new(e))
    }

    pub fn nhop(s: Self, t: Self, e: Self, n: i64) -> Self {
        E::GetNHop(Box::new(s), Box::new(t), Box::new(e), n)
    }

    pub fn rename<S: Into<String>>(self, names: impl IntoIterator<Item = S>) -> Self {
        E::Rename(Box::new(self), names.into_iter().map(Into::into).collect())
    }

    /// Operator name used by the text syntax.
    pub fn keyword(&self) -> &'static str {
        match self {
            E::Base(_) => "base",
            E::Map(..) => "map",
            E::Project(..) => "project",
            E::Select(..) => "select",
            E::Union(..) => "union",
            E::Intersect(..) => "intersect",
            E::Difference(..) => "difference",
            E::Product(..) => "product",
            E::Divide { .. } => "divide",
            E::Tree(axis, ..) => axis.keyword(),
            E::GetReach(..) => "get_reach",
            E::GetNHop(..) => "get_nhop",
            E::Cat(_) => "cat",
            E::Lim(_) => "lim",
            E::Rename(..) => "rename",
        }
    }

    pub fn children(&self) -> Vec<&AlgebraExpr> {
        match self {
            E::Base(_) => Vec::new(),
            E::Map(c, _) | E::Project(c, _) | E::Select(c, _) | E::Rename(c, _) => vec![c],
            E::Union(l, r) | E::Intersect(l, r) | E::Difference(l, r) | E::Product(l, r) | E::Tree(_, l, r) => {
                vec![l, r]
            }
            E::Divide { left, right, .. } => vec![left, right],
            E::GetReach(s, t, e) | E::GetNHop(s, t, e, _) => vec![s, t, e],
            E::Cat(c) | E::Lim(c) => c.objects.iter().map(|o| &o.expr).collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut AlgebraExpr> {
        match self {
            E::Base(_) => Vec::new(),
            E::Map(c, _) | E::Project(c, _) | E::Select(c, _) | E::Rename(c, _) => vec![c],
            E::Union(l, r) | E::Intersect(l, r) | E::Difference(l, r) | E::Product(l, r) | E::Tree(_, l, r) => {
                vec![l, r]
            }
            E::Divide { left, right, .. } => vec![left, right],
            E::GetReach(s, t, e) | E::GetNHop(s, t, e, _) => vec![s, t, e],
            E::Cat(c) | E::Lim(c) => c.objects.iter_mut().map(|o| &mut o.expr).collect(),
        }
    }

    /// The subexpression at a child-index path from this node.
    pub fn at(&self, path: &[usize]) -> Option<&AlgebraExpr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at(rest)),
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut AlgebraExpr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children_mut().into_iter().nth(i).and_then(|c| c.at_mut(rest)),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Every node path in preorder.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn walk(e: &AlgebraExpr, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(prefix.clone());
            for (i, c) in e.children().into_iter().enumerate() {
                prefix.push(i);
                walk(c, prefix, out);
                prefix.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}
