use std::collections::BTreeSet;
use std::fmt;

use crate::model::{CmpOp, Value};

/// An object-set expression over object names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ObjectSet {
    Name(String),
    Union(Box<ObjectSet>, Box<ObjectSet>),
    Intersect(Box<ObjectSet>, Box<ObjectSet>),
}

impl ObjectSet {
    pub fn name(n: impl Into<String>) -> Self {
        ObjectSet::Name(n.into())
    }

    pub fn names(&self) -> Vec<&str> {
        match self {
            ObjectSet::Name(n) => vec![n.as_str()],
            ObjectSet::Union(a, b) | ObjectSet::Intersect(a, b) => {
                let mut out = a.names();
                out.extend(b.names());
                out
            }
        }
    }

    /// The object every element belongs to, if there is a single one.
    /// An intersection lives inside its left operand; a union only when
    /// both sides agree.
    pub fn home(&self) -> Option<&str> {
        match self {
            ObjectSet::Name(n) => Some(n),
            ObjectSet::Intersect(a, _) => a.home(),
            ObjectSet::Union(a, b) => match (a.home(), b.home()) {
                (Some(x), Some(y)) if x == y => Some(x),
                _ => None,
            },
        }
    }
}

/// A variable followed by zero or more path hops: `x.Obj1.Obj2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarPath {
    pub var: String,
    pub path: Vec<String>,
}

impl VarPath {
    pub fn var(v: impl Into<String>) -> Self {
        VarPath { var: v.into(), path: Vec::new() }
    }

    pub fn new<S: Into<String>>(v: impl Into<String>, path: impl IntoIterator<Item = S>) -> Self {
        VarPath { var: v.into(), path: path.into_iter().map(Into::into).collect() }
    }

    pub fn is_bare(&self) -> bool {
        self.path.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Path(VarPath),
    Const(Value),
}

impl Arg {
    pub fn var_path(&self) -> Option<&VarPath> {
        match self {
            Arg::Path(p) => Some(p),
            Arg::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreePred {
    IsParent,
    IsChild,
    IsAncestor,
    IsDescendant,
    IsSibling,
    IsPreceding,
    IsFollowing,
    IsPrecedingSibling,
    IsFollowingSibling,
}

impl TreePred {
    pub const ALL: [TreePred; 9] = [
        TreePred::IsParent,
        TreePred::IsChild,
        TreePred::IsAncestor,
        TreePred::IsDescendant,
        TreePred::IsSibling,
        TreePred::IsPreceding,
        TreePred::IsFollowing,
        TreePred::IsPrecedingSibling,
        TreePred::IsFollowingSibling,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            TreePred::IsParent => "isParent",
            TreePred::IsChild => "isChild",
            TreePred::IsAncestor => "isAncestor",
            TreePred::IsDescendant => "isDescendant",
            TreePred::IsSibling => "isSibling",
            TreePred::IsPreceding => "isPreceding",
            TreePred::IsFollowing => "isFollowing",
            TreePred::IsPrecedingSibling => "isPrecedingSibling",
            TreePred::IsFollowingSibling => "isFollowingSibling",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    /// `var in S`
    Range { var: String, set: ObjectSet },
    /// `θ_M` between two arguments. `y.P = x` is a function term.
    Compare { left: Arg, op: CmpOp, right: Arg },
    Tree { pred: TreePred, left: VarPath, right: VarPath },
    /// `reach[E](a, b)`, or `nhop[E, n](a, b)` when `hops` is set.
    Reach { edges: String, hops: Option<i64>, left: VarPath, right: VarPath },
}

impl Atom {
    /// A function term `y.P = x` as `(y.P, x)`, in either orientation.
    pub fn as_function_term(&self) -> Option<(&VarPath, &str)> {
        match self {
            Atom::Compare { left: Arg::Path(l), op: CmpOp::Eq, right: Arg::Path(r) } => {
                if !l.is_bare() && r.is_bare() {
                    Some((l, &r.var))
                } else if l.is_bare() && !r.is_bare() {
                    Some((r, &l.var))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn var_paths(&self) -> Vec<&VarPath> {
        match self {
            Atom::Range { .. } => Vec::new(),
            Atom::Compare { left, right, .. } => [left, right].into_iter().filter_map(Arg::var_path).collect(),
            Atom::Tree { left, right, .. } | Atom::Reach { left, right, .. } => vec![left, right],
        }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.var_paths().into_iter().map(|p| p.var.as_str()).collect();
        if let Atom::Range { var, .. } = self {
            out.insert(var);
        }
        out
    }

    pub fn rename_var(&mut self, from: &str, to: &str) {
        let fix = |v: &mut String| {
            if v == from {
                *v = to.to_string();
            }
        };
        match self {
            Atom::Range { var, .. } => fix(var),
            Atom::Compare { left, right, .. } => {
                for a in [left, right] {
                    if let Arg::Path(p) = a {
                        fix(&mut p.var);
                    }
                }
            }
            Atom::Tree { left, right, .. } | Atom::Reach { left, right, .. } => {
                fix(&mut left.var);
                fix(&mut right.var);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    ForAll,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::ForAll => "forall",
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::ForAll,
            Quantifier::ForAll => Quantifier::Exists,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Const(bool),
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// A quantifier with its range. The range is optional only so that the
    /// safety check can report unranged quantifiers.
    Quant { q: Quantifier, var: String, range: Option<ObjectSet>, body: Box<Formula> },
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quantifier, var: impl Into<String>, range: Option<ObjectSet>, body: Formula) -> Self {
        Formula::Quant { q, var: var.into(), range, body: Box::new(body) }
    }

    pub fn range(var: impl Into<String>, set: ObjectSet) -> Self {
        Formula::Atom(Atom::Range { var: var.into(), set })
    }

    /// Conjunction of a list; `true` when empty.
    pub fn all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::Const(true))
    }

    /// The top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Const(_) => BTreeSet::new(),
            Formula::Atom(a) => a.vars().into_iter().map(String::from).collect(),
            Formula::Not(f) => f.free_vars(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Formula::Quant { var, body, .. } => {
                let mut out = body.free_vars();
                out.remove(var);
                out
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(a) => out.extend(a.vars().into_iter().map(String::from)),
            Formula::Quant { var, .. } => {
                out.insert(var.clone());
            }
            _ => {}
        });
        out
    }

    /// Preorder visit of every subformula.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Const(_) | Formula::Atom(_) => {}
            Formula::Not(g) => g.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Quant { body, .. } => body.visit(f),
        }
    }

    /// Rewrite `A -> B` as `not A or B` throughout.
    pub fn without_implications(&self) -> Formula {
        match self {
            Formula::Const(_) | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.without_implications()),
            Formula::And(a, b) => Formula::and(a.without_implications(), b.without_implications()),
            Formula::Or(a, b) => Formula::or(a.without_implications(), b.without_implications()),
            Formula::Implies(a, b) => Formula::or(Formula::not(a.without_implications()), b.without_implications()),
            Formula::Quant { q, var, range, body } => {
                Formula::quant(*q, var.clone(), range.clone(), body.without_implications())
            }
        }
    }

    /// Rename free occurrences of `from` to `to`. `to` must not be bound
    /// anywhere inside.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Const(_) => self.clone(),
            Formula::Atom(a) => {
                let mut a = a.clone();
                a.rename_var(from, to);
                Formula::Atom(a)
            }
            Formula::Not(f) => Formula::not(f.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Implies(a, b) => Formula::implies(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Quant { var, .. } if var == from => self.clone(),
            Formula::Quant { q, var, range, body } => {
                Formula::quant(*q, var.clone(), range.clone(), body.rename_free(from, to))
            }
        }
    }
}

/// A target: a single variable, or a tuple of variables standing for a
/// relationship element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Var(String),
    Tuple(Vec<String>),
}

/// `{ targets | body }`
#[derive(Debug, Clone, PartialEq)]
pub struct CalculusQuery {
    pub targets: Vec<Target>,
    pub body: Formula,
}

impl CalculusQuery {
    /// Target variables in output order, tuples flattened.
    pub fn target_vars(&self) -> Vec<String> {
        self.targets
            .iter()
            .flat_map(|t| match t {
                Target::Var(v) => vec![v.clone()],
                Target::Tuple(vs) => vs.clone(),
            })
            .collect()
    }

    /// Object set of the first top-level range conjunct on `var`.
    pub fn target_range(&self, var: &str) -> Option<&ObjectSet> {
        self.body.conjuncts().into_iter().find_map(|c| match c {
            Formula::Atom(Atom::Range { var: v, set }) if v == var => Some(set),
            _ => None,
        })
    }
}

impl fmt::Display for ObjectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectSet::Name(n) => write!(f, "{n}"),
            ObjectSet::Union(a, b) => write!(f, "({a} union {b})"),
            ObjectSet::Intersect(a, b) => write!(f, "({a} intersect {b})"),
        }
    }
}

impl fmt::Display for VarPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.var)?;
        for hop in &self.path {
            write!(f, ".{hop}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Path(p) => write!(f, "{p}"),
            Arg::Const(Value::Text(s)) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Arg::Const(Value::Dewey(d)) => write!(f, "dewey\"{}\"", d.components().iter().map(u32::to_string).collect::<Vec<_>>().join(".")),
            Arg::Const(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Range { var, set } => write!(f, "{var} in {set}"),
            Atom::Compare { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
            Atom::Tree { pred, left, right } => write!(f, "{}({left}, {right})", pred.keyword()),
            Atom::Reach { edges, hops: None, left, right } => write!(f, "reach[{edges}]({left}, {right})"),
            Atom::Reach { edges, hops: Some(n), left, right } => write!(f, "nhop[{edges}, {n}]({left}, {right})"),
        }
    }
}

/// Fully parenthesised text that parses back to the same formula.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "not ({g})"),
            Formula::And(a, b) => write!(f, "({a} and {b})"),
            Formula::Or(a, b) => write!(f, "({a} or {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Quant { q, var, range: Some(r), body } => write!(f, "{} {var} in {r}: ({body})", q.keyword()),
            Formula::Quant { q, var, range: None, body } => write!(f, "{} {var}: ({body})", q.keyword()),
        }
    }
}

impl fmt::Display for CalculusQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let targets: Vec<String> = self
            .targets
            .iter()
            .map(|t| match t {
                Target::Var(v) => v.clone(),
                Target::Tuple(vs) => format!("({})", vs.join(", ")),
            })
            .collect();
        write!(f, "{{ {} | {} }}", targets.join(", "), self.body)
    }
}
