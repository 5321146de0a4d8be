use std::collections::{BTreeMap, BTreeSet};

use super::CompileError;
use crate::calculus::{self, Atom, CalculusQuery, Formula, ObjectSet, Quantifier};
use crate::model::InstanceCategory;

/// One entry of the quantifier prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantDecl {
    pub q: Quantifier,
    pub var: String,
    pub range: ObjectSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl std::fmt::Display for Literal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "not ({})", self.atom)
        }
    }
}

/// A top-level function term `from.path = to` between two targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: String,
    pub path: Vec<String>,
    pub to: String,
}

/// A query in prenex form with a DNF matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedQuery {
    pub targets: Vec<String>,
    /// Every top-level range conjunct of each target, in order.
    pub target_ranges: BTreeMap<String, Vec<ObjectSet>>,
    pub prefix: Vec<QuantDecl>,
    pub clauses: Vec<Vec<Literal>>,
    pub links: Vec<Link>,
}

impl NormalizedQuery {
    /// Targets first, then quantified variables outermost first.
    pub fn var_order(&self) -> Vec<String> {
        self.targets.iter().cloned().chain(self.prefix.iter().map(|d| d.var.clone())).collect()
    }

    /// The object holding each variable's elements, where there is one.
    pub fn homes(&self) -> BTreeMap<String, Option<String>> {
        let mut out: BTreeMap<String, Option<String>> = self
            .target_ranges
            .iter()
            .map(|(v, sets)| (v.clone(), sets.first().and_then(ObjectSet::home).map(String::from)))
            .collect();
        for d in &self.prefix {
            out.insert(d.var.clone(), d.range.home().map(String::from));
        }
        out
    }
}

/// Above this many DNF clauses compilation gives up.
pub const MAX_CLAUSES: usize = 4096;

pub fn normalize(q: &CalculusQuery, inst: &InstanceCategory) -> Result<NormalizedQuery, CompileError> {
    let report = calculus::check_safety(q);
    if !report.is_empty() {
        return Err(CompileError::Unsafe(report));
    }
    calculus::resolve(q, inst)?;
    let targets = q.target_vars();
    let body = q.body.without_implications();

    let mut target_ranges: BTreeMap<String, Vec<ObjectSet>> = BTreeMap::new();
    let mut rest = Vec::new();
    let mut links = Vec::new();
    for c in body.conjuncts() {
        match c {
            Formula::Atom(Atom::Range { var, set }) if targets.contains(var) => {
                target_ranges.entry(var.clone()).or_default().push(set.clone());
            }
            other => {
                if let Formula::Atom(a) = other {
                    if let Some((p, to)) = a.as_function_term() {
                        if targets.contains(&p.var) && targets.iter().any(|t| t == to) && p.var != to {
                            links.push(Link { from: p.var.clone(), path: p.path.clone(), to: to.to_string() });
                        }
                    }
                }
                rest.push(other.clone());
            }
        }
    }

    let matrix = simplify(vacuity(nnf(Formula::all(rest), true), inst));
    let mut used: BTreeSet<String> = body.all_vars();
    used.extend(targets.iter().cloned());
    let mut bound = targets.iter().cloned().collect();
    let matrix = rename_apart(&matrix, &mut bound, &mut used);
    let mut prefix = Vec::new();
    let matrix = prenex(matrix, &mut prefix);
    let clauses = dnf(&matrix)?;
    Ok(NormalizedQuery { targets, target_ranges, prefix, clauses, links })
}

/// Negation normal form: negations only directly above atoms.
fn nnf(f: Formula, positive: bool) -> Formula {
    match f {
        Formula::Const(b) => Formula::Const(b == positive),
        Formula::Atom(a) => {
            if positive {
                Formula::Atom(a)
            } else {
                Formula::not(Formula::Atom(a))
            }
        }
        Formula::Not(g) => nnf(*g, !positive),
        Formula::And(a, b) if positive => Formula::and(nnf(*a, true), nnf(*b, true)),
        Formula::And(a, b) => Formula::or(nnf(*a, false), nnf(*b, false)),
        Formula::Or(a, b) if positive => Formula::or(nnf(*a, true), nnf(*b, true)),
        Formula::Or(a, b) => Formula::and(nnf(*a, false), nnf(*b, false)),
        Formula::Implies(a, b) => nnf(Formula::or(Formula::not(*a), *b), positive),
        Formula::Quant { q, var, range, body } => {
            let q = if positive { q } else { q.dual() };
            Formula::quant(q, var, range, nnf(*body, positive))
        }
    }
}

/// Replace quantifiers over empty ranges by their truth value, so every
/// quantifier left in the formula has at least one witness candidate.
fn vacuity(f: Formula, inst: &InstanceCategory) -> Formula {
    match f {
        Formula::Quant { q, range: Some(range), .. } if calculus::set_elements(inst, &range).is_empty() => {
            Formula::Const(q == Quantifier::ForAll)
        }
        Formula::Quant { q, var, range, body } => Formula::quant(q, var, range, vacuity(*body, inst)),
        Formula::And(a, b) => Formula::and(vacuity(*a, inst), vacuity(*b, inst)),
        Formula::Or(a, b) => Formula::or(vacuity(*a, inst), vacuity(*b, inst)),
        Formula::Not(g) => Formula::not(vacuity(*g, inst)),
        other => other,
    }
}

/// Fold boolean constants away where they meet a connective or quantifier.
fn simplify(f: Formula) -> Formula {
    match f {
        Formula::And(a, b) => match (simplify(*a), simplify(*b)) {
            (Formula::Const(false), _) | (_, Formula::Const(false)) => Formula::Const(false),
            (Formula::Const(true), x) | (x, Formula::Const(true)) => x,
            (x, y) => Formula::and(x, y),
        },
        Formula::Or(a, b) => match (simplify(*a), simplify(*b)) {
            (Formula::Const(true), _) | (_, Formula::Const(true)) => Formula::Const(true),
            (Formula::Const(false), x) | (x, Formula::Const(false)) => x,
            (x, y) => Formula::or(x, y),
        },
        Formula::Not(g) => match simplify(*g) {
            Formula::Const(b) => Formula::Const(!b),
            x => Formula::not(x),
        },
        Formula::Quant { q, var, range, body } => match simplify(*body) {
            // ranges are nonempty here
            Formula::Const(b) => Formula::Const(b),
            x => Formula::quant(q, var, range, x),
        },
        other => other,
    }
}

/// Give every quantifier a variable name used nowhere else.
fn rename_apart(f: &Formula, bound: &mut BTreeSet<String>, used: &mut BTreeSet<String>) -> Formula {
    match f {
        Formula::Const(_) | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(rename_apart(g, bound, used)),
        Formula::And(a, b) => {
            let a = rename_apart(a, bound, used);
            Formula::and(a, rename_apart(b, bound, used))
        }
        Formula::Or(a, b) => {
            let a = rename_apart(a, bound, used);
            Formula::or(a, rename_apart(b, bound, used))
        }
        Formula::Implies(a, b) => {
            let a = rename_apart(a, bound, used);
            Formula::implies(a, rename_apart(b, bound, used))
        }
        Formula::Quant { q, var, range, body } => {
            let (name, body) = if bound.contains(var) {
                let mut k = 2;
                while used.contains(&format!("{var}_{k}")) {
                    k += 1;
                }
                let fresh = format!("{var}_{k}");
                used.insert(fresh.clone());
                let renamed = body.rename_free(var, &fresh);
                (fresh, renamed)
            } else {
                (var.clone(), (**body).clone())
            };
            bound.insert(name.clone());
            Formula::quant(*q, name, range.clone(), rename_apart(&body, bound, used))
        }
    }
}

/// Pull quantifiers out to a prefix. Valid because variables are renamed
/// apart and every range is nonempty.
fn prenex(f: Formula, prefix: &mut Vec<QuantDecl>) -> Formula {
    match f {
        Formula::Quant { q, var, range, body } => {
            prefix.push(QuantDecl { q, var, range: range.expect("safe quantifiers are ranged") });
            prenex(*body, prefix)
        }
        Formula::And(a, b) => {
            let a = prenex(*a, prefix);
            Formula::and(a, prenex(*b, prefix))
        }
        Formula::Or(a, b) => {
            let a = prenex(*a, prefix);
            Formula::or(a, prenex(*b, prefix))
        }
        other => other,
    }
}

fn dnf(f: &Formula) -> Result<Vec<Vec<Literal>>, CompileError> {
    let out = match f {
        Formula::Const(true) => vec![Vec::new()],
        Formula::Const(false) => Vec::new(),
        Formula::Atom(a) => vec![vec![Literal { positive: true, atom: a.clone() }]],
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => vec![vec![Literal { positive: false, atom: a.clone() }]],
            other => unreachable!("negation above a non-atom after nnf: {other}"),
        },
        Formula::Or(a, b) => {
            let mut out = dnf(a)?;
            out.extend(dnf(b)?);
            out
        }
        Formula::And(a, b) => {
            let (l, r) = (dnf(a)?, dnf(b)?);
            if l.len().saturating_mul(r.len()) > MAX_CLAUSES {
                return Err(CompileError::TooManyClauses(l.len() * r.len()));
            }
            let mut out = Vec::with_capacity(l.len() * r.len());
            for x in &l {
                for y in &r {
                    out.push(x.iter().chain(y).cloned().collect());
                }
            }
            out
        }
        other => unreachable!("quantifier or implication left in the matrix: {other}"),
    };
    if out.len() > MAX_CLAUSES {
        return Err(CompileError::TooManyClauses(out.len()));
    }
    Ok(out)
}

