use crate::algebra::AlgebraExpr;
use crate::model::InstanceCategory;

use AlgebraExpr as E;

pub const SELECT_FACTOR: f64 = 0.3;
pub const DIVIDE_FACTOR: f64 = 0.1;
pub const PAIRING_FACTOR: f64 = 0.5;

/// Plan cost: the summed cardinality estimates of all nodes (in thousandths),
/// then the node count. Compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost {
    pub weight: u64,
    pub nodes: usize,
}

impl std::fmt::Display for Cost {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{:03} over {} nodes", self.weight / 1000, self.weight % 1000, self.nodes)
    }
}

/// Estimated output cardinality of a plan node.
pub fn estimate(expr: &AlgebraExpr, inst: &InstanceCategory) -> f64 {
    walk(expr, inst).0
}

pub fn cost(expr: &AlgebraExpr, inst: &InstanceCategory) -> Cost {
    let (_, weight) = walk(expr, inst);
    Cost { weight, nodes: expr.node_count() }
}

fn milli(x: f64) -> u64 {
    let scaled = (x * 1000.0).round();
    if scaled >= u64::MAX as f64 {
        u64::MAX
    } else {
        scaled.max(0.0) as u64
    }
}

/// (estimate of this node, summed weight of the subtree)
fn walk(expr: &AlgebraExpr, inst: &InstanceCategory) -> (f64, u64) {
    let kids: Vec<(f64, u64)> = expr.children().into_iter().map(|c| walk(c, inst)).collect();
    let below: u64 = kids.iter().fold(0u64, |acc, (_, w)| acc.saturating_add(*w));
    let k = |i: usize| kids[i].0;
    let here = match expr {
        E::Base(name) => inst.object(name).map_or(0, |o| o.elements.len()) as f64,
        E::Map(..) | E::Project(..) | E::Rename(..) => k(0),
        E::Select(..) => SELECT_FACTOR * k(0),
        E::Union(..) => k(0) + k(1),
        E::Intersect(..) => k(0).min(k(1)),
        E::Difference(..) => k(0),
        E::Product(..) => k(0) * k(1),
        E::Divide { .. } => DIVIDE_FACTOR * k(0),
        E::Tree(..) | E::GetReach(..) | E::GetNHop(..) => PAIRING_FACTOR * k(0) * k(1),
        E::Cat(cat) | E::Lim(cat) => {
            let mut est: f64 = kids.iter().map(|(c, _)| c).product();
            for m in &cat.morphisms {
                let dst = kids.get(m.dst).map_or(0.0, |(c, _)| *c);
                est = if dst > 0.0 { est / dst } else { 0.0 };
            }
            est
        }
    };
    (here, below.saturating_add(milli(here)))
}
