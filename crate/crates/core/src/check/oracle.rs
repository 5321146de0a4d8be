//! Reference implementations that share no code with the evaluator.

use std::collections::BTreeSet;

use crate::algebra::TreeAxis;
use crate::model::Value;

/// Transitive closure of a digraph on `n` nodes by Warshall's algorithm.
/// `closure[a][b]` holds when a path of one or more edges leads from a to b.
pub fn warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

/// Pairs joined by a walk of between one and `n` edges, by repeated
/// boolean matrix products.
pub fn within_hops(nodes: usize, edges: &[(usize, usize)], n: usize) -> Vec<Vec<bool>> {
    let mut step = vec![vec![false; nodes]; nodes];
    for &(a, b) in edges {
        step[a][b] = true;
    }
    let mut power = step.clone();
    let mut acc = step.clone();
    for _ in 1..n {
        let mut next = vec![vec![false; nodes]; nodes];
        for i in 0..nodes {
            for k in 0..nodes {
                if power[i][k] {
                    for j in 0..nodes {
                        next[i][j] |= step[k][j];
                    }
                }
            }
        }
        power = next;
        for i in 0..nodes {
            for j in 0..nodes {
                acc[i][j] |= power[i][j];
            }
        }
    }
    acc
}

/// Axis relations on a parent-pointer tree whose children are ordered by
/// node index.
pub struct PointerTree {
    parents: Vec<Option<usize>>,
    preorder: Vec<usize>,
}

impl PointerTree {
    pub fn new(parents: Vec<Option<usize>>) -> Self {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (i, p) in parents.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        let mut preorder = vec![0; n];
        let mut counter = 0;
        let mut stack: Vec<usize> = roots.into_iter().rev().collect();
        while let Some(v) = stack.pop() {
            preorder[v] = counter;
            counter += 1;
            stack.extend(children[v].iter().rev());
        }
        PointerTree { parents, preorder }
    }

    fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut here = self.parents[b];
        while let Some(p) = here {
            if p == a {
                return true;
            }
            here = self.parents[p];
        }
        false
    }

    /// Whether `(x, y)` is in the axis relation, read as "x is the parent /
    /// an ancestor / a sibling / preceding / following of y".
    pub fn holds(&self, axis: TreeAxis, x: usize, y: usize) -> bool {
        match axis {
            TreeAxis::Parent => self.parents[y] == Some(x),
            TreeAxis::Ancestor => self.is_ancestor(x, y),
            TreeAxis::Sibling => x != y && self.parents[x].is_some() && self.parents[x] == self.parents[y],
            TreeAxis::Preceding => self.preorder[x] < self.preorder[y] && !self.is_ancestor(x, y),
            TreeAxis::Following => self.preorder[x] > self.preorder[y] && !self.is_ancestor(y, x),
        }
    }
}

type Rows = BTreeSet<Vec<Value>>;

fn project(rows: &Rows, idx: &[usize]) -> Rows {
    rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect()
}

/// `π_Ā R − π_Ā((π_Ā R × π_B S) − R)` where `r_b` are the positions of R
/// aligned with S's positions `s_b`, and Ā is the rest of R in order.
pub fn composite_divide(r: &Rows, r_arity: usize, r_b: &[usize], s: &Rows, s_b: &[usize]) -> Rows {
    let rest: Vec<usize> = (0..r_arity).filter(|i| !r_b.contains(i)).collect();
    let pa = project(r, &rest);
    let pb = project(s, s_b);
    let mut missing = Rows::new();
    for a in &pa {
        for b in &pb {
            // rebuild an R row from its Ā and aligned parts
            let mut row = vec![Value::Int(0); r_arity];
            for (k, &i) in rest.iter().enumerate() {
                row[i] = a[k].clone();
            }
            for (k, &i) in r_b.iter().enumerate() {
                row[i] = b[k].clone();
            }
            if !r.contains(&row) {
                missing.insert(row);
            }
        }
    }
    let excluded = project(&missing, &rest);
    pa.difference(&excluded).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_of_a_cycle_is_complete() {
        let m = warshall(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(m.iter().all(|row| row.iter().all(|&b| b)));
        let m = warshall(3, &[(0, 1)]);
        assert!(m[0][1] && !m[1][0] && !m[0][0]);
    }

    #[test]
    fn hop_bounds() {
        let path = [(0, 1), (1, 2), (2, 3)];
        assert!(!within_hops(4, &path, 2)[0][3]);
        assert!(within_hops(4, &path, 3)[0][3]);
    }

    #[test]
    fn pointer_tree_axes() {
        // 0 ─┬─ 1 ── 3
        //    └─ 2
        let t = PointerTree::new(vec![None, Some(0), Some(0), Some(1)]);
        assert!(t.holds(TreeAxis::Parent, 0, 1));
        assert!(t.holds(TreeAxis::Ancestor, 0, 3));
        assert!(t.holds(TreeAxis::Sibling, 2, 1));
        assert!(t.holds(TreeAxis::Preceding, 3, 2));
        assert!(!t.holds(TreeAxis::Preceding, 1, 3));
        assert!(t.holds(TreeAxis::Following, 2, 3));
        assert!(!t.holds(TreeAxis::Following, 3, 1));
    }

    #[test]
    fn division_by_the_composite_formula() {
        let v = |a: i64, b: i64| vec![Value::Int(a), Value::Int(b)];
        let r: Rows = [v(1, 10), v(1, 20), v(2, 10)].into_iter().collect();
        let s: Rows = [vec![Value::Int(10)], vec![Value::Int(20)]].into_iter().collect();
        assert_eq!(composite_divide(&r, 2, &[1], &s, &[0]), [vec![Value::Int(1)]].into_iter().collect());
    }
}
