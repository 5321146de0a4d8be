use super::extset::{dedupe_names, packed_components};
use super::function::resolve;
use super::{AlgebraError, AlgebraExpr, CatExpr, Column, Operand};
use crate::model::InstanceCategory;

use AlgebraExpr as E;

/// Output columns of a plan, checking every operator's preconditions on
/// names, arities and paths without touching the data.
pub fn columns_of(expr: &AlgebraExpr, inst: &InstanceCategory) -> Result<Vec<Column>, AlgebraError> {
    let children = expr.children().into_iter().map(|c| columns_of(c, inst)).collect::<Result<Vec<_>, _>>()?;
    node_columns(expr, &children, inst)
}

/// Columns after automatic unpacking of a packed relationship column.
pub fn unpacked_columns(cols: &[Column], inst: &InstanceCategory) -> Vec<Column> {
    packed_components(cols, inst).unwrap_or_else(|| cols.to_vec())
}

/// Columns in which to look up `names`: unpacked only when some name is
/// not already a column.
fn columns_for(cols: &[Column], names: &[String], inst: &InstanceCategory) -> Vec<Column> {
    if names.iter().all(|n| cols.iter().any(|c| &c.name == n)) {
        cols.to_vec()
    } else {
        unpacked_columns(cols, inst)
    }
}

fn index_all(cols: &[Column], names: &[String]) -> Result<Vec<usize>, AlgebraError> {
    names
        .iter()
        .map(|n| {
            cols.iter().position(|c| &c.name == n).ok_or_else(|| AlgebraError::UnknownComponent {
                component: n.clone(),
                available: cols.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "),
            })
        })
        .collect()
}

fn expect_arity(op: &str, cols: &[Column], n: usize) -> Result<(), AlgebraError> {
    if cols.len() == n {
        Ok(())
    } else {
        Err(AlgebraError::ArityMismatch { op: op.to_string(), expected: n, found: cols.len() })
    }
}

/// Columns of each `Cat` object after its alias is applied.
pub fn cat_object_columns(cat: &CatExpr, children: &[Vec<Column>]) -> Result<Vec<Vec<Column>>, AlgebraError> {
    cat.objects
        .iter()
        .zip(children)
        .map(|(o, cols)| match &o.alias {
            None => Ok(cols.clone()),
            Some(alias) => {
                expect_arity("cat alias", cols, 1)?;
                Ok(vec![Column::new(alias.clone(), cols[0].sort.clone())])
            }
        })
        .collect()
}

fn check_cat(cat: &CatExpr, children: &[Vec<Column>], inst: &InstanceCategory) -> Result<Vec<Column>, AlgebraError> {
    if cat.objects.is_empty() {
        return Err(AlgebraError::ArityMismatch { op: "cat".into(), expected: 1, found: 0 });
    }
    let objects = cat_object_columns(cat, children)?;
    for d in &cat.morphisms {
        let (Some(src), Some(dst)) = (objects.get(d.src), objects.get(d.dst)) else {
            return Err(AlgebraError::UnknownComponent {
                component: format!("object index {} or {}", d.src, d.dst),
                available: format!("0..{}", objects.len()),
            });
        };
        let f = resolve(&d.func, src, inst)?;
        if f.output.len() != dst.len() {
            return Err(AlgebraError::ArityMismatch { op: "cat morphism".into(), expected: dst.len(), found: f.output.len() });
        }
    }
    Ok(dedupe_names(objects.into_iter().flatten().collect()))
}

pub(crate) fn node_columns(
    expr: &AlgebraExpr,
    children: &[Vec<Column>],
    inst: &InstanceCategory,
) -> Result<Vec<Column>, AlgebraError> {
    let child = |i: usize| children[i].as_slice();
    match expr {
        E::Base(name) => {
            if inst.has_object(name) {
                Ok(vec![Column::of_object(name)])
            } else {
                Err(AlgebraError::UnknownObject(name.clone()))
            }
        }
        E::Map(_, f) => Ok(dedupe_names(resolve(f, child(0), inst)?.output)),
        E::Project(_, names) => {
            if names.is_empty() {
                return Err(AlgebraError::ArityMismatch { op: "project".into(), expected: 1, found: 0 });
            }
            let cols = columns_for(child(0), names, inst);
            let idx = index_all(&cols, names)?;
            Ok(dedupe_names(idx.into_iter().map(|i| cols[i].clone()).collect()))
        }
        E::Select(_, c) => {
            for operand in c.operands() {
                if let Operand::Fn(f) = operand {
                    let r = resolve(f, child(0), inst)?;
                    expect_arity("select operand", &r.output, 1)?;
                }
            }
            Ok(child(0).to_vec())
        }
        E::Union(..) | E::Intersect(..) | E::Difference(..) => {
            let (l, r) = (child(0), child(1));
            if l.len() != r.len() {
                return Err(AlgebraError::UnionIncompatible(format!(
                    "{} has arity {} but its right operand has arity {}",
                    expr.keyword(),
                    l.len(),
                    r.len()
                )));
            }
            // elements of an intersection or difference stay inside the left operand
            let keep_left = !matches!(expr, E::Union(..));
            Ok(l.iter()
                .zip(r)
                .map(|(a, b)| {
                    let sort = if keep_left || a.sort == b.sort { a.sort.clone() } else { None };
                    Column::new(a.name.clone(), sort)
                })
                .collect())
        }
        E::Product(..) => Ok(dedupe_names(child(0).iter().chain(child(1)).cloned().collect())),
        E::Divide { a, b, .. } => {
            let r = columns_for(child(0), a, inst);
            let s = columns_for(child(1), b, inst);
            let ai = index_all(&r, a)?;
            index_all(&s, b)?;
            if a.len() != b.len() || a.is_empty() {
                return Err(AlgebraError::ComponentMismatch(format!(
                    "divide aligns {} components of the dividend with {} of the divisor",
                    a.len(),
                    b.len()
                )));
            }
            let rest: Vec<Column> = r.iter().enumerate().filter(|(i, _)| !ai.contains(i)).map(|(_, c)| c.clone()).collect();
            if rest.is_empty() {
                return Err(AlgebraError::ComponentMismatch("divide leaves no components".into()));
            }
            Ok(rest)
        }
        E::Tree(axis, ..) => {
            expect_arity(axis.keyword(), child(0), 1)?;
            expect_arity(axis.keyword(), child(1), 1)?;
            Ok(dedupe_names(vec![child(0)[0].clone(), child(1)[0].clone()]))
        }
        E::GetReach(..) | E::GetNHop(..) => {
            if let E::GetNHop(.., n) = expr {
                if *n < 1 {
                    return Err(AlgebraError::InvalidHopCount(*n));
                }
            }
            expect_arity(expr.keyword(), child(0), 1)?;
            expect_arity(expr.keyword(), child(1), 1)?;
            expect_arity(expr.keyword(), &unpacked_columns(child(2), inst), 2)?;
            Ok(dedupe_names(vec![child(0)[0].clone(), child(1)[0].clone()]))
        }
        E::Cat(cat) | E::Lim(cat) => check_cat(cat, children, inst),
        E::Rename(_, names) => {
            expect_arity("rename", child(0), names.len())?;
            Ok(child(0).iter().zip(names).map(|(c, n)| Column::new(n.clone(), c.sort.clone())).collect())
        }
    }
}
