use std::collections::BTreeSet;
use std::fmt;

use super::{AlgebraError, Column};
use crate::model::{InstanceCategory, ObjectKind, Value, ValueKind};

/// A finite set of rows with named columns. Set semantics throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtSet {
    pub columns: Vec<Column>,
    pub rows: BTreeSet<Vec<Value>>,
}

impl ExtSet {
    pub fn new(columns: Vec<Column>) -> Self {
        ExtSet { columns, rows: BTreeSet::new() }
    }

    pub fn from_rows(columns: Vec<Column>, rows: impl IntoIterator<Item = Vec<Value>>) -> Self {
        ExtSet { columns, rows: rows.into_iter().collect() }
    }

    /// An arity-1 set.
    pub fn unary(column: Column, values: impl IntoIterator<Item = Value>) -> Self {
        ExtSet::from_rows(vec![column], values.into_iter().map(|v| vec![v]))
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Value kinds per column, taken from any row.
    pub fn kinds(&self) -> Option<Vec<ValueKind>> {
        self.rows.iter().next().map(|r| r.iter().map(Value::kind).collect())
    }

    /// Values of a single-column set.
    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.rows.iter().filter_map(|r| r.first())
    }

    pub fn column_indices(&self, names: &[String]) -> Result<Vec<usize>, AlgebraError> {
        names
            .iter()
            .map(|n| {
                self.index_of(n).ok_or_else(|| AlgebraError::UnknownComponent {
                    component: n.clone(),
                    available: self.column_names().join(", "),
                })
            })
            .collect()
    }

    /// If this is a single column of relationship elements, split the packed
    /// tuples into one column per component. Otherwise unchanged.
    pub fn unpacked(self, inst: &InstanceCategory) -> ExtSet {
        match packed_components(&self.columns, inst) {
            None => self,
            Some(columns) => {
                let rows = self
                    .rows
                    .into_iter()
                    .map(|r| match r.into_iter().next() {
                        Some(Value::Tuple(fields)) => fields.into_iter().map(|(_, v)| v).collect(),
                        other => other.into_iter().collect(),
                    })
                    .collect();
                ExtSet { columns, rows }
            }
        }
    }
}

impl ExtSet {
    /// Unpack only when `names` are not already columns of this set.
    pub fn unpacked_for(self, names: &[String], inst: &InstanceCategory) -> ExtSet {
        if names.iter().all(|n| self.index_of(n).is_some()) {
            self
        } else {
            self.unpacked(inst)
        }
    }
}

/// Component columns of a packed relationship column, if `columns` is one.
pub fn packed_components(columns: &[Column], inst: &InstanceCategory) -> Option<Vec<Column>> {
    let [col] = columns else { return None };
    let obj = inst.object(col.sort.as_deref()?)?;
    (obj.kind == ObjectKind::Relationship).then(|| {
        obj.components.iter().map(|c| Column::new(c.name.clone(), Some(c.object.clone()))).collect()
    })
}

/// Make column names unique by suffixing repeats with `#k`.
pub fn dedupe_names(columns: Vec<Column>) -> Vec<Column> {
    let mut seen: Vec<String> = Vec::new();
    columns
        .into_iter()
        .map(|mut c| {
            if seen.contains(&c.name) {
                let base = c.name.clone();
                let mut k = 2;
                while seen.contains(&format!("{base}#{k}")) {
                    k += 1;
                }
                c.name = format!("{base}#{k}");
            }
            seen.push(c.name.clone());
            c
        })
        .collect()
}

impl fmt::Display for ExtSet {
    /// Tab-separated, header first, rows in sorted order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.column_names().join("\t"))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_names_get_suffixes() {
        let cols = dedupe_names(vec![Column::of_object("S"), Column::of_object("T"), Column::of_object("S"), Column::of_object("S")]);
        let names: Vec<_> = cols.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["S", "T", "S#2", "S#3"]);
        assert_eq!(cols[2].sort.as_deref(), Some("S"));
    }
}
