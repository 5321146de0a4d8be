use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::DeweyCode;

/// An element of some object in the instance.
///
/// Values of different kinds never compare under the classic predicates;
/// [`Value::compare`] reports a type error instead of answering `false`.
/// The derived-looking total order (`Ord`) exists only so values can live in
/// ordered sets: it sorts by kind first, and uses `f64::total_cmp` for floats.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Dewey(DeweyCode),
    /// Element of a relationship object: named components in declaration order.
    Tuple(Vec<(String, Value)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueKind {
    Int,
    Float,
    Text,
    Dewey,
    Tuple,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Int => "int",
            ValueKind::Float => "float",
            ValueKind::Text => "text",
            ValueKind::Dewey => "dewey",
            ValueKind::Tuple => "tuple",
        };
        f.write_str(s)
    }
}

/// The classic comparison predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge];

    /// The operator whose truth value is the negation of `self`.
    pub fn complement(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Le => CmpOp::Gt,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    /// Keyword used by the textual algebra syntax.
    pub fn keyword(self) -> &'static str {
        match self {
            CmpOp::Eq => "eq",
            CmpOp::Ne => "ne",
            CmpOp::Lt => "lt",
            CmpOp::Gt => "gt",
            CmpOp::Le => "le",
            CmpOp::Ge => "ge",
        }
    }

    pub fn from_keyword(s: &str) -> Option<CmpOp> {
        CmpOp::ALL.into_iter().find(|op| op.keyword() == s)
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot compare {left} value {left_value} with {right} value {right_value}")]
pub struct KindMismatch {
    pub left: ValueKind,
    pub right: ValueKind,
    pub left_value: String,
    pub right_value: String,
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Float(_) => ValueKind::Float,
            Value::Text(_) => ValueKind::Text,
            Value::Dewey(_) => ValueKind::Dewey,
            Value::Tuple(_) => ValueKind::Tuple,
        }
    }

    pub fn as_dewey(&self) -> Option<&DeweyCode> {
        match self {
            Value::Dewey(d) => Some(d),
            _ => None,
        }
    }

    /// Component of a tuple value by name.
    pub fn component(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Tuple(fields) => fields.iter().find(|(n, _)| n == name).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Evaluate `self op other`. Floats compare exactly.
    pub fn compare(&self, op: CmpOp, other: &Value) -> Result<bool, KindMismatch> {
        if self.kind() != other.kind() {
            return Err(KindMismatch {
                left: self.kind(),
                right: other.kind(),
                left_value: self.to_string(),
                right_value: other.to_string(),
            });
        }
        Ok(op.holds(self.cmp(other)))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Dewey(a), Value::Dewey(b)) => a.cmp(b),
            (Value::Tuple(a), Value::Tuple(b)) => a.cmp(b),
            _ => self.kind().cmp(&other.kind()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind().hash(state);
        match self {
            Value::Int(i) => i.hash(state),
            Value::Float(x) => x.to_bits().hash(state),
            Value::Text(s) => s.hash(state),
            Value::Dewey(d) => d.hash(state),
            Value::Tuple(fields) => fields.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Text(s) => f.write_str(s),
            Value::Dewey(d) => write!(f, "{d}"),
            Value::Tuple(fields) => {
                f.write_str("(")?;
                for (i, (_, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<DeweyCode> for Value {
    fn from(d: DeweyCode) -> Self {
        Value::Dewey(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_kinds_are_a_type_error() {
        let err = Value::Int(1).compare(CmpOp::Eq, &Value::text("1")).unwrap_err();
        assert_eq!(err.left, ValueKind::Int);
        assert!(Value::Int(1).compare(CmpOp::Eq, &Value::Float(1.0)).is_err());
    }

    #[test]
    fn complement_negates() {
        let vals = [Value::Int(1), Value::Int(2), Value::Int(3)];
        for op in CmpOp::ALL {
            for a in &vals {
                for b in &vals {
                    let x = a.compare(op, b).unwrap();
                    let y = a.compare(op.complement(), b).unwrap();
                    assert_ne!(x, y);
                    assert_eq!(x, b.compare(op.flip(), a).unwrap());
                }
            }
        }
    }

    #[test]
    fn float_equality_is_exact() {
        assert!(Value::Float(0.1 + 0.2).compare(CmpOp::Ne, &Value::Float(0.3)).unwrap());
    }
}
