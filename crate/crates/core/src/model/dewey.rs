use std::fmt;
use std::str::FromStr;

/// Hierarchical position label of a tree node.
///
/// The root carries the empty code; the `x`-th child (1-based, document
/// order) of a node labelled `s` is labelled `s.x`. Structural relations
/// between nodes reduce to comparisons of these component vectors.
///
/// `Ord` is document order: lexicographic on the component vector, so a node
/// sorts before all of its descendants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DeweyCode(Vec<u32>);

impl DeweyCode {
    pub fn root() -> Self {
        DeweyCode(Vec::new())
    }

    pub fn new(components: Vec<u32>) -> Self {
        DeweyCode(components)
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Label of the `index`-th child (1-based).
    pub fn child(&self, index: u32) -> Self {
        let mut components = self.0.clone();
        components.push(index);
        DeweyCode(components)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            None
        } else {
            Some(DeweyCode(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Component-wise prefix test. Every code is a prefix of itself.
    pub fn is_prefix_of(&self, other: &DeweyCode) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_parent_of(&self, other: &DeweyCode) -> bool {
        self.level() + 1 == other.level() && self.is_prefix_of(other)
    }

    /// Proper ancestry: `self` is a strict prefix of `other`.
    pub fn is_ancestor_of(&self, other: &DeweyCode) -> bool {
        self.level() < other.level() && self.is_prefix_of(other)
    }

    pub fn is_sibling_of(&self, other: &DeweyCode) -> bool {
        !self.is_root() && self != other && self.parent() == other.parent()
    }

    /// `self` lies on the preceding axis of `other`: earlier in document
    /// order and not one of its ancestors.
    pub fn precedes(&self, other: &DeweyCode) -> bool {
        self < other && !self.is_prefix_of(other)
    }

    /// `self` lies on the following axis of `other`: later in document order
    /// and not one of its descendants.
    pub fn follows(&self, other: &DeweyCode) -> bool {
        other.precedes(self)
    }
}

impl fmt::Display for DeweyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid Dewey code {0:?}")]
pub struct ParseDeweyError(pub String);

impl FromStr for DeweyCode {
    type Err = ParseDeweyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(DeweyCode::root());
        }
        s.split('.')
            .map(|part| part.parse::<u32>().map_err(|_| ParseDeweyError(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(DeweyCode)
    }
}
