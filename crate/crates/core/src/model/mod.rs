//! The categorical data model: a thin set category whose objects are finite
//! sets of [`Value`]s and whose morphisms are total functions between them.

mod dewey;
mod instance;
mod value;

pub use dewey::{DeweyCode, ParseDeweyError};
pub use instance::{
    compose, InstanceCategory, Morphism, ObjectKind, Provenance, RelComponent, SetObject,
    ThinnessMode, Violation,
};
pub use value::{CmpOp, KindMismatch, Value, ValueKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("no morphism from {from} to {to}")]
    MissingMorphism { from: String, to: String },
    #[error("cannot compose {first} with {second}: {first_end} is not {second_start}")]
    CompositionMismatch { first: String, second: String, first_end: String, second_start: String },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("morphism {morphism} is not total at {element}")]
    TotalityViolation { morphism: String, element: String },
    #[error("object {0} mixes value kinds")]
    MixedKinds(String),
    #[error("malformed relationship object {0}: {1}")]
    BadRelationship(String, String),
    #[error("name {0} declared twice")]
    NameClash(String),
}
