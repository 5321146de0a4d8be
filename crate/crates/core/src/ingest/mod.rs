//! Loading CSV relations, XML documents and edge lists into one instance,
//! guided by a schema manifest.
//!
//! Missing values are rejected everywhere: a morphism must be total, so an
//! empty CSV cell or an absent XML text field aborts the load rather than
//! producing a partial function.

mod assemble;
mod csv_source;
mod edges;
mod manifest;
pub mod xml;

use std::path::{Path, PathBuf};

pub use assemble::{assemble, load_manifest, load_sources};
pub use csv_source::{dump_csv, load_csv};
pub use edges::load_edges;
pub use manifest::{
    ColumnDecl, CsvDecl, Derivation, EdgesDecl, MorphismDecl, SchemaManifest, SourceDecl,
    TextFieldDecl, XmlDecl,
};
pub use xml::load_xml;

use crate::model::{DeweyCode, ModelError, Morphism, SetObject, Value, ValueKind, Violation};

/// Objects and morphisms contributed by one source file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Part {
    pub objects: Vec<SetObject>,
    pub morphisms: Vec<Morphism>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{file}: row {row}: duplicate key {key}")]
    DuplicateKey { file: PathBuf, row: usize, key: String },
    #[error("{file}: missing column {name}")]
    MissingColumn { file: PathBuf, name: String },
    #[error("{file}: row {row}, column {column}: cannot read {value:?} as {kind}")]
    TypeMismatch { file: PathBuf, row: usize, column: String, value: String, kind: ValueKind },
    #[error("{file}: row {row}, column {column}: missing value (partial functions are not allowed)")]
    NullValue { file: PathBuf, row: usize, column: String },
    #[error("{file}: {message}")]
    Csv { file: PathBuf, message: String },
    #[error("{file}:{line}:{column}: malformed XML: {message}")]
    MalformedXml { file: PathBuf, line: usize, column: usize, message: String },
    #[error("{file}: unsupported XML feature: {name}")]
    UnsupportedFeature { file: PathBuf, name: String },
    #[error("{file}: row {row}: endpoint {endpoint:?} is not an element of {object}")]
    DanglingEndpoint { file: PathBuf, row: usize, endpoint: String, object: String },
    #[error("instance is not thin: {}", .0.first().map(ToString::to_string).unwrap_or_default())]
    ThinnessViolation(Vec<Violation>),
    #[error("morphism {morphism} is not total at {element}")]
    TotalityViolation { morphism: String, element: String },
    #[error("name {0} is produced by more than one source; declare it with an `object` line to share it")]
    NameClash(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("object {name} is declared as {declared} but loaded as {actual}")]
    KindMismatch { name: String, declared: String, actual: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_path_buf(), source }
    }

    /// True for failures of the data itself (as opposed to unreadable files
    /// or bad manifest syntax).
    pub fn is_data_violation(&self) -> bool {
        !matches!(self, IngestError::Io { .. } | IngestError::Manifest { .. })
    }
}

/// Read one cell as a value of the given kind.
pub fn parse_value(raw: &str, kind: ValueKind) -> Option<Value> {
    match kind {
        ValueKind::Int => raw.trim().parse().ok().map(Value::Int),
        ValueKind::Float => raw.trim().parse().ok().map(Value::Float),
        ValueKind::Text => Some(Value::Text(raw.to_string())),
        ValueKind::Dewey => raw.parse::<DeweyCode>().ok().map(Value::Dewey),
        ValueKind::Tuple => None,
    }
}

/// Name given to the morphism generated for a column, text field or projection.
pub fn morphism_name(source: &str, target: &str) -> String {
    format!("{source}.{target}")
}
