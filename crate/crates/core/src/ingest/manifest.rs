use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::IngestError;
use crate::model::{ObjectKind, ValueKind};

/// Parsed schema manifest. Paths are resolved against the manifest's directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaManifest {
    /// `object` lines: asserted kinds, and permission for several sources
    /// to contribute elements to the same object.
    pub objects: BTreeMap<String, ObjectKind>,
    pub sources: Vec<SourceDecl>,
    pub morphisms: Vec<MorphismDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceDecl {
    Csv(CsvDecl),
    Xml(XmlDecl),
    Edges(EdgesDecl),
}

impl SourceDecl {
    pub fn path(&self) -> &Path {
        match self {
            SourceDecl::Csv(d) => &d.path,
            SourceDecl::Xml(d) => &d.path,
            SourceDecl::Edges(d) => &d.path,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDecl {
    pub column: String,
    pub kind: ValueKind,
    /// Attribute object receiving the column values; defaults to the column name.
    pub object: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvDecl {
    pub path: PathBuf,
    pub key: String,
    pub key_kind: ValueKind,
    pub object: String,
    pub columns: Vec<ColumnDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextFieldDecl {
    pub tag: String,
    pub field: String,
    pub object: String,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XmlDecl {
    pub path: PathBuf,
    /// Element tag to entity object.
    pub tags: Vec<(String, String)>,
    pub text: Vec<TextFieldDecl>,
    /// Element tag to the attribute object holding its Dewey code.
    pub dewey: BTreeMap<String, String>,
}

impl XmlDecl {
    pub fn dewey_object(&self, tag: &str) -> String {
        self.dewey.get(tag).cloned().unwrap_or_else(|| "DeweyCode".to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgesDecl {
    pub path: PathBuf,
    pub object: String,
    pub source: String,
    pub target: String,
    pub components: (String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Derivation {
    /// Source element maps to the equal target element.
    Key,
    /// XML node maps to its parent node.
    Parent,
    /// Foreign key: the source's value in this attribute object, looked up
    /// among the target's elements.
    Column(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphismDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub via: Derivation,
}

pub fn parse_kind(s: &str) -> Option<ValueKind> {
    match s {
        "int" => Some(ValueKind::Int),
        "float" => Some(ValueKind::Float),
        "text" => Some(ValueKind::Text),
        "dewey" => Some(ValueKind::Dewey),
        _ => None,
    }
}

struct Line<'a> {
    number: usize,
    words: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, message: impl Into<String>) -> IngestError {
        IngestError::Manifest { line: self.number, message: message.into() }
    }

    /// `key=value` options after the positional words.
    fn options(&self, skip: usize, allowed: &[&str]) -> Result<BTreeMap<&'a str, &'a str>, IngestError> {
        let mut out = BTreeMap::new();
        for w in &self.words[skip..] {
            let (k, v) = w.split_once('=').ok_or_else(|| self.err(format!("expected key=value, found {w:?}")))?;
            if !allowed.contains(&k) {
                return Err(self.err(format!("unknown option {k:?}")));
            }
            if out.insert(k, v).is_some() {
                return Err(self.err(format!("option {k:?} given twice")));
            }
        }
        Ok(out)
    }

    fn required<'m>(&self, opts: &'m BTreeMap<&'a str, &'a str>, key: &str) -> Result<&'a str, IngestError> {
        opts.get(key).copied().ok_or_else(|| self.err(format!("missing option {key}=")))
    }

    fn kind(&self, s: &str) -> Result<ValueKind, IngestError> {
        parse_kind(s).ok_or_else(|| self.err(format!("unknown value kind {s:?}")))
    }
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

impl SchemaManifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self, IngestError> {
        let mut manifest = SchemaManifest::default();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let line = Line { number: i + 1, words: content.split_whitespace().collect() };
            match line.words[0] {
                "object" => manifest.parse_object(&line)?,
                "csv" => manifest.sources.push(SourceDecl::Csv(parse_csv(&line, base)?)),
                "xml" => manifest.sources.push(SourceDecl::Xml(parse_xml(&line, base)?)),
                "edges" => manifest.sources.push(SourceDecl::Edges(parse_edges(&line, base)?)),
                "morphism" => manifest.morphisms.push(parse_morphism(&line, content)?),
                other => return Err(line.err(format!("unknown declaration {other:?}"))),
            }
        }
        Ok(manifest)
    }

    pub fn from_file(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        SchemaManifest::parse(&text, base)
    }

    fn parse_object(&mut self, line: &Line) -> Result<(), IngestError> {
        let name = line.words.get(1).ok_or_else(|| line.err("object needs a name"))?;
        let opts = line.options(2, &["kind"])?;
        let kind = line.required(&opts, "kind")?;
        let kind = ObjectKind::parse(kind).ok_or_else(|| line.err(format!("unknown object kind {kind:?}")))?;
        if self.objects.insert(name.to_string(), kind).is_some() {
            return Err(line.err(format!("object {name} declared twice")));
        }
        Ok(())
    }
}

fn source_path(line: &Line, base: &Path) -> Result<PathBuf, IngestError> {
    let p = line.words.get(1).ok_or_else(|| line.err("missing source path"))?;
    Ok(base.join(p))
}

fn parse_csv(line: &Line, base: &Path) -> Result<CsvDecl, IngestError> {
    let path = source_path(line, base)?;
    let opts = line.options(2, &["key", "object", "columns"])?;
    let object = line.required(&opts, "object")?.to_string();
    let mut columns = Vec::new();
    for spec in list(opts.get("columns").copied().unwrap_or("")) {
        let parts: Vec<&str> = spec.split(':').collect();
        let (column, kind, obj) = match parts.as_slice() {
            [c] => (*c, ValueKind::Text, *c),
            [c, k] => (*c, line.kind(k)?, *c),
            [c, k, o] => (*c, line.kind(k)?, *o),
            _ => return Err(line.err(format!("bad column spec {spec:?}"))),
        };
        columns.push(ColumnDecl { column: column.into(), kind, object: obj.into() });
    }
    let (key, key_kind) = match line.required(&opts, "key")?.split_once(':') {
        Some((k, kind)) => (k.to_string(), line.kind(kind)?),
        None => {
            let k = line.required(&opts, "key")?;
            let kind = columns.iter().find(|c| c.column == k).map_or(ValueKind::Text, |c| c.kind);
            (k.to_string(), kind)
        }
    };
    Ok(CsvDecl { path, key, key_kind, object, columns })
}

fn pairs<'a>(line: &Line, s: &'a str) -> Result<Vec<(&'a str, &'a str)>, IngestError> {
    list(s)
        .map(|p| p.split_once(':').ok_or_else(|| line.err(format!("expected a:b, found {p:?}"))))
        .collect()
}

fn parse_xml(line: &Line, base: &Path) -> Result<XmlDecl, IngestError> {
    let path = source_path(line, base)?;
    let opts = line.options(2, &["tags", "text", "dewey"])?;
    let tags = pairs(line, line.required(&opts, "tags")?)?
        .into_iter()
        .map(|(t, o)| (t.to_string(), o.to_string()))
        .collect();
    let mut text = Vec::new();
    for spec in list(opts.get("text").copied().unwrap_or("")) {
        let parts: Vec<&str> = spec.split(':').collect();
        let (path_part, object, kind) = match parts.as_slice() {
            [p, o] => (*p, *o, ValueKind::Text),
            [p, o, k] => (*p, *o, line.kind(k)?),
            _ => return Err(line.err(format!("bad text spec {spec:?}"))),
        };
        let (tag, field) = path_part
            .split_once('.')
            .ok_or_else(|| line.err(format!("text field must be tag.field, found {path_part:?}")))?;
        text.push(TextFieldDecl { tag: tag.into(), field: field.into(), object: object.into(), kind });
    }
    let dewey = pairs(line, opts.get("dewey").copied().unwrap_or(""))?
        .into_iter()
        .map(|(t, o)| (t.to_string(), o.to_string()))
        .collect();
    Ok(XmlDecl { path, tags, text, dewey })
}

fn parse_edges(line: &Line, base: &Path) -> Result<EdgesDecl, IngestError> {
    let path = source_path(line, base)?;
    let opts = line.options(2, &["object", "source", "target", "components"])?;
    let components = match opts.get("components") {
        None => ("source".to_string(), "target".to_string()),
        Some(c) => match list(c).collect::<Vec<_>>().as_slice() {
            [a, b] if a != b => (a.to_string(), b.to_string()),
            _ => return Err(line.err("components= needs two distinct names")),
        },
    };
    Ok(EdgesDecl {
        path,
        object: line.required(&opts, "object")?.into(),
        source: line.required(&opts, "source")?.into(),
        target: line.required(&opts, "target")?.into(),
        components,
    })
}

fn parse_morphism(line: &Line, content: &str) -> Result<MorphismDecl, IngestError> {
    // morphism <name>: <src> -> <dst> via <derivation>
    let rest = content["morphism".len()..].trim();
    let (name, rest) = rest.split_once(':').ok_or_else(|| line.err("expected `morphism <name>: <src> -> <dst> via <how>`"))?;
    let (src, rest) = rest.split_once("->").ok_or_else(|| line.err("expected `->`"))?;
    let words: Vec<&str> = rest.split_whitespace().collect();
    let (dst, via) = match words.as_slice() {
        [dst, "via", how] => (*dst, *how),
        _ => return Err(line.err("expected `<dst> via <key|parent|AttributeObject>`")),
    };
    let via = match via {
        "key" => Derivation::Key,
        "parent" => Derivation::Parent,
        attr => Derivation::Column(attr.to_string()),
    };
    let (name, src) = (name.trim(), src.trim());
    if name.is_empty() || src.is_empty() || src.contains(char::is_whitespace) {
        return Err(line.err("malformed morphism declaration"));
    }
    Ok(MorphismDecl { name: name.into(), source: src.into(), target: dst.into(), via })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_declaration() {
        let text = "\
# sample
object Customer kind=entity
csv customers.csv key=ID object=Customer columns=ID:int,CName:text,CreditLimit:float
xml orders.xml tags=Order:Order,Item:OrderLine text=Order.CustomerID:CustomerID:int dewey=Item:LineDewey
edges knows.tsv object=Knows source=Source target=Target
morphism OrderLine.Order: OrderLine -> Order via parent   # trailing comment
morphism Order.Customer: Order -> Customer via CustomerID
";
        let m = SchemaManifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.objects["Customer"], ObjectKind::Entity);
        assert_eq!(m.sources.len(), 3);
        let SourceDecl::Csv(csv) = &m.sources[0] else { panic!() };
        assert_eq!(csv.path, PathBuf::from("/data/customers.csv"));
        assert_eq!(csv.key_kind, ValueKind::Int);
        assert_eq!(csv.columns[2].kind, ValueKind::Float);
        let SourceDecl::Xml(xml) = &m.sources[1] else { panic!() };
        assert_eq!(xml.dewey_object("Item"), "LineDewey");
        assert_eq!(xml.dewey_object("Order"), "DeweyCode");
        assert_eq!(xml.text[0].kind, ValueKind::Int);
        let SourceDecl::Edges(e) = &m.sources[2] else { panic!() };
        assert_eq!(e.components, ("source".to_string(), "target".to_string()));
        assert_eq!(m.morphisms[0].via, Derivation::Parent);
        assert_eq!(m.morphisms[1].via, Derivation::Column("CustomerID".into()));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = SchemaManifest::parse("\n\ncsv a.csv object=X", Path::new(".")).unwrap_err();
        assert!(matches!(err, IngestError::Manifest { line: 3, .. }), "{err}");
        let err = SchemaManifest::parse("table t.csv", Path::new(".")).unwrap_err();
        assert!(matches!(err, IngestError::Manifest { line: 1, .. }));
    }
}
