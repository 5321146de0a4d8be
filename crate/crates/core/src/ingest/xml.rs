//! A parser for the XML subset the engine accepts (elements and text, no
//! attributes, namespaces or mixed content) and the loader that turns a
//! document into Dewey-labelled node objects.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use super::{morphism_name, parse_value, IngestError, Part, XmlDecl};
use crate::model::{DeweyCode, Morphism, ObjectKind, SetObject, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct XmlNode {
    pub tag: String,
    pub dewey: DeweyCode,
    /// Text content of a leaf element, trimmed. `None` for elements with
    /// children or with no text at all.
    pub text: Option<String>,
    pub children: Vec<XmlNode>,
}

impl XmlNode {
    /// All nodes in document order.
    pub fn descendants_or_self(&self) -> Vec<&XmlNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum XmlError {
    Malformed { offset: usize, message: String },
    Unsupported(String),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn malformed<T>(&self, message: impl Into<String>) -> Result<T, XmlError> {
        Err(XmlError::Malformed { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn skip_until(&mut self, end: &str, what: &str) -> Result<(), XmlError> {
        match self.rest().find(end) {
            Some(i) => {
                self.pos += i + end.len();
                Ok(())
            }
            None => self.malformed(format!("unterminated {what}")),
        }
    }

    /// Whitespace, comments and (before the root) the XML declaration.
    fn skip_misc(&mut self, allow_decl: bool) -> Result<(), XmlError> {
        loop {
            self.skip_ws();
            if self.rest().starts_with("<!--") {
                self.skip_until("-->", "comment")?;
            } else if allow_decl && self.rest().starts_with("<?xml") {
                self.skip_until("?>", "XML declaration")?;
            } else if self.rest().starts_with("<?") {
                return Err(XmlError::Unsupported("processing instruction".into()));
            } else if self.rest().starts_with("<!DOCTYPE") {
                return Err(XmlError::Unsupported("DOCTYPE".into()));
            } else {
                return Ok(());
            }
        }
    }

    fn name(&mut self) -> Result<&'a str, XmlError> {
        let rest = self.rest();
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '>' || c == '/' || c == '=')
            .unwrap_or(rest.len());
        if len == 0 {
            return self.malformed("expected an element name");
        }
        let name = &rest[..len];
        if name.contains(':') {
            return Err(XmlError::Unsupported(format!("namespace prefix in <{name}>")));
        }
        if !name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            || !name.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return self.malformed(format!("invalid element name {name:?}"));
        }
        self.pos += len;
        Ok(name)
    }

    fn element(&mut self, dewey: DeweyCode) -> Result<XmlNode, XmlError> {
        if !self.eat("<") {
            return self.malformed("expected `<`");
        }
        let tag = self.name()?.to_string();
        self.skip_ws();
        if self.eat("/>") {
            return Ok(XmlNode { tag, dewey, text: None, children: Vec::new() });
        }
        if !self.eat(">") {
            return Err(XmlError::Unsupported(format!("attributes on <{tag}>")));
        }
        let mut children = Vec::new();
        let mut text = String::new();
        loop {
            let rest = self.rest();
            if rest.is_empty() {
                return self.malformed(format!("unclosed <{tag}>"));
            }
            if rest.starts_with("</") {
                self.pos += 2;
                let close = self.name()?;
                if close != tag {
                    return self.malformed(format!("</{close}> does not close <{tag}>"));
                }
                self.skip_ws();
                if !self.eat(">") {
                    return self.malformed("expected `>`");
                }
                break;
            } else if rest.starts_with("<!--") {
                self.skip_until("-->", "comment")?;
            } else if rest.starts_with("<![CDATA[") {
                return Err(XmlError::Unsupported("CDATA section".into()));
            } else if rest.starts_with("<?") {
                return Err(XmlError::Unsupported("processing instruction".into()));
            } else if rest.starts_with('<') {
                let index = children.len() as u32 + 1;
                children.push(self.element(dewey.child(index))?);
            } else {
                let len = rest.find('<').unwrap_or(rest.len());
                let start = self.pos;
                text.push_str(&decode_entities(&rest[..len]).map_err(|m| XmlError::Malformed { offset: start, message: m })?);
                self.pos += len;
            }
        }
        let trimmed = text.trim();
        if !trimmed.is_empty() && !children.is_empty() {
            return Err(XmlError::Unsupported(format!("mixed content in <{tag}>")));
        }
        let text = (!trimmed.is_empty()).then(|| trimmed.to_string());
        Ok(XmlNode { tag, dewey, text, children })
    }
}

fn decode_entities(raw: &str) -> Result<String, String> {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let end = rest[i..].find(';').ok_or("unterminated entity reference")? + i;
        let entity = &rest[i + 1..end];
        let decoded = match entity {
            "lt" => '<',
            "gt" => '>',
            "amp" => '&',
            "quot" => '"',
            "apos" => '\'',
            _ => {
                let code = if let Some(hex) = entity.strip_prefix("#x") {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = entity.strip_prefix('#') {
                    dec.parse().ok()
                } else {
                    None
                };
                code.and_then(char::from_u32).ok_or_else(|| format!("unknown entity &{entity};"))?
            }
        };
        out.push(decoded);
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Parse a document and label every element with its Dewey code: the root
/// gets ε, and the x-th child element of a node labelled s gets s.x.
pub fn parse_document(src: &str) -> Result<XmlNode, XmlError> {
    let mut p = Parser { src, pos: 0 };
    p.eat("\u{feff}");
    p.skip_misc(true)?;
    if p.rest().is_empty() {
        return p.malformed("no root element");
    }
    let root = p.element(DeweyCode::root())?;
    p.skip_misc(false)?;
    if !p.rest().is_empty() {
        return p.malformed("content after the root element");
    }
    Ok(root)
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn to_ingest_error(file: &Path, src: &str, e: XmlError) -> IngestError {
    match e {
        XmlError::Malformed { offset, message } => {
            let (line, column) = line_col(src, offset);
            IngestError::MalformedXml { file: file.to_path_buf(), line, column, message }
        }
        XmlError::Unsupported(name) => IngestError::UnsupportedFeature { file: file.to_path_buf(), name },
    }
}

/// Load a document: per declared tag an entity object of node identities
/// (their Dewey codes), an attribute object of Dewey codes with a morphism
/// from the nodes, and the declared text fields as attribute objects.
pub fn load_xml(decl: &XmlDecl) -> Result<Part, IngestError> {
    let src = std::fs::read_to_string(&decl.path).map_err(|e| IngestError::io(&decl.path, e))?;
    load_xml_str(&src, decl)
}

pub fn load_xml_str(src: &str, decl: &XmlDecl) -> Result<Part, IngestError> {
    let file: PathBuf = decl.path.clone();
    let root = parse_document(src).map_err(|e| to_ingest_error(&file, src, e))?;
    let nodes = root.descendants_or_self();

    let mut part = Part::default();
    let mut dewey_objects: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    for (tag, object) in &decl.tags {
        let ids: BTreeSet<Value> =
            nodes.iter().filter(|n| &n.tag == tag).map(|n| Value::Dewey(n.dewey.clone())).collect();
        let dewey_object = decl.dewey_object(tag);
        dewey_objects.entry(dewey_object.clone()).or_default().extend(ids.iter().cloned());
        part.morphisms.push(Morphism::declared(
            morphism_name(object, &dewey_object),
            object,
            &dewey_object,
            ids.iter().map(|v| (v.clone(), v.clone())),
        ));
        part.objects.push(SetObject::with_elements(object, ObjectKind::Entity, ids));
    }
    for (name, elements) in dewey_objects {
        part.objects.push(SetObject::with_elements(name, ObjectKind::Attribute, elements));
    }

    let mut text_objects: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    for field in &decl.text {
        let object = decl
            .tags
            .iter()
            .find(|(t, _)| *t == field.tag)
            .map(|(_, o)| o.clone())
            .ok_or_else(|| IngestError::Manifest {
                line: 0,
                message: format!("text field {}.{} refers to an undeclared tag", field.tag, field.field),
            })?;
        let mut mapping = BTreeMap::new();
        for node in nodes.iter().filter(|n| n.tag == field.tag) {
            let mut matches = node.children.iter().filter(|c| c.tag == field.field);
            let (first, second) = (matches.next(), matches.next());
            let column = format!("{}.{}", field.tag, field.field);
            let child = match (first, second) {
                (Some(c), None) => c,
                (None, _) => {
                    return Err(IngestError::TotalityViolation {
                        morphism: morphism_name(&object, &field.object),
                        element: format!("<{}> at {} has no <{}>", field.tag, node.dewey, field.field),
                    })
                }
                (Some(_), Some(c)) => {
                    return Err(IngestError::TypeMismatch {
                        file: file.clone(),
                        row: 0,
                        column,
                        value: format!("second <{}> at {}", field.field, c.dewey),
                        kind: field.kind,
                    })
                }
            };
            let raw = child.text.as_deref().ok_or_else(|| IngestError::NullValue {
                file: file.clone(),
                row: 0,
                column: format!("{column} at {}", child.dewey),
            })?;
            let value = parse_value(raw, field.kind).ok_or_else(|| IngestError::TypeMismatch {
                file: file.clone(),
                row: 0,
                column: format!("{column} at {}", child.dewey),
                value: raw.to_string(),
                kind: field.kind,
            })?;
            text_objects.entry(field.object.clone()).or_default().insert(value.clone());
            mapping.insert(Value::Dewey(node.dewey.clone()), value);
        }
        text_objects.entry(field.object.clone()).or_default();
        part.morphisms.push(Morphism::declared(morphism_name(&object, &field.object), &object, &field.object, mapping));
    }
    for (name, elements) in text_objects {
        part.objects.push(SetObject::with_elements(name, ObjectKind::Attribute, elements));
    }
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TextFieldDecl;
    use crate::model::ValueKind;

    fn codes(root: &XmlNode) -> Vec<(String, String)> {
        root.descendants_or_self().iter().map(|n| (n.tag.clone(), n.dewey.to_string())).collect()
    }

    #[test]
    fn children_are_numbered_from_one() {
        let root = parse_document("<Order><Item/><Item/></Order>").unwrap();
        assert_eq!(
            codes(&root),
            [("Order".into(), "ε".into()), ("Item".into(), "1".into()), ("Item".into(), "2".into())]
        );
        let single = parse_document("<?xml version=\"1.0\"?>\n<!-- c --><A>hi &amp; bye</A>").unwrap();
        assert_eq!(single.dewey, DeweyCode::root());
        assert_eq!(single.text.as_deref(), Some("hi & bye"));
    }

    #[test]
    fn nested_labels() {
        let root = parse_document("<a><b><c/><c><d/></c></b><b/></a>").unwrap();
        let got: Vec<String> = codes(&root).into_iter().map(|(_, d)| d).collect();
        assert_eq!(got, ["ε", "1", "1.1", "1.2", "1.2.1", "2"]);
    }

    #[test]
    fn rejects_outside_the_subset() {
        assert!(matches!(parse_document("<a x=\"1\"/>"), Err(XmlError::Unsupported(_))));
        assert!(matches!(parse_document("<ns:a/>"), Err(XmlError::Unsupported(_))));
        assert!(matches!(parse_document("<a>t<b/></a>"), Err(XmlError::Unsupported(_))));
        assert!(matches!(parse_document("<a><![CDATA[x]]></a>"), Err(XmlError::Unsupported(_))));
        assert!(matches!(parse_document("<a><b></a>"), Err(XmlError::Malformed { .. })));
        assert!(matches!(parse_document("<a></a><b/>"), Err(XmlError::Malformed { .. })));
        assert!(matches!(parse_document(""), Err(XmlError::Malformed { .. })));
    }

    #[test]
    fn malformed_positions_are_line_and_column() {
        let src = "<a>\n  <b>\n</a>";
        let err = to_ingest_error(Path::new("x.xml"), src, parse_document(src).unwrap_err());
        assert!(matches!(err, IngestError::MalformedXml { line: 3, .. }), "{err}");
    }

    #[test]
    fn loads_nodes_and_text_fields() {
        let decl = XmlDecl {
            path: "orders.xml".into(),
            tags: vec![("Order".into(), "Order".into())],
            text: vec![TextFieldDecl {
                tag: "Order".into(),
                field: "No".into(),
                object: "OrderNo".into(),
                kind: ValueKind::Int,
            }],
            dewey: BTreeMap::new(),
        };
        let src = "<Orders><Order><No>7</No></Order><Order><No>9</No></Order></Orders>";
        let part = load_xml_str(src, &decl).unwrap();
        let order = part.objects.iter().find(|o| o.name == "Order").unwrap();
        assert_eq!(order.len(), 2);
        let no = part.morphisms.iter().find(|m| m.name == "Order.OrderNo").unwrap();
        assert_eq!(no.apply(&Value::Dewey("2".parse().unwrap())), Some(&Value::Int(9)));
        assert!(part.objects.iter().any(|o| o.name == "DeweyCode" && o.len() == 2));

        let missing = "<Orders><Order><No>7</No></Order><Order/></Orders>";
        assert!(matches!(load_xml_str(missing, &decl), Err(IngestError::TotalityViolation { .. })));
    }
}
