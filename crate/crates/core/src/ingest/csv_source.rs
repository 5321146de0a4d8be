use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::{morphism_name, parse_value, CsvDecl, IngestError, Part};
use crate::model::{InstanceCategory, Morphism, ObjectKind, SetObject, Value};

/// Load one CSV relation: an entity object of row keys, one attribute object
/// per declared column, and a morphism from the entity to each attribute.
pub fn load_csv(decl: &CsvDecl) -> Result<Part, IngestError> {
    let file = decl.path.clone();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&decl.path)
        .map_err(|e| csv_error(&decl.path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(&decl.path, e))?.clone();
    let index_of = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn { file: file.clone(), name: name.to_string() })
    };
    let key_index = index_of(&decl.key)?;
    let column_indices = decl.columns.iter().map(|c| index_of(&c.column)).collect::<Result<Vec<_>, _>>()?;

    let mut keys = BTreeSet::new();
    let mut attributes: Vec<BTreeSet<Value>> = vec![BTreeSet::new(); decl.columns.len()];
    let mut mappings: Vec<BTreeMap<Value, Value>> = vec![BTreeMap::new(); decl.columns.len()];
    for (i, record) in reader.records().enumerate() {
        // row 1 is the header
        let row = i + 2;
        let record = record.map_err(|e| csv_error(&decl.path, e))?;
        let cell = |idx: usize, column: &str, kind| {
            let raw = record.get(idx).unwrap_or("");
            if raw.is_empty() || raw.eq_ignore_ascii_case("null") {
                return Err(IngestError::NullValue { file: file.clone(), row, column: column.to_string() });
            }
            parse_value(raw, kind).ok_or_else(|| IngestError::TypeMismatch {
                file: file.clone(),
                row,
                column: column.to_string(),
                value: raw.to_string(),
                kind,
            })
        };
        let key = cell(key_index, &decl.key, decl.key_kind)?;
        if !keys.insert(key.clone()) {
            return Err(IngestError::DuplicateKey { file: file.clone(), row, key: key.to_string() });
        }
        for (c, (col, &idx)) in decl.columns.iter().zip(&column_indices).enumerate() {
            let v = cell(idx, &col.column, col.kind)?;
            attributes[c].insert(v.clone());
            mappings[c].insert(key.clone(), v);
        }
    }

    let mut part = Part::default();
    part.objects.push(SetObject::with_elements(&decl.object, ObjectKind::Entity, keys));
    for ((col, elements), mapping) in decl.columns.iter().zip(attributes).zip(mappings) {
        part.objects.push(SetObject::with_elements(&col.object, ObjectKind::Attribute, elements));
        part.morphisms.push(Morphism::declared(
            morphism_name(&decl.object, &col.object),
            &decl.object,
            &col.object,
            mapping,
        ));
    }
    Ok(part)
}

fn csv_error(path: &std::path::Path, e: csv::Error) -> IngestError {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => IngestError::io(path, io),
            _ => unreachable!(),
        },
        _ => IngestError::Csv { file: path.to_path_buf(), message: e.to_string() },
    }
}

/// Write an entity object as CSV: a key column named after the object,
/// followed by one column per outgoing morphism into an attribute object.
/// Returns the `csv` manifest line that loads the file back.
pub fn dump_csv(inst: &InstanceCategory, object: &str, out: impl Write, file_name: &str) -> Result<String, IngestError> {
    let entity = inst.object(object).ok_or_else(|| IngestError::UnknownObject(object.to_string()))?;
    let columns: Vec<&Morphism> = inst
        .morphisms()
        .filter(|m| {
            m.source == object && inst.object(&m.target).is_some_and(|t| t.kind == ObjectKind::Attribute)
        })
        .collect();
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![object.to_string()];
    header.extend(columns.iter().map(|m| m.target.clone()));
    let io_err = |e: csv::Error| IngestError::Csv { file: file_name.into(), message: e.to_string() };
    writer.write_record(&header).map_err(io_err)?;
    for key in &entity.elements {
        let mut row = vec![key.to_string()];
        for m in &columns {
            row.push(m.apply(key).map(ToString::to_string).unwrap_or_default());
        }
        writer.write_record(&row).map_err(io_err)?;
    }
    writer.flush().map_err(|e| IngestError::io(file_name.as_ref(), e))?;

    let kind_of = |o: &SetObject| o.value_kind().map_or("text".to_string(), |k| k.to_string());
    let cols: Vec<String> = columns
        .iter()
        .map(|m| format!("{}:{}", m.target, kind_of(inst.object(&m.target).expect("target exists"))))
        .collect();
    Ok(format!(
        "csv {file_name} key={object}:{} object={object} columns={}",
        kind_of(entity),
        cols.join(",")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ColumnDecl;
    use crate::model::ValueKind;
    use std::path::PathBuf;

    fn write_tmp(name: &str, contents: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("catql-csv-{}-{name}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn decl(path: PathBuf) -> CsvDecl {
        CsvDecl {
            path,
            key: "ID".into(),
            key_kind: ValueKind::Int,
            object: "Customer".into(),
            columns: vec![
                ColumnDecl { column: "ID".into(), kind: ValueKind::Int, object: "ID".into() },
                ColumnDecl { column: "CName".into(), kind: ValueKind::Text, object: "CName".into() },
                ColumnDecl { column: "CreditLimit".into(), kind: ValueKind::Int, object: "CreditLimit".into() },
            ],
        }
    }

    #[test]
    fn customer_table_becomes_objects_and_morphisms() {
        let p = write_tmp("c.csv", "ID,CName,CreditLimit\n1,Mary,5000\n2,John,3000\n3,William,2000\n");
        let part = load_csv(&decl(p)).unwrap();
        let names: Vec<_> = part.objects.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["Customer", "ID", "CName", "CreditLimit"]);
        let cname = part.morphisms.iter().find(|m| m.name == "Customer.CName").unwrap();
        assert_eq!(cname.apply(&Value::Int(2)), Some(&Value::text("John")));
        assert_eq!(part.objects[0].len(), 3);
    }

    #[test]
    fn header_only_gives_empty_total_morphisms() {
        let p = write_tmp("e.csv", "ID,CName,CreditLimit\n");
        let part = load_csv(&decl(p)).unwrap();
        assert!(part.objects.iter().all(SetObject::is_empty));
        assert!(part.morphisms.iter().all(|m| m.mapping.is_empty()));
    }

    #[test]
    fn row_errors() {
        let p = write_tmp("d.csv", "ID,CName,CreditLimit\n1,Mary,5000\n1,John,3000\n");
        assert!(matches!(load_csv(&decl(p)), Err(IngestError::DuplicateKey { row: 3, .. })));
        let p = write_tmp("n.csv", "ID,CName,CreditLimit\n1,,5000\n");
        assert!(matches!(load_csv(&decl(p)), Err(IngestError::NullValue { row: 2, .. })));
        let p = write_tmp("t.csv", "ID,CName,CreditLimit\n1,Mary,lots\n");
        assert!(matches!(load_csv(&decl(p)), Err(IngestError::TypeMismatch { row: 2, .. })));
        let p = write_tmp("m.csv", "ID,CName\n1,Mary\n");
        assert!(matches!(load_csv(&decl(p)), Err(IngestError::MissingColumn { .. })));
    }
}
