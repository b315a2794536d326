use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{DocType, DocumentManifest, Language, PageRecord};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("manifest schema violation at `{field}`: {message}")]
    SchemaViolation { field: String, message: String },
    #[error("page indices must be 0..{expected_len} without gaps; found {found:?}")]
    NonContiguousPages { expected_len: usize, found: Vec<usize> },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn violation(field: impl Into<String>, message: impl Into<String>) -> ManifestError {
    ManifestError::SchemaViolation {
        field: field.into(),
        message: message.into(),
    }
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, ManifestError> {
    match obj.get(key) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s),
        Some(Value::String(_)) => Err(violation(path, "must not be empty")),
        Some(_) => Err(violation(path, "expected a string")),
        None => Err(violation(path, "missing")),
    }
}

fn uint_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u64, ManifestError> {
    obj.get(key)
        .ok_or_else(|| violation(path, "missing"))?
        .as_u64()
        .ok_or_else(|| violation(path, "expected a non-negative integer"))
}

/// Reads and validates a manifest file. Image paths are resolved relative to
/// the manifest's directory and stat-checked.
pub fn load_manifest(path: &Path) -> Result<DocumentManifest, ManifestError> {
    if !path.exists() {
        return Err(ManifestError::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| violation("$", format!("not valid JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| violation("$", "expected an object"))?;

    let doc_id = str_field(obj, "doc_id", "doc_id")?.to_string();
    let doc_type: DocType = str_field(obj, "doc_type", "doc_type")?
        .parse()
        .map_err(|e: super::ModelError| violation("doc_type", e.to_string()))?;
    let language: Language = str_field(obj, "language", "language")?
        .parse()
        .map_err(|e: super::ModelError| violation("language", e.to_string()))?;

    let raw_pages = obj
        .get("pages")
        .ok_or_else(|| violation("pages", "missing"))?
        .as_array()
        .ok_or_else(|| violation("pages", "expected an array"))?;
    if raw_pages.is_empty() {
        return Err(violation("pages", "a document needs at least one page"));
    }

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut pages = Vec::with_capacity(raw_pages.len());
    for (i, raw) in raw_pages.iter().enumerate() {
        let at = |k: &str| format!("pages[{i}].{k}");
        let p = raw
            .as_object()
            .ok_or_else(|| violation(format!("pages[{i}]"), "expected an object"))?;
        let index = uint_field(p, "index", &at("index"))? as usize;
        let image = str_field(p, "image", &at("image"))?;
        let width = uint_field(p, "width", &at("width"))?;
        let height = uint_field(p, "height", &at("height"))?;
        if width == 0 || width > u64::from(u32::MAX) {
            return Err(violation(at("width"), "must be a positive 32-bit integer"));
        }
        if height == 0 || height > u64::from(u32::MAX) {
            return Err(violation(at("height"), "must be a positive 32-bit integer"));
        }
        let image_path = base.join(image);
        if !image_path.exists() {
            return Err(ManifestError::MissingFile(image_path));
        }
        pages.push(PageRecord {
            index,
            image_path,
            width_px: width as u32,
            height_px: height as u32,
        });
    }

    pages.sort_by_key(|p| p.index);
    if pages.iter().enumerate().any(|(i, p)| p.index != i) {
        return Err(ManifestError::NonContiguousPages {
            expected_len: pages.len(),
            found: pages.iter().map(|p| p.index).collect(),
        });
    }

    Ok(DocumentManifest {
        doc_id,
        doc_type,
        language,
        pages,
        source_path: path.to_path_buf(),
    })
}

/// Writes `manifest` to `path`. Image paths under the target directory are
/// stored relative to it.
pub fn save_manifest(manifest: &DocumentManifest, path: &Path) -> Result<(), ManifestError> {
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let pages: Vec<Value> = manifest
        .pages
        .iter()
        .map(|p| {
            let image = p.image_path.strip_prefix(base).unwrap_or(&p.image_path);
            json!({
                "index": p.index,
                "image": image.to_string_lossy(),
                "width": p.width_px,
                "height": p.height_px,
            })
        })
        .collect();
    let doc = json!({
        "doc_id": manifest.doc_id,
        "doc_type": manifest.doc_type.as_str(),
        "language": manifest.language.tag(),
        "pages": pages,
    });
    let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_doc(dir: &Path, indices: &[usize], touch: bool) -> PathBuf {
        let pages: Vec<Value> = indices
            .iter()
            .map(|i| json!({"index": i, "image": format!("p{i}.png"), "width": 10, "height": 20}))
            .collect();
        if touch {
            for i in indices {
                fs::write(dir.join(format!("p{i}.png")), b"x").unwrap();
            }
        }
        let path = dir.join("manifest.json");
        let doc = json!({"doc_id": "doc-1", "doc_type": "payslip", "language": "id", "pages": pages});
        fs::write(&path, doc.to_string()).unwrap();
        path
    }

    #[test]
    fn loads_contiguous_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_doc(dir.path(), &[0, 1, 2], true);
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.page_count(), 3);
        assert_eq!(m.doc_type, DocType::Payslip);
        assert_eq!(m.language, Language::Indonesian);
        assert_eq!(m.pages[2].image_path, dir.path().join("p2.png"));
    }

    #[test]
    fn rejects_gap_in_page_indices() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_doc(dir.path(), &[0, 2], true);
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::NonContiguousPages { .. })
        ));
    }

    #[test]
    fn reports_missing_image_with_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_doc(dir.path(), &[0], false);
        match load_manifest(&path) {
            Err(ManifestError::MissingFile(p)) => assert_eq!(p, dir.path().join("p0.png")),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn schema_violation_names_field() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p0.png"), b"x").unwrap();
        let path = dir.path().join("m.json");
        let doc = json!({"doc_id": "d", "doc_type": "payslip", "language": "en",
            "pages": [{"index": 0, "image": "p0.png", "width": 0, "height": 4}]});
        fs::write(&path, doc.to_string()).unwrap();
        match load_manifest(&path) {
            Err(ManifestError::SchemaViolation { field, .. }) => {
                assert_eq!(field, "pages[0].width")
            }
            other => panic!("unexpected {other:?}"),
        }
        let doc = json!({"doc_id": "d", "doc_type": "bank_statement", "language": "en", "pages": []});
        fs::write(&path, doc.to_string()).unwrap();
        match load_manifest(&path) {
            Err(ManifestError::SchemaViolation { field, .. }) => assert_eq!(field, "doc_type"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn save_then_load_is_structurally_equal() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_doc(dir.path(), &[1, 0], true);
        let m = load_manifest(&path).unwrap();
        let out = dir.path().join("copy.json");
        save_manifest(&m, &out).unwrap();
        let again = load_manifest(&out).unwrap();
        assert_eq!(m.pages, again.pages);
        assert_eq!(
            (m.doc_id, m.doc_type, m.language),
            (again.doc_id, again.doc_type, again.language)
        );
    }
}
