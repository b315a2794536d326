//! Corpus directories: document manifests, ground truth and optional PDF
//! rasterization.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use pagewise_core::docmodel::{load_manifest, save_manifest};
use pagewise_core::evaluate::{DocMeta, GroundTruthEntry};
use pagewise_core::{DocType, DocumentManifest, Language, PageRecord, RasterImage};
use serde::{Deserialize, Serialize};

use crate::PipelineError;

pub const DOCS_DIR: &str = "docs";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";
pub const CORPUS_SPEC_FILE: &str = "corpus.json";

/// Documents of one corpus, ordered by id.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub docs: Vec<DocumentManifest>,
}

/// Sidecar describing a PDF document that still needs rasterizing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdfMeta {
    pub doc_type: DocType,
    pub language: Language,
}

/// Shells out to an external rasterizer for PDF input.
#[derive(Debug, Clone)]
pub struct Rasterizer {
    /// Command template with `{pdf}` and `{out}` placeholders.
    pub command: String,
    /// Page images land in `out_root/<doc_id>/pages/`.
    pub out_root: PathBuf,
}

impl Rasterizer {
    /// Rasterizes `pdf` and writes a manifest over the produced PNG files,
    /// taken in file-name order.
    pub fn rasterize(&self, pdf: &Path, doc_id: &str, meta: &PdfMeta) -> Result<DocumentManifest, PipelineError> {
        let out = self.out_root.join(doc_id).join("pages");
        fs::create_dir_all(&out).map_err(|e| PipelineError::io(&out, e))?;
        let fail = |message: String| PipelineError::Rasterize {
            pdf: pdf.to_path_buf(),
            message,
        };
        let mut parts = self.command.split_whitespace().map(|p| {
            p.replace("{pdf}", &pdf.to_string_lossy())
                .replace("{out}", &out.to_string_lossy())
        });
        let program = parts.next().ok_or_else(|| fail("empty rasterize_cmd".into()))?;
        let status = Command::new(&program)
            .args(parts)
            .status()
            .map_err(|e| fail(format!("{program}: {e}")))?;
        if !status.success() {
            return Err(fail(format!("{program} exited with {status}")));
        }
        let mut pngs: Vec<PathBuf> = fs::read_dir(&out)
            .map_err(|e| PipelineError::io(&out, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        pngs.sort();
        if pngs.is_empty() {
            return Err(fail("no PNG pages produced".into()));
        }
        let mut pages = Vec::with_capacity(pngs.len());
        for (index, path) in pngs.into_iter().enumerate() {
            let img = RasterImage::load_png(&path)?;
            pages.push(PageRecord {
                index,
                image_path: path,
                width_px: img.width() as u32,
                height_px: img.height() as u32,
            });
        }
        let manifest = DocumentManifest {
            doc_id: doc_id.to_string(),
            doc_type: meta.doc_type,
            language: meta.language,
            pages,
            source_path: self.out_root.join(doc_id).join("manifest.json"),
        };
        save_manifest(&manifest, &manifest.source_path)?;
        Ok(manifest)
    }
}

impl Corpus {
    /// Loads `root/docs/<doc_id>/manifest.json` for every document directory.
    pub fn load(root: &Path) -> Result<Corpus, PipelineError> {
        Corpus::load_with(root, None)
    }

    /// Like [`Corpus::load`]; directories holding `source.pdf` and
    /// `meta.json` instead of a manifest are rasterized first.
    pub fn load_with(root: &Path, rasterizer: Option<&Rasterizer>) -> Result<Corpus, PipelineError> {
        let docs_dir = root.join(DOCS_DIR);
        let mut dirs: Vec<PathBuf> = match fs::read_dir(&docs_dir) {
            Ok(rd) => rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(PipelineError::io(&docs_dir, e)),
        };
        dirs.sort();
        let mut docs = Vec::new();
        for dir in dirs {
            let manifest = dir.join("manifest.json");
            let pdf = dir.join("source.pdf");
            if manifest.exists() {
                docs.push(load_manifest(&manifest)?);
            } else if pdf.exists() {
                let Some(r) = rasterizer else {
                    return Err(PipelineError::Config(format!(
                        "{} needs rasterizing but no rasterize_cmd is configured",
                        pdf.display()
                    )));
                };
                let meta_path = dir.join("meta.json");
                let text = fs::read_to_string(&meta_path).map_err(|e| PipelineError::io(&meta_path, e))?;
                let meta: PdfMeta = serde_json::from_str(&text).map_err(|e| PipelineError::Format {
                    path: meta_path.clone(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
                let doc_id = dir.file_name().expect("dir entry").to_string_lossy().to_string();
                docs.push(r.rasterize(&pdf, &doc_id, &meta)?);
            }
        }
        if docs.is_empty() {
            return Err(PipelineError::EmptyCorpus(root.to_path_buf()));
        }
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        Ok(Corpus {
            root: root.to_path_buf(),
            docs,
        })
    }

    pub fn doc_meta(&self) -> BTreeMap<String, DocMeta> {
        self.docs
            .iter()
            .map(|d| {
                (
                    d.doc_id.clone(),
                    DocMeta {
                        doc_type: d.doc_type,
                        language: d.language,
                        page_count: d.page_count(),
                    },
                )
            })
            .collect()
    }

    pub fn ground_truth_path(&self) -> PathBuf {
        self.root.join(GROUND_TRUTH_FILE)
    }

    pub fn ground_truth(&self) -> Result<Vec<GroundTruthEntry>, PipelineError> {
        read_jsonl(&self.ground_truth_path())
    }

    pub fn page_total(&self) -> usize {
        self.docs.iter().map(DocumentManifest::page_count).sum()
    }
}

pub fn write_ground_truth(path: &Path, entries: &[GroundTruthEntry]) -> Result<(), PipelineError> {
    write_jsonl(path, entries)
}

/// Writes one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable record");
        out.push(b'\n');
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| PipelineError::io(path, e))
}

/// Appends one JSON value as a line.
pub fn append_jsonl<T: Serialize>(path: &Path, item: &T) -> Result<(), PipelineError> {
    let mut line = serde_json::to_vec(item).expect("serializable record");
    line.push(b'\n');
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| PipelineError::io(path, e))?;
    f.write_all(&line).map_err(|e| PipelineError::io(path, e))?;
    f.sync_data().map_err(|e| PipelineError::io(path, e))
}

/// Reads line-delimited JSON, skipping blank lines.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| PipelineError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
