//! Content-addressed stage artifacts under `run_dir/<doc_id>/<stage>/`.
//!
//! An artifact's file name is the hash of everything that determines it
//! (input bytes and stage configuration), so a stage re-executes exactly when
//! one of those changes, and variants that share a stage share its output.

use std::fs;
use std::path::{Path, PathBuf};

use pagewise_core::hashing::ContentHasher;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

/// Hit and miss counts per cached stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheCounts {
    pub preprocess_hits: u64,
    pub preprocess_misses: u64,
    pub ocr_hits: u64,
    pub ocr_misses: u64,
}

impl CacheCounts {
    pub fn merge(&mut self, o: CacheCounts) {
        self.preprocess_hits += o.preprocess_hits;
        self.preprocess_misses += o.preprocess_misses;
        self.ocr_hits += o.ocr_hits;
        self.ocr_misses += o.ocr_misses;
    }

    fn count(&mut self, stage: Stage, hit: bool) {
        let slot = match (stage, hit) {
            (Stage::Preprocess, true) => &mut self.preprocess_hits,
            (Stage::Preprocess, false) => &mut self.preprocess_misses,
            (Stage::Ocr, true) => &mut self.ocr_hits,
            (Stage::Ocr, false) => &mut self.ocr_misses,
        };
        *slot += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Preprocess,
    Ocr,
}

impl Stage {
    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Ocr => "ocr",
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Stage::Preprocess => "png",
            Stage::Ocr => "json",
        }
    }
}

/// Artifact store for one document.
pub struct DocCache {
    dir: PathBuf,
    doc_id: String,
    pub counts: CacheCounts,
}

/// Cache key over named parts. Bump `version` when a stage's output format
/// changes.
pub fn stage_key(stage: Stage, version: u32, parts: &[&[u8]]) -> String {
    let mut h = ContentHasher::new().part(stage.dir_name()).part(version.to_le_bytes());
    for p in parts {
        h = h.part(p);
    }
    h.short(32)
}

impl DocCache {
    pub fn new(run_dir: &Path, doc_id: &str) -> DocCache {
        DocCache {
            dir: run_dir.join(doc_id),
            doc_id: doc_id.to_string(),
            counts: CacheCounts::default(),
        }
    }

    pub fn path(&self, stage: Stage, key: &str) -> PathBuf {
        self.dir
            .join(stage.dir_name())
            .join(format!("{key}.{}", stage.extension()))
    }

    /// Returns the artifact for `key`, producing it with `produce` when it is
    /// not on disk yet. `produce` returns the bytes to store; they are written
    /// to a temporary file and renamed into place, so readers never observe a
    /// partial artifact.
    pub fn get_or_create(
        &mut self,
        stage: Stage,
        key: &str,
        produce: impl FnOnce() -> Result<Vec<u8>, PipelineError>,
    ) -> Result<(PathBuf, bool), PipelineError> {
        let path = self.path(stage, key);
        if path.exists() {
            tracing::debug!(doc = %self.doc_id, stage = stage.dir_name(), key, "cache hit");
            self.counts.count(stage, true);
            return Ok((path, true));
        }
        let bytes = produce()?;
        let parent = path.parent().expect("artifact has a parent");
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        let tmp = parent.join(format!(".{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, bytes).map_err(|e| PipelineError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| PipelineError::io(&path, e))?;
        tracing::debug!(doc = %self.doc_id, stage = stage.dir_name(), key, "cache miss");
        self.counts.count(stage, false);
        Ok((path, false))
    }
}
