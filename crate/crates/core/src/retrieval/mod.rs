//! Hybrid page retrieval: BM25 over OCR text fused with dense similarity.

mod bm25;
mod embed;
mod fusion;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docmodel::{FieldSpec, Language};
use crate::ocr::PageText;

pub use bm25::{
    bm25_scores, build_index_from_texts, build_page_index, build_query, FieldQuery, PageIndex, PageIndexEntry,
};
pub use embed::{cosine, hashing_embed, Embedder};
pub use fusion::{fuse_and_select, min_max, select_all, PageScore, PageScoreSet};
pub use tokenize::{is_cjk, tokenize};

#[derive(Debug, Error, PartialEq)]
pub enum RetrievalError {
    #[error("query for field {0:?} has no terms")]
    EmptyQuery(String),
    #[error("embedding service unavailable: {0}")]
    EmbedServiceUnavailable(String),
    #[error("invalid retrieval config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedTransport {
    Http,
    HashingFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub k1: f64,
    pub b: f64,
    pub alpha: f64,
    pub top_k: usize,
    pub min_fused_score: f64,
    pub embed_dim: usize,
    pub embed_transport: EmbedTransport,
    /// URL for the `http` embedding transport.
    pub embed_endpoint: Option<String>,
    /// Seed of the hashing embedder.
    pub embed_seed: u64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k1: 1.2,
            b: 0.75,
            alpha: 0.5,
            top_k: 8,
            min_fused_score: 0.05,
            embed_dim: 256,
            embed_transport: EmbedTransport::HashingFallback,
            embed_endpoint: None,
            embed_seed: 0,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<(), RetrievalError> {
        let bad = |m: String| Err(RetrievalError::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1".into());
        }
        if !(self.k1 >= 0.0) || !(0.0..=1.0).contains(&self.b) {
            return bad("k1 must be ≥ 0 and b in [0, 1]".into());
        }
        if self.embed_dim == 0 {
            return bad("embed_dim must be positive".into());
        }
        Ok(())
    }
}

/// Page index and page vectors of one document, built once and queried per
/// field.
pub struct DocumentRetriever<'a> {
    index: PageIndex,
    page_vectors: Vec<Vec<f64>>,
    language: Language,
    embedder: &'a Embedder,
    cfg: &'a RetrievalConfig,
}

impl<'a> DocumentRetriever<'a> {
    pub fn new(
        pages: &[PageText],
        language: Language,
        embedder: &'a Embedder,
        cfg: &'a RetrievalConfig,
    ) -> Result<Self, RetrievalError> {
        let texts: Vec<&str> = pages.iter().map(|p| p.full_text.as_str()).collect();
        Ok(DocumentRetriever {
            index: build_page_index(pages),
            page_vectors: embedder.embed_batch(&texts)?,
            language,
            embedder,
            cfg,
        })
    }

    /// Scores every page against the field's query and selects the pages to
    /// send onward.
    pub fn rank(&self, spec: &FieldSpec) -> Result<PageScoreSet, RetrievalError> {
        let query = build_query(spec, self.language)?;
        let lex = bm25_scores(&self.index, &query, self.cfg);
        let qv = self.embedder.embed(&query.raw_text)?;
        let sem: Vec<f64> = self.page_vectors.iter().map(|v| cosine(&qv, v)).collect();
        Ok(fuse_and_select(&lex, &sem, self.cfg))
    }
}
