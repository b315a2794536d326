//! Per-document BM25 index and field queries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::{RetrievalConfig, RetrievalError};
use crate::docmodel::{FieldSpec, Language};
use crate::ocr::PageText;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PageIndexEntry {
    pub term_freq: HashMap<String, u32>,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PageIndex {
    pub pages: Vec<PageIndexEntry>,
    pub doc_freq: HashMap<String, u32>,
    /// Mean page length in tokens (0 for an all-empty document).
    pub avg_len: f64,
}

impl PageIndex {
    pub fn page_count(&self) -> usize {
        self.pages.len()
    }
}

pub fn build_page_index(pages: &[PageText]) -> PageIndex {
    build_index_from_texts(pages.iter().map(|p| p.full_text.as_str()))
}

pub fn build_index_from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> PageIndex {
    let mut index = PageIndex::default();
    for text in texts {
        let mut entry = PageIndexEntry::default();
        for tok in tokenize(text) {
            entry.length += 1;
            *entry.term_freq.entry(tok).or_insert(0) += 1;
        }
        for term in entry.term_freq.keys() {
            *index.doc_freq.entry(term.clone()).or_insert(0) += 1;
        }
        index.pages.push(entry);
    }
    let total: usize = index.pages.iter().map(|p| p.length).sum();
    index.avg_len = if index.pages.is_empty() {
        0.0
    } else {
        total as f64 / index.pages.len() as f64
    };
    index
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldQuery {
    pub field_name: String,
    /// Deduplicated tokens, first occurrence first.
    pub terms: Vec<String>,
    /// The query phrases joined with spaces, for embedding.
    pub raw_text: String,
}

/// Combines the field's finance keywords, document-type cues and the
/// keywords for `language` into one query.
pub fn build_query(spec: &FieldSpec, language: Language) -> Result<FieldQuery, RetrievalError> {
    let phrases: Vec<&str> = spec
        .keywords
        .iter()
        .chain(&spec.doc_cues)
        .chain(spec.lang_keywords_for(language))
        .map(String::as_str)
        .collect();
    let mut terms: Vec<String> = Vec::new();
    for tok in phrases.iter().flat_map(|p| tokenize(p)) {
        if !terms.contains(&tok) {
            terms.push(tok);
        }
    }
    if terms.is_empty() {
        return Err(RetrievalError::EmptyQuery(spec.name.clone()));
    }
    Ok(FieldQuery {
        field_name: spec.name.clone(),
        terms,
        raw_text: phrases.join(" "),
    })
}

/// Okapi BM25 score of every page for the query terms.
pub fn bm25_scores(index: &PageIndex, query: &FieldQuery, cfg: &RetrievalConfig) -> Vec<f64> {
    let n = index.page_count() as f64;
    let avg = if index.avg_len > 0.0 { index.avg_len } else { 1.0 };
    index
        .pages
        .iter()
        .map(|page| {
            let norm = cfg.k1 * (1.0 - cfg.b + cfg.b * page.length as f64 / avg);
            query
                .terms
                .iter()
                .filter_map(|t| {
                    let tf = f64::from(*page.term_freq.get(t)?);
                    let df = f64::from(index.doc_freq[t]);
                    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                    Some(idf * tf * (cfg.k1 + 1.0) / (tf + norm))
                })
                .sum()
        })
        .collect()
}
