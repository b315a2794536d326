//! Documents, pages, target fields, extraction records and review decisions.
//!
//! Everything here is an immutable value object once constructed and is
//! `Send + Sync`.

mod manifest;
mod schema;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing::ContentHasher;

pub use manifest::{load_manifest, save_manifest, ManifestError};
pub use schema::{builtin_schema, builtin_schema_named, field_by_name};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown document type `{0}`")]
    UnknownDocType(String),
    #[error("unknown language tag `{0}`")]
    UnknownLanguage(String),
    #[error("unknown run variant `{0}`")]
    UnknownVariant(String),
    #[error("invalid review decision for {record_id}: {reason}")]
    InvalidDecision { record_id: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    FinancialStatement,
    Payslip,
}

impl DocType {
    pub const ALL: [DocType; 2] = [DocType::FinancialStatement, DocType::Payslip];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::FinancialStatement => "financial_statement",
            DocType::Payslip => "payslip",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            DocType::FinancialStatement => "Financial Statement",
            DocType::Payslip => "Payslip",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "financial_statement" => Ok(DocType::FinancialStatement),
            "payslip" => Ok(DocType::Payslip),
            other => Err(ModelError::UnknownDocType(other.to_string())),
        }
    }
}

/// The four corpus languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "en")]
    English,
    #[serde(rename = "id")]
    Indonesian,
    #[serde(rename = "zh-Hans")]
    SimplifiedChinese,
    #[serde(rename = "zh-Hant")]
    TraditionalChinese,
}

impl Language {
    pub const ALL: [Language; 4] = [
        Language::English,
        Language::Indonesian,
        Language::SimplifiedChinese,
        Language::TraditionalChinese,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Indonesian => "id",
            Language::SimplifiedChinese => "zh-Hans",
            Language::TraditionalChinese => "zh-Hant",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Language::English => "English",
            Language::Indonesian => "Bahasa",
            Language::SimplifiedChinese => "Simplified Chinese",
            Language::TraditionalChinese => "Traditional Chinese",
        }
    }

    pub fn is_chinese(self) -> bool {
        matches!(self, Language::SimplifiedChinese | Language::TraditionalChinese)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Language {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Language::ALL
            .into_iter()
            .find(|l| l.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownLanguage(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub index: usize,
    pub image_path: PathBuf,
    pub width_px: u32,
    pub height_px: u32,
}

impl PageRecord {
    /// Plain-text transcript stored next to the image (`page_003.png` ->
    /// `page_003.txt`). Mock engines read it as their ground truth.
    pub fn sidecar_path(&self) -> PathBuf {
        self.image_path.with_extension("txt")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentManifest {
    pub doc_id: String,
    pub doc_type: DocType,
    pub language: Language,
    pub pages: Vec<PageRecord>,
    /// The manifest file this document was loaded from.
    pub source_path: PathBuf,
}

impl DocumentManifest {
    pub fn page_count(&self) -> usize {
        self.pages.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Text,
    Numeric,
}

/// One target field `f_j`: what to look for, where, and how to return it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub value_type: ValueType,
    pub doc_type: DocType,
    /// Domain-specific finance terms.
    pub keywords: Vec<String>,
    /// Phrases naming the document sections that usually hold the field.
    pub doc_cues: Vec<String>,
    pub lang_keywords: BTreeMap<Language, Vec<String>>,
    /// "Do not extract" statements, rendered verbatim into prompts.
    pub exclusions: Vec<String>,
    pub output_key: String,
    pub multi_year: bool,
}

impl FieldSpec {
    /// Lower-cased field name as it reads in a sentence ("net profit").
    pub fn phrase(&self) -> String {
        self.name.to_lowercase()
    }

    pub fn lang_keywords_for(&self, language: Language) -> &[String] {
        self.lang_keywords.get(&language).map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVariant {
    Full,
    NoImgprep,
    NoRetrieval,
    NoPrompt,
    Direct,
}

impl RunVariant {
    /// Table column order: full pipeline, the three module removals, then the
    /// direct baseline.
    pub const ALL: [RunVariant; 5] = [
        RunVariant::Full,
        RunVariant::NoImgprep,
        RunVariant::NoRetrieval,
        RunVariant::NoPrompt,
        RunVariant::Direct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RunVariant::Full => "full",
            RunVariant::NoImgprep => "no_imgprep",
            RunVariant::NoRetrieval => "no_retrieval",
            RunVariant::NoPrompt => "no_prompt",
            RunVariant::Direct => "direct",
        }
    }

    pub fn column_label(self) -> &'static str {
        match self {
            RunVariant::Full => "Full",
            RunVariant::NoImgprep => "-ImgPrep",
            RunVariant::NoRetrieval => "-Retrieval",
            RunVariant::NoPrompt => "-Prompt",
            RunVariant::Direct => "Direct VLM",
        }
    }

    pub fn uses_preprocessing(self) -> bool {
        matches!(self, RunVariant::Full | RunVariant::NoRetrieval | RunVariant::NoPrompt)
    }

    pub fn uses_ocr(self) -> bool {
        self != RunVariant::Direct
    }

    pub fn uses_retrieval(self) -> bool {
        matches!(self, RunVariant::Full | RunVariant::NoImgprep | RunVariant::NoPrompt)
    }

    pub fn uses_structured_prompt(self) -> bool {
        self != RunVariant::NoPrompt
    }
}

impl fmt::Display for RunVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunVariant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        RunVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == norm)
            .ok_or_else(|| ModelError::UnknownVariant(s.to_string()))
    }
}

/// One extracted value, as returned by the model plus its normalized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub record_id: String,
    pub doc_id: String,
    pub field_name: String,
    pub raw_value: String,
    /// Canonical rendering of the normalized value; empty when the model left
    /// the value blank or it could not be normalized.
    pub typed_value: String,
    pub remarks: String,
    /// Reporting year for multi-year fields, when the model returned one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<String>,
    pub source_pages: Vec<usize>,
    pub variant: RunVariant,
    pub ocr_id: String,
    pub model_id: String,
    pub created_at: DateTime<Utc>,
}

/// Stable id for the `element`-th record of a (doc, field, run) triple, so
/// reruns of the same configuration address the same review item.
pub fn record_id(
    doc_id: &str,
    field_name: &str,
    variant: RunVariant,
    ocr_id: &str,
    model_id: &str,
    element: usize,
) -> String {
    let mut h = ContentHasher::new()
        .part(doc_id)
        .part(field_name)
        .part(variant.as_str())
        .part(ocr_id)
        .part(model_id);
    if element > 0 {
        h = h.part(element.to_le_bytes());
    }
    h.short(20)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewStatus {
    Confirmed,
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub record_id: String,
    pub status: ReviewStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyst_note: Option<String>,
    pub decided_at: DateTime<Utc>,
}

impl ReviewDecision {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.status == ReviewStatus::Corrected && self.corrected_value.is_none() {
            return Err(ModelError::InvalidDecision {
                record_id: self.record_id.clone(),
                reason: "a correction must carry corrected_value".into(),
            });
        }
        Ok(())
    }
}
