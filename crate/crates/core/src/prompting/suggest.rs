//! Refinement suggestions mined from analyst corrections.
//!
//! Suggestions are exported for a human to approve; nothing here changes a
//! schema by itself.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::docmodel::{ExtractionRecord, FieldSpec, ReviewDecision, ReviewStatus};
use crate::retrieval::tokenize;

/// Corroborating corrections needed before a pattern becomes a suggestion.
pub const SUGGESTION_THRESHOLD: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionKind {
    AddKeyword,
    AddExclusion,
    AddQueryTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementSuggestion {
    pub field_name: String,
    pub kind: SuggestionKind,
    pub payload: String,
    /// Record ids of the corrections supporting the suggestion.
    pub evidence: Vec<String>,
}

const STOPWORDS: &[&str] = &[
    "the", "and", "for", "not", "was", "are", "this", "that", "with", "from", "value", "should", "page", "use", "used",
    "instead", "wrong", "correct", "label", "line", "row", "table", "yang", "dan",
];

fn content_tokens(text: &str) -> BTreeSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().count() >= 3 || t.chars().any(crate::retrieval::is_cjk))
        .filter(|t| !t.chars().all(|c| c.is_ascii_digit()))
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// Mines correction patterns per field.
///
/// * `add_keyword`: at least three corrections of wrongly extracted values
///   share a token (from the analyst note or corrected value) that the
///   field's keywords lack.
/// * `add_query_term`: the same pattern, where the model returned nothing, so
///   retrieval most likely missed the page.
/// * `add_exclusion`: at least three corrections blank out a value that the
///   model extracted with the same remarks text.
///
/// Output is ordered by field, then kind, then payload.
pub fn derive_suggestions(
    decisions: &[ReviewDecision],
    records: &[ExtractionRecord],
    schema: &[FieldSpec],
) -> Vec<RefinementSuggestion> {
    let by_id: HashMap<&str, &ExtractionRecord> = records.iter().map(|r| (r.record_id.as_str(), r)).collect();
    let specs: HashMap<&str, &FieldSpec> = schema.iter().map(|s| (s.name.as_str(), s)).collect();

    // (field, kind, payload) -> evidence
    let mut found: BTreeMap<(String, SuggestionKind, String), BTreeSet<String>> = BTreeMap::new();
    for d in decisions.iter().filter(|d| d.status == ReviewStatus::Corrected) {
        let Some(rec) = by_id.get(d.record_id.as_str()) else {
            continue;
        };
        let Some(spec) = specs.get(rec.field_name.as_str()) else {
            continue;
        };
        let corrected = d.corrected_value.as_deref().unwrap_or("").trim();
        let mut evidence = |kind, payload: String| {
            found
                .entry((rec.field_name.clone(), kind, payload))
                .or_default()
                .insert(rec.record_id.clone());
        };

        if corrected.is_empty() && !rec.raw_value.trim().is_empty() {
            let remarks = rec.remarks.trim();
            if !remarks.is_empty() && !spec.exclusions.iter().any(|e| e.trim() == remarks) {
                evidence(SuggestionKind::AddExclusion, remarks.to_string());
            }
            continue;
        }

        let known: BTreeSet<String> = spec
            .keywords
            .iter()
            .chain(&spec.doc_cues)
            .chain(spec.lang_keywords.values().flatten())
            .flat_map(|k| tokenize(k))
            .collect();
        let context = format!("{} {}", d.analyst_note.as_deref().unwrap_or(""), corrected);
        let kind = if rec.raw_value.trim().is_empty() {
            SuggestionKind::AddQueryTerm
        } else {
            SuggestionKind::AddKeyword
        };
        for tok in content_tokens(&context) {
            if !known.contains(&tok) {
                evidence(kind, tok);
            }
        }
    }

    found
        .into_iter()
        .filter(|(_, ev)| ev.len() >= SUGGESTION_THRESHOLD)
        .map(|((field_name, kind, payload), ev)| RefinementSuggestion {
            field_name,
            kind,
            payload,
            evidence: ev.into_iter().collect(),
        })
        .collect()
}
