//! Field-level scoring, latency percentiles and page reduction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::normalize::{match_field, normalize_value, NormalizedValue};
use super::EvalError;
use crate::docmodel::{field_by_name, DocType, ExtractionRecord, Language, RunVariant, ValueType};

/// One expected value. Multi-year fields carry the year the value belongs
/// to; `pages` lists where the generator planted it, when known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthEntry {
    pub doc_id: String,
    pub field: String,
    /// Canonical normalized value.
    pub expected: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pages: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_type: DocType,
    pub language: Language,
    pub page_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub correct: u64,
    pub total: u64,
}

impl Counts {
    pub fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += u64::from(correct);
    }

    pub fn merge(&mut self, other: Counts) {
        self.correct += other.correct;
        self.total += other.total;
    }

    /// Full-precision ratio; 0 for an empty count.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Percentage with two decimals, e.g. `"87.27"`.
    pub fn percent(&self) -> String {
        format_percent(self.correct, self.total)
    }
}

/// `100 · correct / total` rounded half-up to two decimals, computed in
/// integers so the rendering never depends on float rounding.
pub fn format_percent(correct: u64, total: u64) -> String {
    if total == 0 {
        return "0.00".into();
    }
    let c = u128::from(correct);
    let t = u128::from(total);
    let hundredths = (20_000 * c + t) / (2 * t);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub doc_id: String,
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<String>,
    pub expected: String,
    /// Normalized prediction, or the raw value when it failed to normalize.
    pub predicted: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub variant: RunVariant,
    pub ocr_id: String,
    pub model_id: String,
    pub overall: Counts,
    pub by_doc_type: BTreeMap<DocType, Counts>,
    pub by_language: BTreeMap<Language, Counts>,
    pub by_field: BTreeMap<String, Counts>,
    /// Predicted list elements whose year matched no ground-truth entry.
    pub unpaired_predictions: u64,
    pub items: Vec<ScoredItem>,
}

fn value_type(doc_type: DocType, field: &str) -> ValueType {
    field_by_name(doc_type, field)
        .map(|s| s.value_type)
        .unwrap_or(ValueType::Text)
}

/// Scores one run's records against the ground truth.
///
/// Every ground-truth entry is one item. For multi-year entries the
/// prediction with the same year is compared; a missing prediction counts as
/// wrong. Values are re-normalized from `raw_value`, and values that fail to
/// normalize count as wrong.
pub fn score_run(
    variant: RunVariant,
    ocr_id: &str,
    model_id: &str,
    records: &[ExtractionRecord],
    ground_truth: &[GroundTruthEntry],
    docs: &BTreeMap<String, DocMeta>,
) -> Result<RunScore, EvalError> {
    let mut by_key: HashMap<(&str, &str), Vec<&ExtractionRecord>> = HashMap::new();
    for r in records {
        by_key
            .entry((r.doc_id.as_str(), r.field_name.as_str()))
            .or_default()
            .push(r);
    }
    let gt_keys: std::collections::HashSet<(&str, &str)> = ground_truth
        .iter()
        .map(|g| (g.doc_id.as_str(), g.field.as_str()))
        .collect();
    let mut uncovered: Vec<String> = by_key
        .keys()
        .filter(|k| !gt_keys.contains(*k))
        .map(|(d, f)| format!("({d}, {f})"))
        .collect();
    if !uncovered.is_empty() {
        uncovered.sort();
        return Err(EvalError::MissingGroundTruth(uncovered));
    }

    let mut score = RunScore {
        variant,
        ocr_id: ocr_id.to_string(),
        model_id: model_id.to_string(),
        overall: Counts::default(),
        by_doc_type: BTreeMap::new(),
        by_language: BTreeMap::new(),
        by_field: BTreeMap::new(),
        unpaired_predictions: 0,
        items: Vec::new(),
    };
    let mut paired: std::collections::HashSet<&str> = std::collections::HashSet::new();
    for g in ground_truth {
        let meta = docs
            .get(&g.doc_id)
            .ok_or_else(|| EvalError::UnknownDocument(g.doc_id.clone()))?;
        let vt = value_type(meta.doc_type, &g.field);
        let expected = normalize_value(&g.expected, vt, &g.field, meta.language)
            .unwrap_or(NormalizedValue::Text(g.expected.clone()));
        let candidates = by_key.get(&(g.doc_id.as_str(), g.field.as_str()));
        let pred = candidates.and_then(|recs| match &g.year {
            Some(y) => recs.iter().find(|r| r.year.as_deref() == Some(y.as_str())),
            None => recs.first(),
        });
        let (predicted, correct) = match pred {
            None => (String::new(), false),
            Some(r) => {
                paired.insert(r.record_id.as_str());
                match normalize_value(&r.raw_value, vt, &g.field, meta.language) {
                    Ok(v) => (v.to_string(), match_field(&v, &expected)),
                    Err(_) => (r.raw_value.clone(), false),
                }
            }
        };
        score.overall.add(correct);
        score.by_doc_type.entry(meta.doc_type).or_default().add(correct);
        score.by_language.entry(meta.language).or_default().add(correct);
        score.by_field.entry(g.field.clone()).or_default().add(correct);
        score.items.push(ScoredItem {
            doc_id: g.doc_id.clone(),
            field: g.field.clone(),
            year: g.year.clone(),
            expected: expected.to_string(),
            predicted,
            correct,
        });
    }
    score.unpaired_predictions = records
        .iter()
        .filter(|r| !paired.contains(r.record_id.as_str()) && !r.raw_value.trim().is_empty())
        .count() as u64;
    Ok(score)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
}

/// Nearest-rank percentile: the value at 1-based rank `floor(p·n) + 1`,
/// capped at `n`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (((p * n as f64) + 1e-9).floor() as usize + 1).min(n);
    sorted[rank - 1]
}

pub fn latency_stats(samples: &[f64]) -> Result<Percentiles, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Percentiles {
        p25: nearest_rank(&sorted, 0.25),
        p50: nearest_rank(&sorted, 0.50),
        p75: nearest_rank(&sorted, 0.75),
    })
}

/// Fraction of pages not sent to the model over a set of calls, each given
/// as `(pages_sent, pages_in_document)`.
pub fn page_reduction(calls: &[(usize, usize)]) -> f64 {
    let sent: usize = calls.iter().map(|c| c.0).sum();
    let total: usize = calls.iter().map(|c| c.1).sum();
    if total == 0 {
        0.0
    } else {
        1.0 - sent as f64 / total as f64
    }
}
