//! Analyst review state: saved run records plus the append-only decision log
//! at `run_dir/decisions.jsonl`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::Utc;
use pagewise_core::docmodel::builtin_schema;
use pagewise_core::prompting::{derive_suggestions, RefinementSuggestion};
use pagewise_core::{DocType, ExtractionRecord, ReviewDecision, ReviewStatus, RunVariant};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{append_jsonl, read_jsonl};
use crate::runner::{saved_variants, CallTrace, RunOutput, CALLS_FILE, RECORDS_FILE};
use crate::PipelineError;

pub const DECISIONS_FILE: &str = "decisions.jsonl";

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("unknown record {0}")]
    UnknownRecord(String),
    #[error("record {0} already has a decision")]
    AlreadyDecided(String),
    #[error("invalid decision: {0}")]
    Invalid(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Body of a decision submission.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionInput {
    pub status: ReviewStatus,
    #[serde(default)]
    pub corrected_value: Option<String>,
    #[serde(default)]
    pub analyst_note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusFilter {
    Pending,
    Decided,
    All,
}

/// One run as listed by the service.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunInfo {
    pub run_id: String,
    pub variant: RunVariant,
    pub records: usize,
    pub pending: usize,
}

/// Records of every saved run, indexed by id, and the decisions so far.
pub struct ReviewStore {
    run_dir: PathBuf,
    runs: BTreeMap<String, Vec<ExtractionRecord>>,
    by_id: HashMap<String, (String, usize)>,
    /// Image file per (doc, field, variant, page), from the call traces.
    images: HashMap<(String, String, RunVariant, usize), PathBuf>,
    doc_types: HashMap<String, DocType>,
    decisions: Mutex<Decisions>,
}

#[derive(Default)]
struct Decisions {
    log: Vec<ReviewDecision>,
    by_record: HashMap<String, usize>,
}

impl ReviewStore {
    /// Loads every run saved under `run_dir` and replays the decision log.
    pub fn open(run_dir: &Path) -> Result<ReviewStore, PipelineError> {
        let mut store = ReviewStore {
            run_dir: run_dir.to_path_buf(),
            runs: BTreeMap::new(),
            by_id: HashMap::new(),
            images: HashMap::new(),
            doc_types: HashMap::new(),
            decisions: Mutex::new(Decisions::default()),
        };
        for variant in saved_variants(run_dir) {
            let dir = RunOutput::dir(run_dir, variant);
            let records: Vec<ExtractionRecord> = read_jsonl(&dir.join(RECORDS_FILE))?;
            let calls_path = dir.join(CALLS_FILE);
            if calls_path.exists() {
                for c in read_jsonl::<CallTrace>(&calls_path)? {
                    for (page, img) in c.pages_sent.iter().zip(c.images) {
                        let path = if img.is_absolute() { img } else { run_dir.join(img) };
                        store
                            .images
                            .insert((c.doc_id.clone(), c.field.clone(), variant, *page), path);
                    }
                }
            }
            let run_id = variant.as_str().to_string();
            for (i, r) in records.iter().enumerate() {
                store.by_id.insert(r.record_id.clone(), (run_id.clone(), i));
            }
            store.runs.insert(run_id, records);
        }
        // Records carry no document type; the schemas share only "Year", so
        // any other field name identifies it.
        let payslip: Vec<String> = builtin_schema(DocType::Payslip).into_iter().map(|f| f.name).collect();
        let statement: Vec<String> = builtin_schema(DocType::FinancialStatement)
            .into_iter()
            .map(|f| f.name)
            .collect();
        for r in store.runs.values().flatten() {
            if payslip.contains(&r.field_name) && !statement.contains(&r.field_name) {
                store.doc_types.insert(r.doc_id.clone(), DocType::Payslip);
            } else if statement.contains(&r.field_name) && !payslip.contains(&r.field_name) {
                store.doc_types.insert(r.doc_id.clone(), DocType::FinancialStatement);
            }
        }
        let log_path = store.decisions_path();
        if log_path.exists() {
            let mut d = store.decisions.lock().unwrap_or_else(|p| p.into_inner());
            for decision in read_jsonl::<ReviewDecision>(&log_path)? {
                // A record decided twice in a hand-edited log keeps its first
                // decision.
                if !d.by_record.contains_key(&decision.record_id) {
                    let at = d.log.len();
                    d.by_record.insert(decision.record_id.clone(), at);
                }
                d.log.push(decision);
            }
        }
        Ok(store)
    }

    pub fn decisions_path(&self) -> PathBuf {
        self.run_dir.join(DECISIONS_FILE)
    }

    pub fn runs(&self) -> Vec<RunInfo> {
        let d = self.decisions.lock().unwrap_or_else(|p| p.into_inner());
        self.runs
            .iter()
            .map(|(id, recs)| RunInfo {
                run_id: id.clone(),
                variant: recs
                    .first()
                    .map(|r| r.variant)
                    .unwrap_or_else(|| id.parse().expect("saved variant")),
                records: recs.len(),
                pending: recs.iter().filter(|r| !d.by_record.contains_key(&r.record_id)).count(),
            })
            .collect()
    }

    /// Records of `run_id` with their decision, or `None` for an unknown run.
    pub fn records(
        &self,
        run_id: &str,
        filter: StatusFilter,
    ) -> Option<Vec<(ExtractionRecord, Option<ReviewDecision>)>> {
        let recs = self.runs.get(run_id)?;
        let d = self.decisions.lock().unwrap_or_else(|p| p.into_inner());
        Some(
            recs.iter()
                .map(|r| (r.clone(), d.by_record.get(&r.record_id).map(|&i| d.log[i].clone())))
                .filter(|(_, dec)| match filter {
                    StatusFilter::Pending => dec.is_none(),
                    StatusFilter::Decided => dec.is_some(),
                    StatusFilter::All => true,
                })
                .collect(),
        )
    }

    pub fn record(&self, record_id: &str) -> Option<(ExtractionRecord, Option<ReviewDecision>)> {
        let (run, i) = self.by_id.get(record_id)?;
        let rec = self.runs[run][*i].clone();
        let d = self.decisions.lock().unwrap_or_else(|p| p.into_inner());
        let dec = d.by_record.get(record_id).map(|&i| d.log[i].clone());
        Some((rec, dec))
    }

    /// Image the model saw for `page` of the record's document, if that page
    /// was one of the record's source pages.
    pub fn page_image(&self, record_id: &str, page: usize) -> Option<PathBuf> {
        let (run, i) = self.by_id.get(record_id)?;
        let rec = &self.runs[run][*i];
        if !rec.source_pages.contains(&page) {
            return None;
        }
        self.images
            .get(&(rec.doc_id.clone(), rec.field_name.clone(), rec.variant, page))
            .cloned()
    }

    /// Validates and appends a decision. The lock is held across the append,
    /// so concurrent submissions are serialized and a record cannot be
    /// decided twice.
    pub fn decide(&self, record_id: &str, input: DecisionInput) -> Result<ReviewDecision, ReviewError> {
        if !self.by_id.contains_key(record_id) {
            return Err(ReviewError::UnknownRecord(record_id.to_string()));
        }
        let decision = ReviewDecision {
            record_id: record_id.to_string(),
            status: input.status,
            corrected_value: input.corrected_value,
            analyst_note: input.analyst_note,
            decided_at: Utc::now(),
        };
        decision.validate().map_err(|e| ReviewError::Invalid(e.to_string()))?;
        let mut d = self.decisions.lock().unwrap_or_else(|p| p.into_inner());
        if d.by_record.contains_key(record_id) {
            return Err(ReviewError::AlreadyDecided(record_id.to_string()));
        }
        append_jsonl(&self.decisions_path(), &decision)?;
        let at = d.log.len();
        d.by_record.insert(record_id.to_string(), at);
        d.log.push(decision.clone());
        Ok(decision)
    }

    pub fn decision_log(&self) -> Vec<ReviewDecision> {
        self.decisions.lock().unwrap_or_else(|p| p.into_inner()).log.clone()
    }

    /// Prompt refinements backed by the corrections logged so far.
    pub fn suggestions(&self) -> Vec<RefinementSuggestion> {
        let decisions = self.decision_log();
        let records: Vec<ExtractionRecord> = self.runs.values().flatten().cloned().collect();
        let mut out = Vec::new();
        for doc_type in [DocType::FinancialStatement, DocType::Payslip] {
            let of_type: Vec<ExtractionRecord> = records
                .iter()
                .filter(|r| self.doc_types.get(&r.doc_id) == Some(&doc_type))
                .cloned()
                .collect();
            out.extend(derive_suggestions(&decisions, &of_type, &builtin_schema(doc_type)));
        }
        out
    }
}
