//! Value normalization, field-level scoring and report rendering.

mod decimal;
mod metrics;
mod normalize;
mod report;

use thiserror::Error;

pub use decimal::Decimal;
pub use metrics::{
    format_percent, latency_stats, nearest_rank, page_reduction, score_run, Counts, DocMeta, GroundTruthEntry,
    Percentiles, RunScore, ScoredItem,
};
pub use normalize::{match_field, month_number, normalize_numeric, normalize_text, normalize_value, NormalizedValue};
pub use report::{
    percent, render_accuracy_table, render_corpus_stats, render_delta_table, render_doc_type_breakdown,
    render_doc_type_table, render_language_breakdown, render_latency_table, render_page_table, render_report,
    render_schema_table, EvalReport, PageStats, RunSummary, REPORT_SCHEMA_VERSION,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("cannot normalize {raw:?}: {reason}")]
    Unparseable { raw: String, reason: String },
    #[error("no ground truth for {}", .0.join(", "))]
    MissingGroundTruth(Vec<String>),
    #[error("ground truth references unknown document {0}")]
    UnknownDocument(String),
    #[error("no latency samples")]
    EmptySample,
}
