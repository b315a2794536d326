//! Report structures and their rendered tables.
//!
//! Everything here is deterministic given the scored runs; wall-clock
//! latency is rendered separately so two identical runs produce identical
//! reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{format_percent, Counts, DocMeta, Percentiles, RunScore};
use crate::docmodel::{builtin_schema, DocType, Language, RunVariant, ValueType};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PageStats {
    /// Extraction calls issued (one per document and field).
    pub calls: u64,
    pub pages_sent: u64,
    /// Sum over calls of the document's page count.
    pub pages_total: u64,
}

impl PageStats {
    pub fn record(&mut self, sent: usize, total: usize) {
        self.calls += 1;
        self.pages_sent += sent as u64;
        self.pages_total += total as u64;
    }

    pub fn reduction(&self) -> f64 {
        if self.pages_total == 0 {
            0.0
        } else {
            1.0 - self.pages_sent as f64 / self.pages_total as f64
        }
    }

    pub fn mean_pages_per_call(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.pages_sent as f64 / self.calls as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub variant: RunVariant,
    pub ocr_id: String,
    pub model_id: String,
    pub overall: Counts,
    pub accuracy: f64,
    pub accuracy_pct: String,
    pub by_doc_type: BTreeMap<DocType, Counts>,
    pub by_language: BTreeMap<Language, Counts>,
    pub by_field: BTreeMap<String, Counts>,
    pub unpaired_predictions: u64,
    /// (document, field) calls that ended in an error.
    pub failed_calls: u64,
    pub pages: PageStats,
    pub page_reduction: f64,
    /// Ground-truth pages found among the selected pages, for runs with
    /// retrieval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieval_recall: Option<Counts>,
}

impl RunSummary {
    pub fn new(score: &RunScore, pages: PageStats, failed_calls: u64, retrieval_recall: Option<Counts>) -> Self {
        RunSummary {
            variant: score.variant,
            ocr_id: score.ocr_id.clone(),
            model_id: score.model_id.clone(),
            overall: score.overall,
            accuracy: score.overall.accuracy(),
            accuracy_pct: score.overall.percent(),
            by_doc_type: score.by_doc_type.clone(),
            by_language: score.by_language.clone(),
            by_field: score.by_field.clone(),
            unpaired_predictions: score.unpaired_predictions,
            failed_calls,
            page_reduction: pages.reduction(),
            pages,
            retrieval_recall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub runs: Vec<RunSummary>,
}

impl EvalReport {
    pub fn new(mut runs: Vec<RunSummary>) -> Self {
        runs.sort_by(|a, b| {
            (a.ocr_id.as_str(), a.model_id.as_str(), a.variant).cmp(&(
                b.ocr_id.as_str(),
                b.model_id.as_str(),
                b.variant,
            ))
        });
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            runs,
        }
    }

    pub fn run(&self, variant: RunVariant, ocr_id: &str, model_id: &str) -> Option<&RunSummary> {
        self.runs
            .iter()
            .find(|r| r.variant == variant && r.ocr_id == ocr_id && r.model_id == model_id)
    }

    /// Distinct (OCR, model) pairs in first-seen order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for r in &self.runs {
            let p = (r.ocr_id.clone(), r.model_id.clone());
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Accuracy drop in percentage points when going from the full pipeline
    /// to `variant`.
    pub fn delta_pp(&self, variant: RunVariant, ocr_id: &str, model_id: &str) -> Option<f64> {
        let full = self.run(RunVariant::Full, ocr_id, model_id)?;
        let other = self.run(variant, ocr_id, model_id)?;
        Some(100.0 * (full.accuracy - other.accuracy))
    }
}

fn cell(r: Option<&RunSummary>, f: impl Fn(&RunSummary) -> String) -> String {
    r.map(f).unwrap_or_else(|| "-".into())
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", header.iter().map(|_| "---|").collect::<String>());
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
}

/// Field-level accuracy (%), rows = OCR × VLM, columns = variants.
pub fn render_accuracy_table(report: &EvalReport) -> String {
    let mut header = vec!["OCR", "VLM"];
    header.extend(RunVariant::ALL.iter().map(|v| v.column_label()));
    let rows: Vec<Vec<String>> = report
        .pairs()
        .iter()
        .map(|(ocr, model)| {
            let mut row = vec![ocr.clone(), model.clone()];
            row.extend(
                RunVariant::ALL
                    .iter()
                    .map(|v| cell(report.run(*v, ocr, model), |r| r.accuracy_pct.clone())),
            );
            row
        })
        .collect();
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

/// Absolute accuracy change per removed module, and the lift of the full
/// pipeline over the direct baseline, in percentage points.
pub fn render_delta_table(report: &EvalReport) -> String {
    let header = ["OCR", "VLM", "-ImgPrep", "-Retrieval", "-Prompt", "Full vs Direct VLM"];
    let rows: Vec<Vec<String>> = report
        .pairs()
        .iter()
        .map(|(ocr, model)| {
            let d = |v| {
                report
                    .delta_pp(v, ocr, model)
                    .map(|x| format!("{:+.2}", -x))
                    .unwrap_or_else(|| "-".into())
            };
            let lift = report
                .delta_pp(RunVariant::Direct, ocr, model)
                .map(|x| format!("{x:+.2}"))
                .unwrap_or_else(|| "-".into());
            vec![
                ocr.clone(),
                model.clone(),
                d(RunVariant::NoImgprep),
                d(RunVariant::NoRetrieval),
                d(RunVariant::NoPrompt),
                lift,
            ]
        })
        .collect();
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

/// Accuracy per document type and variant.
pub fn render_doc_type_table(report: &EvalReport) -> String {
    let mut header = vec!["OCR", "VLM", "Doc Type"];
    header.extend(RunVariant::ALL.iter().map(|v| v.column_label()));
    let mut rows = Vec::new();
    for (ocr, model) in report.pairs() {
        for dt in DocType::ALL {
            let mut row = vec![ocr.clone(), model.clone(), dt.display_name().to_string()];
            row.extend(RunVariant::ALL.iter().map(|v| {
                cell(report.run(*v, &ocr, &model), |r| {
                    format!("{}%", r.by_doc_type.get(&dt).copied().unwrap_or_default().percent())
                })
            }));
            rows.push(row);
        }
    }
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

fn count_cells(c: Counts) -> [String; 2] {
    [format!("{}/{}", c.correct, c.total), format!("{}%", c.percent())]
}

/// Full-pipeline accuracy split by document type, with counts.
pub fn render_doc_type_breakdown(report: &EvalReport) -> String {
    let header = [
        "OCR",
        "VLM",
        "Overall Count",
        "Overall %",
        "Financial Stmt. Count",
        "Financial Stmt. %",
        "Payslip Count",
        "Payslip %",
    ];
    let rows: Vec<Vec<String>> = report
        .runs
        .iter()
        .filter(|r| r.variant == RunVariant::Full)
        .map(|r| {
            let mut row = vec![r.ocr_id.clone(), r.model_id.clone()];
            row.extend(count_cells(r.overall));
            for dt in DocType::ALL {
                row.extend(count_cells(r.by_doc_type.get(&dt).copied().unwrap_or_default()));
            }
            row
        })
        .collect();
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

/// Full-pipeline accuracy split into English and non-English documents.
pub fn render_language_breakdown(report: &EvalReport) -> String {
    let header = [
        "OCR",
        "VLM",
        "Overall Count",
        "Overall %",
        "English Count",
        "English %",
        "Non-English Count",
        "Non-English %",
    ];
    let rows: Vec<Vec<String>> = report
        .runs
        .iter()
        .filter(|r| r.variant == RunVariant::Full)
        .map(|r| {
            let english = r.by_language.get(&Language::English).copied().unwrap_or_default();
            let mut other = Counts::default();
            for (l, c) in &r.by_language {
                if *l != Language::English {
                    other.merge(*c);
                }
            }
            let mut row = vec![r.ocr_id.clone(), r.model_id.clone()];
            row.extend(count_cells(r.overall));
            row.extend(count_cells(english));
            row.extend(count_cells(other));
            row
        })
        .collect();
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

/// Pages sent per call and page reduction per run.
pub fn render_page_table(report: &EvalReport) -> String {
    let header = [
        "OCR",
        "VLM",
        "Variant",
        "Calls",
        "Pages sent",
        "Pages in docs",
        "Mean pages/call",
        "Page reduction",
        "Retrieval recall",
    ];
    let rows: Vec<Vec<String>> = report
        .runs
        .iter()
        .map(|r| {
            vec![
                r.ocr_id.clone(),
                r.model_id.clone(),
                r.variant.column_label().to_string(),
                r.pages.calls.to_string(),
                r.pages.pages_sent.to_string(),
                r.pages.pages_total.to_string(),
                format!("{:.2}", r.pages.mean_pages_per_call()),
                format!("{:.2}%", 100.0 * r.page_reduction),
                r.retrieval_recall
                    .map(|c| format!("{}/{} ({}%)", c.correct, c.total, c.percent()))
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

/// Document-level latency percentiles per run, in seconds.
pub fn render_latency_table(rows_in: &[(RunVariant, String, String, Percentiles)]) -> String {
    let header = ["OCR", "VLM", "Variant", "p25 (s)", "p50 (s)", "p75 (s)"];
    let rows: Vec<Vec<String>> = rows_in
        .iter()
        .map(|(v, ocr, model, p)| {
            vec![
                ocr.clone(),
                model.clone(),
                v.column_label().to_string(),
                format!("{:.3}", p.p25),
                format!("{:.3}", p.p50),
                format!("{:.3}", p.p75),
            ]
        })
        .collect();
    let mut out = String::new();
    table(&mut out, &header, &rows);
    out
}

fn whole_percent(part: usize, total: usize) -> String {
    if total == 0 {
        return "0%".into();
    }
    format!("{}%", (200 * part + total) / (2 * total))
}

/// Language × document-type counts, and page-count distribution per
/// document type.
pub fn render_corpus_stats(docs: &BTreeMap<String, DocMeta>) -> String {
    let mut out = String::new();
    let count = |l: Option<Language>, d: Option<DocType>| {
        docs.values()
            .filter(|m| l.is_none_or(|l| m.language == l) && d.is_none_or(|d| m.doc_type == d))
            .count()
    };
    let fs_total = count(None, Some(DocType::FinancialStatement));
    let ps_total = count(None, Some(DocType::Payslip));
    let all = docs.len();
    let mut rows = Vec::new();
    for l in Language::ALL {
        let fs = count(Some(l), Some(DocType::FinancialStatement));
        let ps = count(Some(l), Some(DocType::Payslip));
        rows.push(vec![
            l.display_name().to_string(),
            format!("{fs} ({})", whole_percent(fs, fs_total)),
            format!("{ps} ({})", whole_percent(ps, ps_total)),
            format!("{} ({})", fs + ps, whole_percent(fs + ps, all)),
        ]);
    }
    rows.push(vec![
        "Total".into(),
        fs_total.to_string(),
        ps_total.to_string(),
        all.to_string(),
    ]);
    table(
        &mut out,
        &["Language", "Financial Statement", "Payslip", "Combined"],
        &rows,
    );
    out.push('\n');

    let mut rows = Vec::new();
    let groups: [(&str, Option<DocType>); 3] = [
        ("Overall", None),
        ("Financial Statement", Some(DocType::FinancialStatement)),
        ("Payslip", Some(DocType::Payslip)),
    ];
    for (name, dt) in groups {
        let mut pages: Vec<f64> = docs
            .values()
            .filter(|m| dt.is_none_or(|d| m.doc_type == d))
            .map(|m| m.page_count as f64)
            .collect();
        if pages.is_empty() {
            continue;
        }
        pages.sort_by(f64::total_cmp);
        let q = |p| super::metrics::nearest_rank(&pages, p);
        rows.push(vec![
            name.to_string(),
            pages.len().to_string(),
            format!("{}", pages[0]),
            format!("{}", q(0.25)),
            format!("{}", q(0.5)),
            format!("{}", q(0.75)),
            format!("{}", pages[pages.len() - 1]),
        ]);
    }
    table(
        &mut out,
        &["Group", "Documents", "Min pages", "Q1", "Median", "Q3", "Max pages"],
        &rows,
    );
    out
}

/// The built-in target field schema.
pub fn render_schema_table() -> String {
    let mut rows = Vec::new();
    for dt in DocType::ALL {
        for f in builtin_schema(dt) {
            let kind = match f.value_type {
                ValueType::Text => "Text",
                ValueType::Numeric => "Numeric",
            };
            rows.push(vec![dt.display_name().to_string(), f.name.clone(), kind.to_string()]);
        }
    }
    let mut out = String::new();
    table(&mut out, &["Document Type", "Field", "Field Type"], &rows);
    out
}

/// All deterministic sections as one Markdown document.
pub fn render_report(report: &EvalReport, docs: &BTreeMap<String, DocMeta>) -> String {
    let mut out = String::new();
    let sections: [(&str, String); 7] = [
        ("Field-level accuracy (%)", render_accuracy_table(report)),
        ("Accuracy change per removed module (pp)", render_delta_table(report)),
        ("Accuracy by document type and variant", render_doc_type_table(report)),
        (
            "Full pipeline accuracy by document type",
            render_doc_type_breakdown(report),
        ),
        ("Full pipeline accuracy by language", render_language_breakdown(report)),
        ("Pages sent to the model", render_page_table(report)),
        ("Corpus", render_corpus_stats(docs)),
    ];
    for (title, body) in sections {
        let _ = writeln!(out, "## {title}\n\n{body}");
    }
    let _ = writeln!(out, "## Target fields\n\n{}", render_schema_table());
    out
}

/// Percentage string for a ratio given as counts.
pub fn percent(correct: u64, total: u64) -> String {
    format_percent(correct, total)
}
