//! Per-document orchestration, corpus runs and the ablation.
//!
//! Stage outputs live under `run_dir/<doc_id>/`:
//!
//! * `preprocess/<key>.png` and `ocr/<key>.json`: content-addressed, shared
//!   by every variant that needs them.
//! * `<variant>/<field>.prompt.txt`, `.response.txt` and `.retrieval.json`:
//!   what each extraction call saw and returned.
//!
//! Run-level outputs go to `run_dir/runs/<variant>/` (`records.jsonl`,
//! `calls.jsonl`, and `docs.jsonl` with wall times), and the ablation writes
//! `report.json`, `report.md` and `latency.md` into `run_dir`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use chrono::Utc;
use pagewise_core::docmodel::{builtin_schema, record_id};
use pagewise_core::evaluate::{
    latency_stats, normalize_value, render_latency_table, render_report, score_run, Counts, DocMeta, EvalReport,
    GroundTruthEntry, PageStats, Percentiles, RunSummary,
};
use pagewise_core::extract::{parse_structured_output, VlmClient, VlmImage};
use pagewise_core::ocr::{OcrEngine, OcrRequest, PageText};
use pagewise_core::preprocess::preprocess_page;
use pagewise_core::prompting::{build_prompt, PromptVariant};
use pagewise_core::retrieval::{DocumentRetriever, Embedder, PageScoreSet};
use pagewise_core::{DocumentManifest, ExtractionRecord, FieldSpec, RasterImage, RunVariant};
use serde::{Deserialize, Serialize};

use crate::cache::{stage_key, CacheCounts, DocCache, Stage};
use crate::config::RunConfig;
use crate::corpus::{read_jsonl, write_jsonl, Corpus};
use crate::PipelineError;

pub const RUNS_DIR: &str = "runs";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const CALLS_FILE: &str = "calls.jsonl";
pub const DOC_STATS_FILE: &str = "docs.jsonl";

const PREPROCESS_VERSION: u32 = 1;
const OCR_VERSION: u32 = 1;

/// One extraction call: which pages were considered and which were sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallTrace {
    pub doc_id: String,
    pub field: String,
    pub pages_total: usize,
    /// Pages offered to the model, best first, before truncation.
    pub candidates: Vec<usize>,
    pub pages_sent: Vec<usize>,
    /// Image files of `pages_sent`, relative to the run directory when they
    /// live inside it.
    pub images: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-document bookkeeping that is not part of the deterministic output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocStats {
    pub doc_id: String,
    pub wall_ms: u64,
    pub cache: CacheCounts,
    pub ocr_failures: usize,
    pub failed_calls: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DocResult {
    pub records: Vec<ExtractionRecord>,
    pub calls: Vec<CallTrace>,
    pub stats: DocStats,
}

/// Page images and transcripts of one document after the input stages.
#[derive(Debug, Clone)]
pub struct PreparedDoc {
    /// The image each page is shown to the model as.
    pub images: Vec<PathBuf>,
    /// OCR text per page; `None` when the variant skips OCR.
    pub texts: Option<Vec<PageText>>,
    pub cache: CacheCounts,
    pub ocr_failures: usize,
}

/// Engines and configuration shared by every document of a run.
pub struct Pipeline {
    cfg: RunConfig,
    ocr: OcrEngine,
    vlm: VlmClient,
    embedder: Embedder,
}

impl Pipeline {
    pub fn new(cfg: &RunConfig) -> Result<Pipeline, PipelineError> {
        cfg.validate()?;
        Ok(Pipeline {
            ocr: OcrEngine::new(cfg.ocr.clone())?,
            vlm: VlmClient::new(cfg.vlm.clone())?,
            embedder: Embedder::from_config(&cfg.retrieval)?,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn variant(&self) -> RunVariant {
        self.cfg.variant
    }

    /// Preprocessing and OCR, as far as the variant uses them. Artifacts are
    /// reused when their inputs and stage config are unchanged.
    pub fn prepare(&self, doc: &DocumentManifest) -> Result<PreparedDoc, PipelineError> {
        self.prepare_stages(doc, true)
    }

    /// Like [`Pipeline::prepare`]; with `ocr` false the OCR stage is skipped
    /// even when the variant uses it.
    pub fn prepare_stages(&self, doc: &DocumentManifest, ocr: bool) -> Result<PreparedDoc, PipelineError> {
        let variant = self.cfg.variant;
        let mut cache = DocCache::new(&self.cfg.run_dir, &doc.doc_id);
        let pre_cfg = serde_json::to_vec(&self.cfg.preprocess).expect("config serializes");
        let ocr_cfg = serde_json::to_vec(&self.cfg.ocr).expect("config serializes");
        let mut images = Vec::with_capacity(doc.page_count());
        let mut texts = (ocr && variant.uses_ocr()).then(|| Vec::with_capacity(doc.page_count()));
        let mut ocr_failures = 0;

        for page in &doc.pages {
            let needs_bytes = variant.uses_preprocessing() || texts.is_some();
            let raw = if needs_bytes {
                fs::read(&page.image_path).map_err(|e| PipelineError::io(&page.image_path, e))?
            } else {
                Vec::new()
            };
            // Identity of the image OCR sees: the preprocess key already
            // covers the raw bytes and the config.
            let (image, image_id) = if variant.uses_preprocessing() {
                let key = stage_key(Stage::Preprocess, PREPROCESS_VERSION, &[&raw, &pre_cfg]);
                let (path, _) = cache.get_or_create(Stage::Preprocess, &key, || {
                    let img = RasterImage::decode(&raw)?;
                    Ok(preprocess_page(&img, &self.cfg.preprocess).encode_png()?)
                })?;
                (path, key.into_bytes())
            } else {
                (page.image_path.clone(), raw)
            };

            if let Some(texts) = texts.as_mut() {
                let sidecar = page.sidecar_path();
                let sidecar_bytes = fs::read(&sidecar).unwrap_or_default();
                let index_bytes = (page.index as u64).to_le_bytes();
                let key = stage_key(
                    Stage::Ocr,
                    OCR_VERSION,
                    &[&image_id, &sidecar_bytes, &ocr_cfg, &index_bytes],
                );
                let attempt = cache.get_or_create(Stage::Ocr, &key, || {
                    let text = self.ocr.transcribe_page(&OcrRequest {
                        page_index: page.index,
                        image_path: &image,
                        sidecar_path: Some(&sidecar),
                    })?;
                    Ok(serde_json::to_vec(&text).expect("page text serializes"))
                });
                let text = match attempt {
                    Ok((path, _)) => {
                        let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
                        serde_json::from_slice(&bytes).map_err(|e| PipelineError::Format {
                            path: path.clone(),
                            line: e.line(),
                            message: e.to_string(),
                        })?
                    }
                    Err(PipelineError::Ocr(e)) => {
                        tracing::warn!(doc = %doc.doc_id, page = page.index, error = %e, "OCR failed; page kept without text");
                        ocr_failures += 1;
                        PageText::from_lines(page.index, &self.cfg.ocr.engine_id, Vec::new())
                    }
                    Err(e) => return Err(e),
                };
                texts.push(text);
            }
            images.push(image);
        }
        Ok(PreparedDoc {
            images,
            texts,
            cache: cache.counts,
            ocr_failures,
        })
    }

    /// Candidate pages for one field, best first. Without retrieval every
    /// page is a candidate in page order, so the per-call image limit keeps
    /// the lowest indices.
    pub fn candidates(
        &self,
        retriever: Option<&DocumentRetriever<'_>>,
        spec: &FieldSpec,
        page_count: usize,
    ) -> Result<(Vec<usize>, Option<PageScoreSet>), PipelineError> {
        match retriever {
            Some(r) => {
                let set = r.rank(spec)?;
                Ok((set.selected.clone(), Some(set)))
            }
            None => Ok(((0..page_count).collect(), None)),
        }
    }

    pub fn retriever<'a>(
        &'a self,
        doc: &DocumentManifest,
        prepared: &PreparedDoc,
    ) -> Result<Option<DocumentRetriever<'a>>, PipelineError> {
        if !self.cfg.variant.uses_retrieval() {
            return Ok(None);
        }
        let texts = prepared.texts.as_deref().unwrap_or(&[]);
        Ok(Some(DocumentRetriever::new(
            texts,
            doc.language,
            &self.embedder,
            &self.cfg.retrieval,
        )?))
    }

    /// Runs every schema field of `doc` through the configured variant.
    /// Failures of single calls, or of the whole document, become empty
    /// records whose remarks carry the error.
    pub fn run_document(&self, doc: &DocumentManifest) -> DocResult {
        let start = Instant::now();
        let schema = builtin_schema(doc.doc_type);
        let mut result = DocResult {
            records: Vec::new(),
            calls: Vec::new(),
            stats: DocStats {
                doc_id: doc.doc_id.clone(),
                wall_ms: 0,
                cache: CacheCounts::default(),
                ocr_failures: 0,
                failed_calls: 0,
                error: None,
            },
        };
        let created_at = Utc::now();
        let outcome = self.prepare(doc).and_then(|prepared| {
            let retriever = self.retriever(doc, &prepared)?;
            Ok((prepared, retriever))
        });
        match outcome {
            Ok((prepared, retriever)) => {
                result.stats.cache = prepared.cache;
                result.stats.ocr_failures = prepared.ocr_failures;
                for spec in &schema {
                    let call = self.extract_field(doc, spec, &prepared, retriever.as_ref());
                    let (records, trace) = self.finish_call(doc, spec, call, created_at);
                    if trace.error.is_some() {
                        result.stats.failed_calls += 1;
                    }
                    result.records.extend(records);
                    result.calls.push(trace);
                }
            }
            Err(e) => {
                tracing::error!(doc = %doc.doc_id, error = %e, "document failed before extraction");
                result.stats.error = Some(e.to_string());
                for spec in &schema {
                    let failed = Err(FieldFailure {
                        message: e.to_string(),
                        candidates: Vec::new(),
                    });
                    let (records, trace) = self.finish_call(doc, spec, failed, created_at);
                    result.stats.failed_calls += 1;
                    result.records.extend(records);
                    result.calls.push(trace);
                }
            }
        }
        result.stats.wall_ms = start.elapsed().as_millis() as u64;
        tracing::info!(
            doc = %doc.doc_id,
            variant = %self.cfg.variant,
            wall_ms = result.stats.wall_ms,
            preprocess_hits = result.stats.cache.preprocess_hits,
            ocr_hits = result.stats.cache.ocr_hits,
            "document done"
        );
        result
    }

    fn field_dir(&self, doc: &DocumentManifest) -> PathBuf {
        self.cfg.run_dir.join(&doc.doc_id).join(self.cfg.variant.as_str())
    }

    fn extract_field(
        &self,
        doc: &DocumentManifest,
        spec: &FieldSpec,
        prepared: &PreparedDoc,
        retriever: Option<&DocumentRetriever<'_>>,
    ) -> Result<FieldCall, FieldFailure> {
        let fail = |candidates: &[usize]| {
            let candidates = candidates.to_vec();
            move |e: PipelineError| FieldFailure {
                message: e.to_string(),
                candidates,
            }
        };
        let (candidates, scores) = self.candidates(retriever, spec, doc.page_count()).map_err(fail(&[]))?;
        let dir = self.field_dir(doc);
        let slug = field_slug(&spec.name);
        let write = |ext: &str, bytes: &[u8]| -> Result<(), PipelineError> {
            fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
            let path = dir.join(format!("{slug}.{ext}"));
            fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))
        };
        if let Some(scores) = &scores {
            let json = serde_json::to_vec_pretty(scores).expect("scores serialize");
            write("retrieval.json", &json).map_err(fail(&candidates))?;
        }
        let prompt_variant = if self.cfg.variant.uses_structured_prompt() {
            PromptVariant::Full
        } else {
            PromptVariant::Minimal
        };
        let prompt = build_prompt(spec, doc.language, prompt_variant).render();
        write("prompt.txt", prompt.as_bytes()).map_err(fail(&candidates))?;

        let images: Vec<VlmImage> = candidates
            .iter()
            .map(|&i| VlmImage {
                page_index: i,
                path: prepared.images[i].clone(),
                sidecar_path: Some(doc.pages[i].sidecar_path()),
            })
            .collect();
        let response = self
            .vlm
            .call_vlm(&prompt, &images)
            .map_err(|e| fail(&candidates)(e.into()))?;
        write("response.txt", response.text.as_bytes()).map_err(fail(&candidates))?;
        let values = parse_structured_output(&response.text, spec).map_err(|e| fail(&candidates)(e.into()))?;
        Ok(FieldCall {
            candidates,
            images: response
                .pages_sent
                .iter()
                .map(|&i| prepared.images[i].clone())
                .collect(),
            pages_sent: response.pages_sent,
            values: values.into_iter().map(|v| (v.value, v.remarks, v.year)).collect(),
        })
    }

    fn finish_call(
        &self,
        doc: &DocumentManifest,
        spec: &FieldSpec,
        call: Result<FieldCall, FieldFailure>,
        created_at: chrono::DateTime<Utc>,
    ) -> (Vec<ExtractionRecord>, CallTrace) {
        let ocr_id = self.cfg.ocr.engine_id.as_str();
        let model_id = self.cfg.vlm.model_id.as_str();
        let record = |element: usize, raw: String, remarks: String, year: Option<String>, pages: &[usize]| {
            let typed_value = if raw.trim().is_empty() {
                String::new()
            } else {
                normalize_value(&raw, spec.value_type, &spec.name, doc.language)
                    .map(|v| v.to_string())
                    .unwrap_or_default()
            };
            ExtractionRecord {
                record_id: record_id(&doc.doc_id, &spec.name, self.cfg.variant, ocr_id, model_id, element),
                doc_id: doc.doc_id.clone(),
                field_name: spec.name.clone(),
                raw_value: raw,
                typed_value,
                remarks,
                year,
                source_pages: pages.to_vec(),
                variant: self.cfg.variant,
                ocr_id: ocr_id.to_string(),
                model_id: model_id.to_string(),
                created_at,
            }
        };
        let mut trace = CallTrace {
            doc_id: doc.doc_id.clone(),
            field: spec.name.clone(),
            pages_total: doc.page_count(),
            candidates: Vec::new(),
            pages_sent: Vec::new(),
            images: Vec::new(),
            error: None,
        };
        match call {
            Ok(call) => {
                trace.images = call.images.iter().map(|p| relative_to(p, &self.cfg.run_dir)).collect();
                trace.candidates = call.candidates;
                trace.pages_sent = call.pages_sent;
                let mut records: Vec<ExtractionRecord> = call
                    .values
                    .into_iter()
                    .enumerate()
                    .map(|(k, (v, r, y))| record(k, v, r, y, &trace.pages_sent))
                    .collect();
                if records.is_empty() {
                    records.push(record(0, String::new(), String::new(), None, &trace.pages_sent));
                }
                (records, trace)
            }
            Err(f) => {
                tracing::warn!(doc = %doc.doc_id, field = %spec.name, error = %f.message, "extraction call failed");
                trace.candidates = f.candidates;
                let remarks = format!("extraction failed: {}", f.message);
                trace.error = Some(f.message);
                (vec![record(0, String::new(), remarks, None, &[])], trace)
            }
        }
    }
}

struct FieldCall {
    candidates: Vec<usize>,
    pages_sent: Vec<usize>,
    values: Vec<(String, String, Option<String>)>,
    /// Image files of `pages_sent`.
    images: Vec<PathBuf>,
}

struct FieldFailure {
    message: String,
    candidates: Vec<usize>,
}

/// File-name form of a field name ("Net Profit" -> "net_profit").
pub fn field_slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base)
        .map(Path::to_path_buf)
        .unwrap_or_else(|_| path.to_path_buf())
}

/// Runs a single document with a fresh [`Pipeline`].
pub fn run_document(doc: &DocumentManifest, cfg: &RunConfig) -> Result<DocResult, PipelineError> {
    Ok(Pipeline::new(cfg)?.run_document(doc))
}

/// All documents of one variant, in corpus order.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub variant: RunVariant,
    pub ocr_id: String,
    pub model_id: String,
    pub docs: Vec<DocResult>,
}

impl RunOutput {
    pub fn records(&self) -> Vec<ExtractionRecord> {
        self.docs.iter().flat_map(|d| d.records.iter().cloned()).collect()
    }

    pub fn calls(&self) -> Vec<CallTrace> {
        self.docs.iter().flat_map(|d| d.calls.iter().cloned()).collect()
    }

    pub fn doc_stats(&self) -> Vec<DocStats> {
        self.docs.iter().map(|d| d.stats.clone()).collect()
    }

    pub fn cache_counts(&self) -> CacheCounts {
        let mut c = CacheCounts::default();
        for d in &self.docs {
            c.merge(d.stats.cache);
        }
        c
    }

    /// Wall time per successfully processed document, in seconds.
    pub fn wall_seconds(&self) -> Vec<f64> {
        self.docs
            .iter()
            .filter(|d| d.stats.error.is_none())
            .map(|d| d.stats.wall_ms as f64 / 1000.0)
            .collect()
    }

    pub fn latency(&self) -> Option<Percentiles> {
        latency_stats(&self.wall_seconds()).ok()
    }

    pub fn dir(run_dir: &Path, variant: RunVariant) -> PathBuf {
        run_dir.join(RUNS_DIR).join(variant.as_str())
    }

    /// Writes records, call traces and per-document stats.
    pub fn save(&self, run_dir: &Path) -> Result<PathBuf, PipelineError> {
        let dir = RunOutput::dir(run_dir, self.variant);
        write_jsonl(&dir.join(RECORDS_FILE), &self.records())?;
        write_jsonl(&dir.join(CALLS_FILE), &self.calls())?;
        write_jsonl(&dir.join(DOC_STATS_FILE), &self.doc_stats())?;
        Ok(dir)
    }

    pub fn summarize(&self, corpus: &Corpus, gt: &[GroundTruthEntry]) -> Result<RunSummary, PipelineError> {
        summarize(
            self.variant,
            &self.ocr_id,
            &self.model_id,
            &self.records(),
            &self.calls(),
            &corpus.doc_meta(),
            gt,
        )
    }
}

/// Scores one run. Page statistics count every call; retrieval recall is
/// reported for variants that retrieve, as the share of ground-truth items
/// whose planted page was among the pages sent.
pub fn summarize(
    variant: RunVariant,
    ocr_id: &str,
    model_id: &str,
    records: &[ExtractionRecord],
    calls: &[CallTrace],
    docs: &BTreeMap<String, DocMeta>,
    gt: &[GroundTruthEntry],
) -> Result<RunSummary, PipelineError> {
    let score = score_run(variant, ocr_id, model_id, records, gt, docs)?;
    let mut pages = PageStats::default();
    let mut failed = 0;
    let mut sent: HashMap<(&str, &str), &[usize]> = HashMap::new();
    for c in calls {
        pages.record(c.pages_sent.len(), c.pages_total);
        failed += u64::from(c.error.is_some());
        sent.insert((c.doc_id.as_str(), c.field.as_str()), &c.pages_sent);
    }
    let recall = variant.uses_retrieval().then(|| {
        let mut counts = Counts::default();
        for g in gt.iter().filter(|g| !g.pages.is_empty()) {
            let hit = sent
                .get(&(g.doc_id.as_str(), g.field.as_str()))
                .is_some_and(|s| g.pages.iter().any(|p| s.contains(p)));
            counts.add(hit);
        }
        counts
    });
    Ok(RunSummary::new(&score, pages, failed, recall))
}

/// Runs the configured variant over every document, `parallel_docs` at a
/// time, and saves the run under `run_dir/runs/<variant>/`.
pub fn run_corpus(corpus: &Corpus, cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    if corpus.docs.is_empty() {
        return Err(PipelineError::EmptyCorpus(corpus.root.clone()));
    }
    let pipeline = Pipeline::new(cfg)?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<DocResult>>> = Mutex::new(vec![None; corpus.docs.len()]);
    let workers = cfg.parallel_docs.min(corpus.docs.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(doc) = corpus.docs.get(i) else { break };
                let result = pipeline.run_document(doc);
                slots.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(result);
            });
        }
    });
    let docs = slots
        .into_inner()
        .unwrap_or_else(|p| p.into_inner())
        .into_iter()
        .map(|d| d.expect("every document ran"))
        .collect();
    let out = RunOutput {
        variant: cfg.variant,
        ocr_id: cfg.ocr.engine_id.clone(),
        model_id: cfg.vlm.model_id.clone(),
        docs,
    };
    out.save(&cfg.run_dir)?;
    Ok(out)
}

/// The five variants over one corpus with their report.
#[derive(Debug, Clone)]
pub struct AblationOutput {
    pub runs: Vec<RunOutput>,
    pub report: EvalReport,
    /// Rendered markdown report; byte-identical across seeded reruns.
    pub report_md: String,
    /// Per-document wall-time quartiles; varies between reruns.
    pub latency_md: String,
}

impl AblationOutput {
    pub fn run(&self, variant: RunVariant) -> Option<&RunOutput> {
        self.runs.iter().find(|r| r.variant == variant)
    }
}

/// Runs every variant in table order (the full pipeline first, so its
/// preprocessing and OCR artifacts are reused by the variants that share
/// them), scores them against the corpus ground truth and writes the report.
pub fn ablate(corpus: &Corpus, cfg: &RunConfig) -> Result<AblationOutput, PipelineError> {
    let gt = corpus.ground_truth()?;
    let mut runs = Vec::new();
    for variant in RunVariant::ALL {
        let out = run_corpus(corpus, &cfg.with_variant(variant))?;
        let c = out.cache_counts();
        tracing::info!(
            %variant,
            preprocess_hits = c.preprocess_hits,
            preprocess_misses = c.preprocess_misses,
            ocr_hits = c.ocr_hits,
            ocr_misses = c.ocr_misses,
            "variant done"
        );
        runs.push(out);
    }
    let summaries = runs
        .iter()
        .map(|r| r.summarize(corpus, &gt))
        .collect::<Result<Vec<_>, _>>()?;
    let report = EvalReport::new(summaries);
    let latency_rows: Vec<_> = runs
        .iter()
        .filter_map(|r| {
            r.latency()
                .map(|p| (r.variant, r.ocr_id.clone(), r.model_id.clone(), p))
        })
        .collect();
    let report_md = render_report(&report, &corpus.doc_meta());
    let latency_md = render_latency_table(&latency_rows);
    write_report(&cfg.run_dir, &report, &report_md, Some(&latency_md))?;
    Ok(AblationOutput {
        runs,
        report,
        report_md,
        latency_md,
    })
}

fn write_report(run_dir: &Path, report: &EvalReport, md: &str, latency_md: Option<&str>) -> Result<(), PipelineError> {
    fs::create_dir_all(run_dir).map_err(|e| PipelineError::io(run_dir, e))?;
    let mut files = vec![
        (
            "report.json",
            serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ),
        ("report.md", md.to_string()),
    ];
    if let Some(l) = latency_md {
        files.push(("latency.md", l.to_string()));
    }
    for (name, body) in files {
        let path = run_dir.join(name);
        fs::write(&path, body).map_err(|e| PipelineError::io(&path, e))?;
    }
    Ok(())
}

/// Variants that have saved records under `run_dir`, in table order.
pub fn saved_variants(run_dir: &Path) -> Vec<RunVariant> {
    RunVariant::ALL
        .into_iter()
        .filter(|v| RunOutput::dir(run_dir, *v).join(RECORDS_FILE).exists())
        .collect()
}

/// Re-scores saved runs without re-running them and rewrites the report.
pub fn evaluate_runs(corpus: &Corpus, run_dir: &Path) -> Result<EvalReport, PipelineError> {
    let gt = corpus.ground_truth()?;
    let docs = corpus.doc_meta();
    let mut summaries = Vec::new();
    for variant in saved_variants(run_dir) {
        let dir = RunOutput::dir(run_dir, variant);
        let records: Vec<ExtractionRecord> = read_jsonl(&dir.join(RECORDS_FILE))?;
        let calls: Vec<CallTrace> = read_jsonl(&dir.join(CALLS_FILE))?;
        let (ocr_id, model_id) = records
            .first()
            .map(|r| (r.ocr_id.clone(), r.model_id.clone()))
            .unwrap_or_default();
        summaries.push(summarize(variant, &ocr_id, &model_id, &records, &calls, &docs, &gt)?);
    }
    if summaries.is_empty() {
        return Err(PipelineError::Config(format!(
            "no saved runs under {}",
            run_dir.display()
        )));
    }
    let report = EvalReport::new(summaries);
    write_report(run_dir, &report, &render_report(&report, &docs), None)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(field_slug("Net Profit"), "net_profit");
        assert_eq!(field_slug("Currency Unit"), "currency_unit");
    }

    #[test]
    fn relative_paths_only_inside_the_run_dir() {
        let base = Path::new("/r/run");
        assert_eq!(relative_to(Path::new("/r/run/d/x.png"), base), PathBuf::from("d/x.png"));
        assert_eq!(relative_to(Path::new("/c/x.png"), base), PathBuf::from("/c/x.png"));
    }
}
