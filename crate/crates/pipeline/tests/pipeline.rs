mod common;

use std::fs;
use std::path::Path;

use common::{fast_config, small_corpus, small_spec, without_timestamps};
use pagewise::corpus::read_jsonl;
use pagewise::runner::{ablate, evaluate_runs, run_corpus, CallTrace, RunOutput, CALLS_FILE, RECORDS_FILE};
use pagewise::{generate_synthetic_corpus, Corpus, PipelineError, RunConfig, SyntheticCorpusSpec};
use pagewise_core::docmodel::builtin_schema;
use pagewise_core::evaluate::GroundTruthEntry;
use pagewise_core::extract::VlmTransport;
use pagewise_core::{DocType, RunVariant};
use walkdir::WalkDir;

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = WalkDir::new(root)
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().to_string_lossy().to_string();
            (rel, fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn dir_exists(root: &Path, name: &str) -> bool {
    WalkDir::new(root)
        .into_iter()
        .map(Result::unwrap)
        .any(|e| e.file_type().is_dir() && e.file_name() == name)
}

#[test]
fn generator_is_seeded_and_respects_its_ranges() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let sa = generate_synthetic_corpus(&spec, a.path()).unwrap();
    generate_synthetic_corpus(&spec, b.path()).unwrap();
    // Manifests hold absolute page paths, so compare everything else.
    let strip = |t: Vec<(String, Vec<u8>)>| -> Vec<_> {
        t.into_iter().filter(|(p, _)| !p.ends_with("manifest.json")).collect()
    };
    assert!(
        strip(tree_bytes(a.path())) == strip(tree_bytes(b.path())),
        "same seed, different files"
    );

    let corpus = Corpus::load(a.path()).unwrap();
    assert_eq!(corpus.docs.len(), spec.doc_count);
    assert_eq!(corpus.page_total(), sa.pages);
    let mut expected_items = 0;
    for d in &corpus.docs {
        let (lo, hi) = match d.doc_type {
            DocType::FinancialStatement => (spec.fs_pages[0], spec.fs_pages[1]),
            DocType::Payslip => (spec.payslip_pages[0], spec.payslip_pages[1]),
        };
        assert!(
            (lo..=hi).contains(&d.page_count()),
            "{} has {} pages",
            d.doc_id,
            d.page_count()
        );
        assert!(d.pages.iter().all(|p| p.sidecar_path().exists()));
        expected_items += builtin_schema(d.doc_type).len();
    }
    let gt = corpus.ground_truth().unwrap();
    assert_eq!(gt.len(), expected_items);
    assert_eq!(sa.ground_truth_items, expected_items);
    for g in &gt {
        let doc = corpus.docs.iter().find(|d| d.doc_id == g.doc_id).unwrap();
        assert_eq!(g.pages.len(), 1);
        assert!(g.pages[0] < doc.page_count());
    }

    let c = tempfile::tempdir().unwrap();
    let other = SyntheticCorpusSpec {
        seed: 2,
        ..small_spec()
    };
    generate_synthetic_corpus(&other, c.path()).unwrap();
    let gt_b: Vec<GroundTruthEntry> = read_jsonl(&c.path().join("ground_truth.jsonl")).unwrap();
    assert_ne!(gt, gt_b);
}

#[test]
fn stage_artifacts_are_cached_and_shared_between_variants() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let pages = corpus.page_total() as u64;
    let cfg = fast_config(&small_spec(), run_dir.path());

    let first = run_corpus(&corpus, &cfg).unwrap();
    let c = first.cache_counts();
    assert_eq!(
        (c.preprocess_misses, c.preprocess_hits, c.ocr_misses, c.ocr_hits),
        (pages, 0, pages, 0)
    );

    let second = run_corpus(&corpus, &cfg).unwrap();
    let c = second.cache_counts();
    assert_eq!(
        (c.preprocess_misses, c.preprocess_hits, c.ocr_misses, c.ocr_hits),
        (0, pages, 0, pages)
    );
    assert_eq!(
        without_timestamps(&first.records()),
        without_timestamps(&second.records())
    );

    // Same preprocessing and OCR, different page selection or prompt.
    for v in [RunVariant::NoRetrieval, RunVariant::NoPrompt] {
        let c = run_corpus(&corpus, &cfg.with_variant(v)).unwrap().cache_counts();
        assert_eq!((c.preprocess_misses, c.ocr_misses), (0, 0), "{v}");
    }
    // Raw pages need their own OCR pass but no preprocessing.
    let c = run_corpus(&corpus, &cfg.with_variant(RunVariant::NoImgprep))
        .unwrap()
        .cache_counts();
    assert_eq!((c.preprocess_misses, c.preprocess_hits, c.ocr_misses), (0, 0, pages));

    // A stage config change invalidates only that stage's artifacts.
    let mut changed = cfg.clone();
    changed.ocr.mock_noise.char_sub_rate = 0.2;
    let c = run_corpus(&corpus, &changed).unwrap().cache_counts();
    assert_eq!((c.preprocess_hits, c.ocr_misses), (pages, pages));
}

#[test]
fn direct_variant_sends_the_first_pages_without_intermediate_artifacts() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let cfg = fast_config(&small_spec(), run_dir.path()).with_variant(RunVariant::Direct);
    let out = run_corpus(&corpus, &cfg).unwrap();

    for call in out.calls() {
        let n = call.pages_total.min(cfg.vlm.max_images_per_call);
        assert_eq!(
            call.pages_sent,
            (0..n).collect::<Vec<_>>(),
            "{} {}",
            call.doc_id,
            call.field
        );
        for img in &call.images {
            assert!(
                img.starts_with(corpus_dir.path()),
                "direct must attach raw pages, got {}",
                img.display()
            );
        }
    }
    assert!(!dir_exists(run_dir.path(), "ocr"));
    assert!(!dir_exists(run_dir.path(), "preprocess"));
    assert_eq!(out.cache_counts(), Default::default());

    // Prompts and responses are persisted per (doc, field).
    for d in &corpus.docs {
        for spec in builtin_schema(d.doc_type) {
            let stem = pagewise::runner::field_slug(&spec.name);
            let dir = run_dir.path().join(&d.doc_id).join("direct");
            assert!(dir.join(format!("{stem}.prompt.txt")).exists());
            assert!(dir.join(format!("{stem}.response.txt")).exists());
        }
    }
}

#[test]
fn no_retrieval_keeps_the_lowest_pages_of_preprocessed_images() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let cfg = fast_config(&small_spec(), run_dir.path()).with_variant(RunVariant::NoRetrieval);
    let out = run_corpus(&corpus, &cfg).unwrap();
    for call in out.calls() {
        assert_eq!(call.candidates, (0..call.pages_total).collect::<Vec<_>>());
        let n = call.pages_total.min(cfg.vlm.max_images_per_call);
        assert_eq!(call.pages_sent, (0..n).collect::<Vec<_>>());
        assert!(call
            .images
            .iter()
            .all(|p| p.starts_with(&call.doc_id) && p.components().any(|c| c.as_os_str() == "preprocess")));
    }
}

#[test]
fn full_variant_sends_retrieved_pages_and_saves_traces() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let cfg = fast_config(&small_spec(), run_dir.path());
    let out = run_corpus(&corpus, &cfg).unwrap();
    let saved = RunOutput::dir(run_dir.path(), RunVariant::Full);
    let calls: Vec<CallTrace> = read_jsonl(&saved.join(CALLS_FILE)).unwrap();
    assert_eq!(calls, out.calls());
    assert_eq!(
        read_jsonl::<pagewise_core::ExtractionRecord>(&saved.join(RECORDS_FILE)).unwrap(),
        out.records()
    );
    for c in &calls {
        assert!(c.pages_sent.len() <= cfg.retrieval.top_k.min(cfg.vlm.max_images_per_call));
        assert_eq!(c.pages_sent, c.candidates[..c.pages_sent.len()]);
        let stem = pagewise::runner::field_slug(&c.field);
        assert!(run_dir
            .path()
            .join(&c.doc_id)
            .join("full")
            .join(format!("{stem}.retrieval.json"))
            .exists());
    }
    // Every record points at pages it was actually shown.
    for r in out.records() {
        let call = calls
            .iter()
            .find(|c| c.doc_id == r.doc_id && c.field == r.field_name)
            .unwrap();
        assert_eq!(r.source_pages, call.pages_sent);
    }
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let run_dir = tempfile::tempdir().unwrap();
        let mut cfg = fast_config(&small_spec(), run_dir.path());
        cfg.parallel_docs = workers;
        let out = run_corpus(&corpus, &cfg).unwrap();
        let ids: Vec<_> = out.docs.iter().map(|d| d.stats.doc_id.clone()).collect();
        let want: Vec<_> = corpus.docs.iter().map(|d| d.doc_id.clone()).collect();
        assert_eq!(ids, want, "results stay in corpus order");
        outputs.push(without_timestamps(&out.records()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn empty_corpus_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(Corpus::load(dir.path()), Err(PipelineError::EmptyCorpus(_))));
    let empty = Corpus {
        root: dir.path().to_path_buf(),
        docs: Vec::new(),
    };
    let cfg = RunConfig {
        run_dir: dir.path().join("run"),
        ..RunConfig::default()
    };
    assert!(matches!(run_corpus(&empty, &cfg), Err(PipelineError::EmptyCorpus(_))));
}

#[test]
fn failed_calls_become_empty_predictions() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let mut cfg = fast_config(&small_spec(), run_dir.path()).with_variant(RunVariant::Direct);
    // Nothing listens on the discard port.
    cfg.vlm.transport = VlmTransport::Http;
    cfg.vlm.base_url = "http://127.0.0.1:9/v1/messages".into();
    cfg.vlm.retries = 0;
    cfg.vlm.timeout_s = 2;
    let out = run_corpus(&corpus, &cfg).unwrap();
    let fields: usize = corpus.docs.iter().map(|d| builtin_schema(d.doc_type).len()).sum();
    let records = out.records();
    assert_eq!(records.len(), fields, "one empty record per failed field");
    assert!(records
        .iter()
        .all(|r| r.raw_value.is_empty() && r.remarks.starts_with("extraction failed")));
    let summary = out.summarize(&corpus, &corpus.ground_truth().unwrap()).unwrap();
    assert_eq!(summary.failed_calls, fields as u64);
    assert_eq!(summary.overall.correct, 0);
}

#[test]
fn saved_runs_rescore_to_the_ablation_report() {
    let corpus_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(corpus_dir.path());
    let cfg = fast_config(&small_spec(), run_dir.path());
    let ab = ablate(&corpus, &cfg).unwrap();
    assert_eq!(ab.report.runs.len(), RunVariant::ALL.len());
    for name in ["report.json", "report.md", "latency.md"] {
        assert!(run_dir.path().join(name).exists(), "{name}");
    }
    let rescored = evaluate_runs(&corpus, run_dir.path()).unwrap();
    assert_eq!(rescored, ab.report);

    // The direct baseline sees at least as many pages per call as any other
    // variant.
    let pages = |v| ab.report.run(v, "mock", "mock-vlm").unwrap().pages.pages_sent;
    for v in RunVariant::ALL {
        assert!(pages(RunVariant::Direct) >= pages(v), "{v}");
    }
}
