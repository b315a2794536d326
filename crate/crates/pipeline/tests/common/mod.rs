#![allow(dead_code)]

use std::path::Path;

use pagewise::{generate_synthetic_corpus, Corpus, RunConfig, SyntheticCorpusSpec};
use pagewise_core::ExtractionRecord;

/// A handful of short documents, enough to exercise every code path quickly.
pub fn small_spec() -> SyntheticCorpusSpec {
    SyntheticCorpusSpec {
        doc_count: 6,
        fs_pages: [9, 14],
        payslip_pages: [1, 3],
        ..SyntheticCorpusSpec::default()
    }
}

pub fn small_corpus(dir: &Path) -> Corpus {
    generate_synthetic_corpus(&small_spec(), dir).unwrap();
    Corpus::load(dir).unwrap()
}

/// Mock backends configured the way the corpus expects, writing to `run_dir`.
pub fn config_for(spec: &SyntheticCorpusSpec, run_dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.ocr.mock_noise = spec.ocr_noise.clone();
    cfg.run_dir = run_dir.to_path_buf();
    cfg
}

/// Test-speed variant of [`config_for`]: pages are not upscaled.
pub fn fast_config(spec: &SyntheticCorpusSpec, run_dir: &Path) -> RunConfig {
    let mut cfg = config_for(spec, run_dir);
    cfg.preprocess.target_min_dim_px = spec.page_px[0].min(spec.page_px[1]);
    cfg
}

/// Records as JSON lines without their creation timestamps.
pub fn without_timestamps(records: &[ExtractionRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).unwrap();
            v.as_object_mut().unwrap().remove("created_at");
            v.to_string()
        })
        .collect()
}
