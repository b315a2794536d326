//! Orchestration for `pagewise-core`: run variants over a corpus with cached
//! stage artifacts, the five-way ablation, synthetic corpora with planted
//! ground truth, and the analyst review service.
//!
//! A run of the full pipeline over a generated corpus:
//!
//! ```no_run
//! use pagewise::{generate_synthetic_corpus, run_corpus, Corpus, RunConfig, SyntheticCorpusSpec};
//!
//! # fn main() -> Result<(), pagewise::PipelineError> {
//! let dir = std::path::Path::new("corpus");
//! generate_synthetic_corpus(&SyntheticCorpusSpec::default(), dir)?;
//! let corpus = Corpus::load(dir)?;
//! let output = run_corpus(&corpus, &RunConfig::default())?;
//! println!("{} records", output.records().len());
//! # Ok(())
//! # }
//! ```

pub mod api;
pub mod cache;
pub mod config;
pub mod corpus;
pub mod review;
pub mod runner;
pub mod synth;

use std::path::{Path, PathBuf};

use pagewise_core::docmodel::ManifestError;
use pagewise_core::evaluate::EvalError;
use pagewise_core::extract::ExtractError;
use pagewise_core::ocr::OcrError;
use pagewise_core::raster::RasterError;
use pagewise_core::retrieval::RetrievalError;
use thiserror::Error;

pub use config::RunConfig;
pub use corpus::Corpus;
pub use runner::{ablate, evaluate_runs, run_corpus, run_document, AblationOutput, DocResult, Pipeline, RunOutput};
pub use synth::{generate_synthetic_corpus, CorpusSummary, SyntheticCorpusSpec};

/// Version tag carried by every JSON body the review API returns.
pub const API_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no documents found under {}", .0.display())]
    EmptyCorpus(PathBuf),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("rasterizing {}: {message}", pdf.display())]
    Rasterize { pdf: PathBuf, message: String },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Ocr(#[from] OcrError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> PipelineError {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    struct Quickstart;
    #[doc = include_str!("../../../book/src/configuration.md")]
    struct Configuration;
    #[doc = include_str!("../../../book/src/retrieval.md")]
    struct Retrieval;
    #[doc = include_str!("../../../book/src/kernels.md")]
    struct Kernels;
    #[doc = include_str!("../../../book/src/review-api.md")]
    struct ReviewApi;
}
