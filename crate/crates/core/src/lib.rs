//! Page-level retrieval and structured extraction for long scanned financial
//! documents.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`docmodel`]: documents, pages, field schemas, extraction records and
//!   analyst review decisions.
//! * [`raster`]: the 8-bit raster buffer every image kernel works on.
//! * [`preprocess`]: content cropping, orientation and Hough-based skew
//!   correction, bicubic rescaling, CLAHE and Gaussian denoising.
//! * [`ocr`]: engine adapters (subprocess, HTTP, deterministic mock) and
//!   reading-order assembly.
//! * [`retrieval`]: BM25 + dense hybrid page ranking per target field.
//! * [`prompting`]: structured extraction prompts and review-driven
//!   refinement suggestions.
//! * [`extract`]: VLM endpoint adapters and structured-output parsing.
//! * [`evaluate`]: value normalization, field-level accuracy and reports.
//!
//! Orchestration (run variants, caching, the review service) lives in the
//! `pagewise` crate.

pub mod docmodel;
pub mod evaluate;
pub mod extract;
pub mod hashing;
pub mod ocr;
pub mod preprocess;
pub mod prompting;
pub mod raster;
pub mod retrieval;

pub use docmodel::{
    DocType, DocumentManifest, ExtractionRecord, FieldSpec, Language, PageRecord, ReviewDecision, ReviewStatus,
    RunVariant, ValueType,
};
pub use raster::RasterImage;
