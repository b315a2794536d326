//! Run configuration, loaded from TOML.

use std::path::{Path, PathBuf};

use pagewise_core::extract::VlmEndpointConfig;
use pagewise_core::ocr::OcrEngineConfig;
use pagewise_core::preprocess::PreprocessConfig;
use pagewise_core::retrieval::RetrievalConfig;
use pagewise_core::RunVariant;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

/// Everything one run needs. Every section has defaults, so an empty file is
/// a valid configuration (all-mock backends).
///
/// ```toml
/// variant = "no_prompt"
/// parallel_docs = 2
/// run_dir = "runs/demo"
///
/// [retrieval]
/// top_k = 6
///
/// [vlm]
/// max_images_per_call = 6
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub variant: RunVariant,
    pub preprocess: PreprocessConfig,
    pub ocr: OcrEngineConfig,
    pub retrieval: RetrievalConfig,
    pub vlm: VlmEndpointConfig,
    /// Documents processed concurrently.
    pub parallel_docs: usize,
    pub run_dir: PathBuf,
    /// External PDF rasterizer. `{pdf}` and `{out}` are replaced by the input
    /// file and the directory that must receive one PNG per page.
    pub rasterize_cmd: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variant: RunVariant::Full,
            preprocess: PreprocessConfig::default(),
            ocr: OcrEngineConfig::default(),
            retrieval: RetrievalConfig::default(),
            vlm: VlmEndpointConfig::default(),
            parallel_docs: 4,
            run_dir: PathBuf::from("runs/default"),
            rasterize_cmd: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |e: &dyn std::fmt::Display| PipelineError::Config(e.to_string());
        if self.parallel_docs == 0 {
            return Err(PipelineError::Config("parallel_docs must be at least 1".into()));
        }
        self.preprocess.validate().map_err(|e| bad(&e))?;
        self.ocr.validate().map_err(|e| bad(&e))?;
        self.retrieval.validate().map_err(|e| bad(&e))?;
        self.vlm.validate().map_err(|e| bad(&e))?;
        Ok(())
    }

    pub fn with_variant(&self, variant: RunVariant) -> RunConfig {
        RunConfig {
            variant,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig {
            variant: RunVariant::NoImgprep,
            ..RunConfig::default()
        };
        cfg.ocr.mock_noise.char_sub_rate = 0.05;
        cfg.rasterize_cmd = Some("pdftoppm -png {pdf} {out}/p".into());
        let text = cfg.to_toml_string();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml_str("parallel_docs = 0").is_err());
        assert!(RunConfig::from_toml_str("[retrieval]\nalpha = 2.0").is_err());
        assert!(RunConfig::from_toml_str("paralel_docs = 2").is_err());
        assert!(RunConfig::from_toml_str("variant = \"half\"").is_err());
    }
}
