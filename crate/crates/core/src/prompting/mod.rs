//! Structured extraction prompts and review-driven refinement suggestions.

mod suggest;
mod template;

use thiserror::Error;

pub use suggest::{derive_suggestions, RefinementSuggestion, SuggestionKind, SUGGESTION_THRESHOLD};
pub use template::{
    build_prompt, output_schema_line, PromptTemplate, PromptVariant, EXCLUSION_PREFIX, FORMAT_LINE, KEY_TERMS_PREFIX,
    LANGUAGE_TERMS_PREFIX, MINIMAL_TASK_LINE, MULTI_YEAR_LINE, REMARKS_LINE, ROLE_LINE,
};

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("unknown prompt variant {0:?}")]
    UnknownVariant(String),
}
