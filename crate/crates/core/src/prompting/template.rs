//! Extraction prompt construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::docmodel::{FieldSpec, Language};

pub const ROLE_LINE: &str = "You are an expert financial data extraction specialist.";
pub const FORMAT_LINE: &str = "Output result in JSON only. Do NOT change JSON key.";
pub const MULTI_YEAR_LINE: &str = "Return a list for data with multiple years.";
pub const REMARKS_LINE: &str = "Leave blank empty if unsure, and specify reason in key remarks";
pub const MINIMAL_TASK_LINE: &str = "Extract the requested value from the given document.";
pub const EXCLUSION_PREFIX: &str = "Do not extract: ";
pub const KEY_TERMS_PREFIX: &str = "Key financial terms: ";
pub const LANGUAGE_TERMS_PREFIX: &str = "Language-specific terms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptVariant {
    /// Finance terms, exclusions, language hints, output format and remarks.
    Full,
    /// Role, a generic task and the output format only.
    Minimal,
}

impl FromStr for PromptVariant {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(PromptVariant::Full),
            "minimal" => Ok(PromptVariant::Minimal),
            _ => Err(PromptError::UnknownVariant(s.to_string())),
        }
    }
}

/// A prompt split into its sections, in rendering order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub field_name: String,
    pub role_line: String,
    pub task_line: String,
    pub key_terms_line: Option<String>,
    pub language_line: Option<String>,
    pub exclusion_lines: Vec<String>,
    pub format_lines: Vec<String>,
    pub remarks_line: Option<String>,
}

/// The JSON shape the model must return: the field key, `year` for
/// multi-year fields, and `remarks`.
pub fn output_schema_line(spec: &FieldSpec) -> String {
    let mut keys = vec![format!("\"{}\": \"\"", spec.output_key)];
    if spec.multi_year {
        keys.push("\"year\": \"\"".into());
    }
    keys.push("\"remarks\": \"\"".into());
    format!("JSON keys: {{{}}}", keys.join(", "))
}

pub fn build_prompt(spec: &FieldSpec, language: Language, variant: PromptVariant) -> PromptTemplate {
    let mut format_lines = vec![if spec.multi_year {
        format!("{FORMAT_LINE} {MULTI_YEAR_LINE}")
    } else {
        FORMAT_LINE.to_string()
    }];
    format_lines.push(output_schema_line(spec));

    match variant {
        PromptVariant::Minimal => PromptTemplate {
            field_name: spec.name.clone(),
            role_line: ROLE_LINE.into(),
            task_line: MINIMAL_TASK_LINE.into(),
            key_terms_line: None,
            language_line: None,
            exclusion_lines: Vec::new(),
            format_lines,
            remarks_line: None,
        },
        PromptVariant::Full => {
            let local = spec.lang_keywords_for(language);
            let language_line = (language != Language::English && !local.is_empty()).then(|| {
                format!(
                    "{LANGUAGE_TERMS_PREFIX} ({}): {}",
                    language.display_name(),
                    local.join(", ")
                )
            });
            PromptTemplate {
                field_name: spec.name.clone(),
                role_line: ROLE_LINE.into(),
                task_line: format!("Extract the {} from the given document.", spec.phrase()),
                key_terms_line: Some(format!("{KEY_TERMS_PREFIX}{}", spec.keywords.join(", "))),
                language_line,
                exclusion_lines: spec
                    .exclusions
                    .iter()
                    .map(|e| format!("{EXCLUSION_PREFIX}{e}"))
                    .collect(),
                format_lines,
                remarks_line: Some(REMARKS_LINE.into()),
            }
        }
    }
}

impl PromptTemplate {
    /// Sections separated by blank lines; lines within a section by newlines.
    pub fn render(&self) -> String {
        let mut sections: Vec<String> = vec![self.role_line.clone(), self.task_line.clone()];
        let terms: Vec<&str> = self
            .key_terms_line
            .iter()
            .chain(&self.language_line)
            .map(String::as_str)
            .collect();
        if !terms.is_empty() {
            sections.push(terms.join("\n"));
        }
        if !self.exclusion_lines.is_empty() {
            sections.push(self.exclusion_lines.join("\n"));
        }
        let mut tail = self.format_lines.clone();
        tail.extend(self.remarks_line.clone());
        sections.push(tail.join("\n"));
        sections.join("\n\n")
    }
}

impl fmt::Display for PromptTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{field_by_name, DocType};

    #[test]
    fn minimal_has_no_finance_sections() {
        let spec = field_by_name(DocType::FinancialStatement, "Dividend").unwrap();
        let text = build_prompt(&spec, Language::Indonesian, PromptVariant::Minimal).render();
        assert!(!text.contains(KEY_TERMS_PREFIX));
        assert!(!text.contains(EXCLUSION_PREFIX));
        assert!(!text.contains(LANGUAGE_TERMS_PREFIX));
        assert!(text.contains("\"dividend\""));
    }

    #[test]
    fn language_line_only_for_non_english() {
        let spec = field_by_name(DocType::FinancialStatement, "Dividend").unwrap();
        assert!(build_prompt(&spec, Language::English, PromptVariant::Full)
            .language_line
            .is_none());
        let id = build_prompt(&spec, Language::Indonesian, PromptVariant::Full);
        assert!(id.language_line.unwrap().contains("dividen"));
    }

    #[test]
    fn variant_parse() {
        assert_eq!("Full".parse::<PromptVariant>().unwrap(), PromptVariant::Full);
        assert!(matches!(
            "terse".parse::<PromptVariant>(),
            Err(PromptError::UnknownVariant(_))
        ));
    }
}
