//! Structured-output parsing of VLM responses.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExtractError;
use crate::docmodel::FieldSpec;

/// One value as returned by the model, before normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedValue {
    pub value: String,
    pub remarks: String,
    pub year: Option<String>,
}

/// Removes Markdown code fences, keeping their content.
fn strip_fences(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The first balanced `{…}` or `[…]` span, honouring JSON string escapes.
pub fn first_balanced(text: &str) -> Option<&str> {
    let start = text.find(['{', '['])?;
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_str {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' | '[' => depth += 1,
            '}' | ']' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + c.len_utf8()]);
                }
            }
            _ => {}
        }
    }
    None
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.trim().to_string(),
        other => other.to_string(),
    }
}

fn element(obj: &serde_json::Map<String, Value>, spec: &FieldSpec) -> Result<ParsedValue, ExtractError> {
    let mut allowed = vec![spec.output_key.as_str(), "remarks"];
    if spec.multi_year {
        allowed.push("year");
    }
    let unexpected = obj.keys().any(|k| !allowed.contains(&k.as_str()));
    if unexpected || !obj.contains_key(&spec.output_key) {
        return Err(ExtractError::KeyMismatch {
            expected: allowed.iter().map(|s| s.to_string()).collect(),
            found: obj.keys().cloned().collect(),
        });
    }
    let year = obj.get("year").map(scalar).filter(|y| !y.is_empty());
    Ok(ParsedValue {
        value: scalar(&obj[&spec.output_key]),
        remarks: obj.get("remarks").map(scalar).unwrap_or_default(),
        year,
    })
}

/// Extracts the values for `spec` from a model response.
///
/// Fences are stripped, the first balanced JSON object or array is parsed,
/// and its keys must be the field's output key plus optional `remarks` (and
/// `year` for multi-year fields). An array yields one value per element.
pub fn parse_structured_output(raw: &str, spec: &FieldSpec) -> Result<Vec<ParsedValue>, ExtractError> {
    let cleaned = strip_fences(raw);
    let parse_error = |message: String| ExtractError::ParseError {
        message,
        raw: raw.to_string(),
    };
    let span = first_balanced(&cleaned).ok_or_else(|| parse_error("no balanced JSON object or array".into()))?;
    let value: Value = serde_json::from_str(span).map_err(|e| parse_error(e.to_string()))?;
    match value {
        Value::Object(obj) => Ok(vec![element(&obj, spec)?]),
        Value::Array(items) if !items.is_empty() => items
            .iter()
            .map(|item| match item {
                Value::Object(obj) => element(obj, spec),
                _ => Err(parse_error("array element is not an object".into())),
            })
            .collect(),
        Value::Array(_) => Err(parse_error("empty array".into())),
        _ => unreachable!("balanced span starts with an opener"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{field_by_name, DocType};

    fn dividend() -> FieldSpec {
        field_by_name(DocType::FinancialStatement, "Dividend").unwrap()
    }

    #[test]
    fn braces_inside_strings_do_not_count() {
        assert_eq!(first_balanced(r#"x {"a": "}{"} y"#), Some(r#"{"a": "}{"}"#));
        assert_eq!(first_balanced(r#"{"a": "\"}"}"#), Some(r#"{"a": "\"}"}"#));
        assert_eq!(first_balanced("{ unclosed"), None);
    }

    #[test]
    fn numbers_and_nulls_become_strings() {
        let v = parse_structured_output(r#"{"dividend": 1200, "remarks": null}"#, &dividend()).unwrap();
        assert_eq!(v[0].value, "1200");
        assert_eq!(v[0].remarks, "");
    }

    #[test]
    fn key_mismatch_names_keys() {
        match parse_structured_output(r#"{"dividends": "1"}"#, &dividend()) {
            Err(ExtractError::KeyMismatch { found, .. }) => {
                assert_eq!(found, vec!["dividends".to_string()])
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn year_key_rejected_for_single_year_fields() {
        let spec = field_by_name(DocType::FinancialStatement, "Currency").unwrap();
        assert!(parse_structured_output(r#"{"currency": "IDR", "year": "2023"}"#, &spec).is_err());
    }
}
