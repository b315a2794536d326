//! Mock VLM: answers from the sidecar text of the pages it is shown.
//!
//! Only the first `context_cap_pages` attached pages are visible, emulating
//! the loss of recall of compact models over long multi-image inputs. The
//! mock reads "label: value" lines and chooses the one whose label best
//! matches what the prompt asks for:
//!
//! * targets are the output key (as words), the field named in the task line
//!   and any language-specific terms listed in the prompt;
//! * a label is a candidate when it contains a target;
//! * candidates whose label carries a word from a "Do not extract" statement
//!   that is not itself a requested term are skipped;
//! * among the rest, the label with the fewest unrequested words wins, then
//!   the earliest (attachment order, then line order).
//!
//! A richer prompt therefore steers the mock away from distractor lines,
//! while a minimal prompt falls for whichever matching line comes first.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::VlmImage;
use crate::hashing::ContentHasher;
use crate::prompting::{EXCLUSION_PREFIX, KEY_TERMS_PREFIX, LANGUAGE_TERMS_PREFIX};
use crate::retrieval::tokenize;

const FILLER: &[&str] = &["a", "an", "the", "of", "for", "to", "and", "in", "on", "by"];

#[derive(Debug, Default)]
struct Request {
    output_key: String,
    multi_year: bool,
    targets: Vec<String>,
    requested: Vec<String>,
    excluded: Vec<String>,
}

fn singular(t: &str) -> &str {
    if t.len() > 3 {
        t.strip_suffix('s').unwrap_or(t)
    } else {
        t
    }
}

fn words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !FILLER.contains(&t.as_str()))
        .map(|t| singular(&t).to_string())
        .collect()
}

fn parse_prompt(prompt: &str) -> Request {
    let mut req = Request::default();
    for line in prompt.lines().map(str::trim) {
        if let Some(rest) = line.strip_prefix("JSON keys: {") {
            if let Some(first) = rest.split('"').nth(1) {
                req.output_key = first.to_string();
            }
            // A separate "year" key marks a multi-year field; the Year field
            // itself has "year" as its output key.
            req.multi_year = req.output_key != "year" && rest.contains("\"year\"");
        } else if let Some(rest) = line
            .strip_prefix("Extract the ")
            .and_then(|r| r.strip_suffix(" from the given document."))
        {
            req.targets.push(rest.to_lowercase());
        } else if let Some(rest) = line.strip_prefix(KEY_TERMS_PREFIX) {
            req.requested.extend(rest.split(',').flat_map(words));
        } else if line.starts_with(LANGUAGE_TERMS_PREFIX) {
            if let Some((_, terms)) = line.split_once("):") {
                req.targets.extend(
                    terms
                        .split(',')
                        .map(|t| t.trim().to_lowercase())
                        .filter(|t| !t.is_empty()),
                );
            }
        } else if let Some(rest) = line.strip_prefix(EXCLUSION_PREFIX) {
            req.excluded.extend(words(rest));
        }
    }
    if !req.output_key.is_empty() {
        req.targets.insert(0, req.output_key.replace('_', " "));
    }
    req.targets.dedup();
    for t in req.targets.clone() {
        req.requested.extend(words(&t));
    }
    req
}

struct Candidate {
    value: String,
    year: Option<String>,
    extra_words: usize,
    position: (usize, usize),
}

/// Splits `"Label (2023): value"` into label, optional year and value.
fn split_line(line: &str) -> Option<(String, Option<String>, String)> {
    let (label, value) = line.split_once(':').or_else(|| line.split_once('：'))?;
    let value = value.trim();
    if value.is_empty() {
        return None;
    }
    let mut label = label.trim().to_string();
    let mut year = None;
    if let (Some(open), true) = (label.rfind('('), label.ends_with(')')) {
        let inner = &label[open + 1..label.len() - 1];
        if inner.len() == 4 && inner.chars().all(|c| c.is_ascii_digit()) {
            year = Some(inner.to_string());
            label = label[..open].trim().to_string();
        }
    }
    Some((label, year, value.to_string()))
}

fn candidates(req: &Request, pages: &[String]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (p, text) in pages.iter().enumerate() {
        for (l, line) in text.lines().enumerate() {
            let Some((label, year, value)) = split_line(line) else {
                continue;
            };
            let lower = label.to_lowercase();
            if !req.targets.iter().any(|t| lower.contains(t.as_str())) {
                continue;
            }
            let label_words = words(&lower);
            let unrequested: Vec<&String> = label_words.iter().filter(|w| !req.requested.contains(w)).collect();
            if unrequested.iter().any(|w| req.excluded.contains(w)) {
                continue;
            }
            out.push(Candidate {
                value,
                year,
                extra_words: unrequested.len(),
                position: (p, l),
            });
        }
    }
    out.sort_by_key(|c| (c.extra_words, c.position));
    out
}

/// The mock's JSON answer for a prompt over the visible page texts.
pub fn mock_answer(prompt: &str, visible_pages: &[String]) -> Value {
    let req = parse_prompt(prompt);
    let key = req.output_key.clone();
    let cands = candidates(&req, visible_pages);
    let record = |value: &str, year: Option<&str>, remarks: &str| {
        let mut m = Map::new();
        m.insert(key.clone(), json!(value));
        if req.multi_year {
            m.insert("year".into(), json!(year.unwrap_or("")));
        }
        m.insert("remarks".into(), json!(remarks));
        Value::Object(m)
    };
    let Some(best) = cands.first() else {
        return record("", None, "not found");
    };
    if !req.multi_year {
        return record(&best.value, None, "");
    }
    // One entry per year, taken from the best-ranked candidate for that year.
    let mut by_year: BTreeMap<String, &Candidate> = BTreeMap::new();
    for c in &cands {
        if let Some(y) = &c.year {
            by_year.entry(y.clone()).or_insert(c);
        }
    }
    if by_year.is_empty() {
        return record(&best.value, None, "");
    }
    Value::Array(
        by_year
            .iter()
            .rev()
            .map(|(y, c)| record(&c.value, Some(y), ""))
            .collect(),
    )
}

/// Renders the mock answer the way chat models tend to: sometimes fenced,
/// sometimes with a lead-in sentence. The choice is seeded by the request.
pub fn mock_response_text(prompt: &str, images: &[VlmImage], visible_pages: &[String], seed: u64) -> String {
    let answer = mock_answer(prompt, visible_pages);
    let mut h = ContentHasher::new().part(seed.to_le_bytes()).part(prompt);
    for img in images {
        h = h.part(img.page_index.to_le_bytes());
    }
    let mut s = [0u8; 32];
    hex::decode_to_slice(h.hex(), &mut s).expect("sha256 hex");
    let mut rng = ChaCha8Rng::from_seed(s);
    let body = serde_json::to_string_pretty(&answer).expect("json value");
    match rng.random_range(0..3) {
        0 => body,
        1 => format!("```json\n{body}\n```"),
        _ => format!("Here is the extracted data:\n```json\n{body}\n```"),
    }
}
