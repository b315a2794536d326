//! Value normalization before comparison.

use std::fmt;

use unicode_normalization::UnicodeNormalization;

use super::decimal::Decimal;
use super::EvalError;
use crate::docmodel::{Language, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalizedValue {
    Empty,
    Numeric(Decimal),
    Text(String),
}

impl NormalizedValue {
    pub fn is_empty(&self) -> bool {
        matches!(self, NormalizedValue::Empty)
    }
}

/// Canonical string form: the empty string, the decimal rendering, or the
/// normalized text. Normalizing it again yields the same value.
impl fmt::Display for NormalizedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizedValue::Empty => Ok(()),
            NormalizedValue::Numeric(d) => write!(f, "{d}"),
            NormalizedValue::Text(t) => f.write_str(t),
        }
    }
}

/// Scale words and the power of ten they stand for, longest first so that
/// "ribuan" wins over "ribu" and "百万" over "万".
const SCALES: &[(&str, u32)] = &[
    ("thousands", 3),
    ("trillions", 12),
    ("trillion", 12),
    ("thousand", 3),
    ("billions", 9),
    ("millions", 6),
    ("billion", 9),
    ("million", 6),
    ("triliun", 12),
    ("ribuan", 3),
    ("jutaan", 6),
    ("miliar", 9),
    ("milyar", 9),
    ("'000", 3),
    ("’000", 3),
    ("ribu", 3),
    ("juta", 6),
    ("百万", 6),
    ("百萬", 6),
    ("千万", 7),
    ("千萬", 7),
    ("亿", 8),
    ("億", 8),
    ("万", 4),
    ("萬", 4),
    ("千", 3),
];

/// Currency codes and symbols stripped before parsing, longest first.
const CURRENCIES: &[&str] = &[
    "人民币",
    "人民幣",
    "新台币",
    "新台幣",
    "港币",
    "港幣",
    "us$",
    "nt$",
    "hk$",
    "rp.",
    "idr",
    "usd",
    "sgd",
    "hkd",
    "myr",
    "rmb",
    "cny",
    "twd",
    "ntd",
    "eur",
    "gbp",
    "jpy",
    "s$",
    "rp",
    "rm",
    "$",
    "¥",
    "€",
    "£",
    "元",
    "圆",
];

fn unparseable(raw: &str, reason: &str) -> EvalError {
    EvalError::Unparseable {
        raw: raw.to_string(),
        reason: reason.to_string(),
    }
}

/// Decides which separators in a digit string group thousands and which one
/// (if any) marks the decimals, returning a plain `digits[.digits]` string.
///
/// * both `.` and `,` present: the rightmost one is the decimal mark;
/// * one kind, repeated: thousands separators;
/// * one kind, once: thousands when followed by exactly three digits and led
///   by a 1–3 digit group not starting with 0; otherwise the decimal mark.
fn resolve_separators(s: &str) -> Option<String> {
    let dots = s.matches('.').count();
    let commas = s.matches(',').count();
    let decimal_mark = match (dots, commas) {
        (0, 0) => None,
        (d, c) if d > 0 && c > 0 => {
            let last_dot = s.rfind('.')?;
            let last_comma = s.rfind(',')?;
            let mark = if last_dot > last_comma { '.' } else { ',' };
            if s.matches(mark).count() > 1 {
                return None;
            }
            Some(mark)
        }
        (d, c) if d + c > 1 => None,
        _ => {
            let mark = if dots == 1 { '.' } else { ',' };
            let (lead, tail) = s.split_once(mark)?;
            let thousands = tail.len() == 3 && (1..=3).contains(&lead.len()) && !lead.starts_with('0');
            (!thousands).then_some(mark)
        }
    };
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '0'..='9' => out.push(c),
            '.' | ',' if Some(c) == decimal_mark => out.push('.'),
            '.' | ',' => {}
            _ => return None,
        }
    }
    Some(out)
}

/// Parses a monetary or count value written in any of the corpus
/// conventions: currency codes and symbols, both separator styles,
/// parentheses for negatives, and scale words such as `'000`, `juta` or `万`.
pub fn normalize_numeric(raw: &str, _language: Language) -> Result<NormalizedValue, EvalError> {
    let mut s: String = raw.nfkc().collect::<String>().trim().to_lowercase();
    if s.is_empty() {
        return Ok(NormalizedValue::Empty);
    }
    s = s.replace(['\u{2212}', '\u{2013}'], "-");

    let mut negative = false;
    if s.starts_with('(') && s.ends_with(')') {
        negative = true;
        s = s[1..s.len() - 1].to_string();
    }

    let mut exp = 0u32;
    for (word, e) in SCALES {
        if s.contains(word) {
            exp += e * s.matches(word).count() as u32;
            s = s.replace(word, " ");
        }
    }
    for cur in CURRENCIES {
        s = s.replace(cur, " ");
    }
    let mut compact: String = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '\'' && *c != '’')
        .collect();
    if let Some(rest) = compact.strip_prefix('-') {
        negative = !negative;
        compact = rest.to_string();
    } else if let Some(rest) = compact.strip_suffix('-') {
        negative = !negative;
        compact = rest.to_string();
    }
    if compact.starts_with('(') && compact.ends_with(')') && compact.len() > 2 {
        negative = !negative;
        compact = compact[1..compact.len() - 1].to_string();
    }
    if compact.is_empty() || !compact.chars().any(|c| c.is_ascii_digit()) {
        return Err(unparseable(raw, "no digits"));
    }
    let plain = resolve_separators(&compact).ok_or_else(|| unparseable(raw, "unexpected characters or separators"))?;
    let value = Decimal::parse_plain(&plain)
        .and_then(|d| d.shift(exp))
        .ok_or_else(|| unparseable(raw, "out of range"))?;
    Ok(NormalizedValue::Numeric(if negative && value.mantissa() != 0 {
        value.negate()
    } else {
        value
    }))
}

const MONTHS_EN: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];
const MONTHS_ID: [&str; 12] = [
    "januari",
    "februari",
    "maret",
    "april",
    "mei",
    "juni",
    "juli",
    "agustus",
    "september",
    "oktober",
    "november",
    "desember",
];
const ZH_NUMERALS: [&str; 12] = [
    "一", "二", "三", "四", "五", "六", "七", "八", "九", "十", "十一", "十二",
];

/// Month number (1–12) for an English, Indonesian or Chinese month name, or a
/// bare month number.
pub fn month_number(s: &str) -> Option<u32> {
    let lowered = s.trim().trim_end_matches('.').to_lowercase();
    let s = lowered.as_str();
    if let Ok(n) = s.parse::<u32>() {
        return (1..=12).contains(&n).then_some(n);
    }
    for table in [&MONTHS_EN, &MONTHS_ID] {
        if let Some(i) = table.iter().position(|m| *m == s) {
            return Some(i as u32 + 1);
        }
    }
    if s.chars().count() >= 3 {
        if let Some(i) = MONTHS_EN.iter().position(|m| m.starts_with(s)) {
            if s.len() == 3 || (s == "sept") {
                return Some(i as u32 + 1);
            }
        }
    }
    let stem = s.strip_suffix('月')?;
    if let Ok(n) = stem.parse::<u32>() {
        return (1..=12).contains(&n).then_some(n);
    }
    ZH_NUMERALS.iter().position(|z| *z == stem).map(|i| i as u32 + 1)
}

/// Compatibility-normalizes, lowercases and collapses whitespace. Month
/// fields map month names to their number.
pub fn normalize_text(raw: &str, field_name: &str, _language: Language) -> NormalizedValue {
    let s: String = raw.nfkc().collect::<String>().to_lowercase();
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        return NormalizedValue::Empty;
    }
    if field_name.eq_ignore_ascii_case("month") {
        if let Some(m) = month_number(&collapsed) {
            return NormalizedValue::Text(m.to_string());
        }
    }
    NormalizedValue::Text(collapsed)
}

/// Normalizes by the field's value type.
pub fn normalize_value(
    raw: &str,
    value_type: ValueType,
    field_name: &str,
    language: Language,
) -> Result<NormalizedValue, EvalError> {
    match value_type {
        ValueType::Numeric => normalize_numeric(raw, language),
        ValueType::Text => Ok(normalize_text(raw, field_name, language)),
    }
}

/// Exact equality of normalized values; empty matches only empty.
pub fn match_field(pred: &NormalizedValue, gt: &NormalizedValue) -> bool {
    pred == gt
}
