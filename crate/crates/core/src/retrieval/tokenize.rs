//! Multilingual tokenization for lexical scoring.

use unicode_normalization::UnicodeNormalization;

/// Han ideographs and Japanese kana: scripts written without spaces.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}

#[derive(PartialEq, Clone, Copy)]
enum Class {
    Word,
    Cjk,
    Other,
}

fn class(c: char) -> Class {
    if is_cjk(c) {
        Class::Cjk
    } else if c.is_alphanumeric() {
        Class::Word
    } else {
        Class::Other
    }
}

fn flush(run: &mut Vec<char>, kind: Class, out: &mut Vec<String>) {
    match kind {
        Class::Word => out.push(run.iter().collect()),
        Class::Cjk if run.len() == 1 => out.push(run[0].to_string()),
        Class::Cjk => out.extend(run.windows(2).map(|w| w.iter().collect())),
        Class::Other => {}
    }
    run.clear();
}

/// NFKC-normalizes and lowercases `text`, then splits it into tokens.
///
/// Alphanumeric runs outside CJK scripts become whole tokens (so digit groups
/// stay intact); CJK runs emit overlapping character bigrams, or the single
/// character for a run of length one. Everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized: String = text.nfkc().collect::<String>().to_lowercase();
    let mut out = Vec::new();
    let mut run = Vec::new();
    let mut kind = Class::Other;
    for c in normalized.chars() {
        let k = class(c);
        if k != kind {
            flush(&mut run, kind, &mut out);
            kind = k;
        }
        if k != Class::Other {
            run.push(c);
        }
    }
    flush(&mut run, kind, &mut out);
    out
}
