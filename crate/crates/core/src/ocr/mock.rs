//! Deterministic mock engine backed by ground-truth sidecar text.
//!
//! The sidecar holds the page text as laid out by the generator, one line per
//! text line. Tokens receive synthetic boxes from their line and column. Noise
//! is drawn from a ChaCha stream seeded by `(seed, page_index, sidecar text)`,
//! so repeated calls are bit-identical.
//!
//! With legibility emulation on, the engine also looks at the image it is
//! given: a page lying on its side yields no text, and residual skew raises
//! the character substitution rate. This is what lets image cleanup make a
//! measurable difference downstream.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MockNoise, OcrError, OcrToken};
use crate::hashing::ContentHasher;
use crate::preprocess::{classify_orientation, estimate_skew_with};
use crate::raster::RasterImage;

/// Extra substitution probability per degree of residual skew.
pub const SKEW_SUB_PER_DEG: f64 = 0.03;
/// Skew below this is treated as straight.
const SKEW_TOLERANCE_DEG: f64 = 1.0;
const CHAR_W: f64 = 10.0;
const LINE_H: f64 = 30.0;
const GLYPH_H: f64 = 20.0;

/// What the engine can make of the page image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Legibility {
    pub readable: bool,
    pub extra_sub_rate: f64,
}

impl Legibility {
    pub const CLEAN: Legibility = Legibility {
        readable: true,
        extra_sub_rate: 0.0,
    };
}

/// Coarse look at orientation and skew on a reduced copy of the page.
pub fn assess_legibility(img: &RasterImage) -> Legibility {
    let min_dim = img.width().min(img.height());
    let factor = (min_dim / 200).max(1);
    let small = img.to_gray().downsample(factor);
    let rotation = classify_orientation(&small);
    if rotation % 180 == 90 {
        return Legibility {
            readable: false,
            extra_sub_rate: 1.0,
        };
    }
    let skew = estimate_skew_with(&small, 15.0, 0.5);
    let residual = if skew.confidence >= 0.1 {
        skew.angle_deg.abs()
    } else {
        0.0
    };
    let extra = if residual <= SKEW_TOLERANCE_DEG {
        0.0
    } else {
        SKEW_SUB_PER_DEG * residual
    };
    Legibility {
        readable: true,
        extra_sub_rate: extra,
    }
}

fn confusable(c: char) -> Option<char> {
    Some(match c {
        '0' => 'O',
        'O' => '0',
        'o' => '0',
        '1' => 'l',
        'l' => '1',
        'I' => '1',
        '5' => 'S',
        'S' => '5',
        's' => '5',
        '8' => 'B',
        'B' => '8',
        '2' => 'Z',
        'Z' => '2',
        '6' => 'G',
        'G' => '6',
        'e' => 'c',
        'c' => 'e',
        'a' => 'o',
        'n' => 'h',
        'h' => 'n',
        'u' => 'v',
        'v' => 'u',
        'i' => 'j',
        't' => 'f',
        'd' => 'a',
        'r' => 'n',
        'p' => 'q',
        'y' => 'v',
        'm' => 'n',
        _ => return None,
    })
}

/// Applies confusable substitutions to one token. CJK ideographs swap with a
/// neighbouring code point.
fn corrupt(token: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    if rate <= 0.0 {
        return token.to_string();
    }
    let chars: Vec<char> = token.chars().collect();
    let mut out = String::with_capacity(token.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == 'r' && chars.get(i + 1) == Some(&'n') && rng.random_bool(rate.min(1.0)) {
            out.push('m');
            i += 2;
            continue;
        }
        if c == 'm' && rng.random_bool(rate.min(1.0)) {
            out.push_str("rn");
            i += 1;
            continue;
        }
        let replaced = if ('\u{4e00}'..='\u{9fff}').contains(&c) {
            if rng.random_bool(rate.min(1.0)) {
                char::from_u32(c as u32 + 1)
            } else {
                None
            }
        } else {
            confusable(c).filter(|_| rng.random_bool(rate.min(1.0)))
        };
        out.push(replaced.unwrap_or(c));
        i += 1;
    }
    out
}

/// Tokens of the sidecar text with noise applied, in layout order.
pub fn mock_tokens(sidecar_text: &str, page_index: usize, noise: &MockNoise, legibility: Legibility) -> Vec<OcrToken> {
    if !legibility.readable {
        return Vec::new();
    }
    let seed_hex = ContentHasher::new()
        .part(noise.seed.to_le_bytes())
        .part((page_index as u64).to_le_bytes())
        .part(sidecar_text)
        .hex();
    let mut seed = [0u8; 32];
    hex::decode_to_slice(&seed_hex, &mut seed).expect("sha256 hex");
    let mut rng = ChaCha8Rng::from_seed(seed);
    let sub_rate = (noise.char_sub_rate + legibility.extra_sub_rate).min(1.0);

    let mut tokens = Vec::new();
    for (line_no, line) in sidecar_text.lines().enumerate() {
        let y0 = line_no as f64 * LINE_H;
        let mut col = 0usize;
        for word in line.split(' ') {
            let width = word.chars().count();
            if width > 0 {
                let drop = noise.token_drop_rate > 0.0 && rng.random_bool(noise.token_drop_rate.min(1.0));
                let text = corrupt(word, sub_rate, &mut rng);
                if !drop {
                    let conf = (1.0 - sub_rate).clamp(0.05, 1.0) * (0.9 + 0.1 * rng.random::<f64>());
                    tokens.push(OcrToken {
                        text,
                        bbox: [col as f64 * CHAR_W, y0, (col + width) as f64 * CHAR_W, y0 + GLYPH_H],
                        confidence: conf.clamp(0.0, 1.0),
                    });
                }
            }
            col += width + 1;
        }
    }
    tokens
}

pub fn read_sidecar(path: &Path) -> Result<String, OcrError> {
    std::fs::read_to_string(path)
        .map_err(|e| OcrError::EngineUnavailable(format!("mock sidecar {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_identity() {
        let noise = MockNoise::default();
        let toks = mock_tokens("Net profit 1,234\nsecond  line", 0, &noise, Legibility::CLEAN);
        let words: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(words, ["Net", "profit", "1,234", "second", "line"]);
    }

    #[test]
    fn unreadable_page_has_no_tokens() {
        let illegible = Legibility {
            readable: false,
            extra_sub_rate: 1.0,
        };
        assert!(mock_tokens("text", 0, &MockNoise::default(), illegible).is_empty());
    }

    #[test]
    fn full_rate_corrupts_confusables() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(corrupt("105", 1.0, &mut rng), "lOS");
        assert_eq!(corrupt("burn", 1.0, &mut rng), "bvm");
    }
}
