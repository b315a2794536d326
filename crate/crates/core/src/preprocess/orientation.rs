//! Coarse page orientation from projection-profile variance.

use super::edges::ink_mask;
use crate::raster::RasterImage;

/// Strip width for local projection profiles, as a fraction of the page's
/// short side. Line pitch scales with the page, so this keeps the drift of a
/// 10° tilted line within a strip below one line pitch at any resolution.
const STRIP_FRACTION: f64 = 1.0 / 12.0;

/// Mean over strips of the variance of per-line ink fraction.
///
/// `lines` iterates along the profile axis and `across` the other axis;
/// the image is cut into strips along `across` so that moderately skewed
/// text lines still produce a peaked profile inside each strip.
fn strip_profile_variance(mask: &[bool], w: usize, h: usize, horizontal: bool) -> f64 {
    let (lines, across) = if horizontal { (h, w) } else { (w, h) };
    let strip_px = (w.min(h) as f64 * STRIP_FRACTION).max(4.0);
    let strips = (across as f64 / strip_px).round().max(1.0) as usize;
    let mut total = 0.0;
    for s in 0..strips {
        let a0 = s * across / strips;
        let a1 = (s + 1) * across / strips;
        let span = (a1 - a0) as f64;
        let profile: Vec<f64> = (0..lines)
            .map(|l| {
                let ink = (a0..a1)
                    .filter(|&a| {
                        let (x, y) = if horizontal { (a, l) } else { (l, a) };
                        mask[y * w + x]
                    })
                    .count();
                ink as f64 / span
            })
            .collect();
        let mean = profile.iter().sum::<f64>() / lines as f64;
        total += profile.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / lines as f64;
    }
    total / strips as f64
}

/// Profile scores for the four candidate rotations (0, 90, 180, 270).
///
/// A half-turn reverses a profile without changing its variance, so 0/180 and
/// 90/270 always tie; the tie-break resolves them to 0 and 90.
pub fn orientation_scores(img: &RasterImage) -> [f64; 4] {
    let (w, h) = (img.width(), img.height());
    let mask = ink_mask(img);
    let rows = strip_profile_variance(&mask, w, h, true);
    let cols = strip_profile_variance(&mask, w, h, false);
    [rows, cols, rows, cols]
}

/// Clockwise rotation (degrees) present on the page: 0, 90, 180 or 270.
/// Undo it with `rotate(img, -r)`.
pub fn classify_orientation(img: &RasterImage) -> u32 {
    let scores = orientation_scores(img);
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best as u32 * 90
}
