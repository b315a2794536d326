//! Fine skew estimation with a Hough line-angle vote.
//!
//! Every edge pixel `(x, y)` votes, for each candidate angle `θ`, into the
//! bin `ρ = round(y·cos θ − x·sin θ)`. Text lines tilted clockwise by `θ`
//! (image coordinates, y down) collapse into few `ρ` bins at that angle, so
//! the angle whose 50 strongest bins hold the most mass is the skew.

use serde::{Deserialize, Serialize};

use super::edges::edge_mask;
use super::PreprocessConfig;
use crate::raster::RasterImage;

const TOP_BINS: usize = 50;
/// Pages with fewer edge pixels carry no usable line evidence.
const MIN_EDGE_PIXELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewEstimate {
    /// Clockwise tilt of the text lines, degrees. Undo with
    /// `rotate(img, -angle_deg)`.
    pub angle_deg: f64,
    pub confidence: f64,
}

impl SkewEstimate {
    pub const NONE: SkewEstimate = SkewEstimate {
        angle_deg: 0.0,
        confidence: 0.0,
    };
}

/// Candidate angles `-range, -range + step, …, +range`, always including 0.
fn angle_grid(range: f64, step: f64) -> Vec<f64> {
    let n = (range / step + 1e-9).floor() as i64;
    (-n..=n).map(|i| i as f64 * step).collect()
}

pub fn estimate_skew(img: &RasterImage, cfg: &PreprocessConfig) -> SkewEstimate {
    estimate_skew_with(img, cfg.skew_range_deg, cfg.skew_step_deg)
}

pub fn estimate_skew_with(img: &RasterImage, range_deg: f64, step_deg: f64) -> SkewEstimate {
    let (w, h) = (img.width(), img.height());
    let mask = edge_mask(img);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        xs.push((i % w) as f32);
        ys.push((i / w) as f32);
    }
    if xs.len() < MIN_EDGE_PIXELS {
        return SkewEstimate::NONE;
    }

    let angles = angle_grid(range_deg, step_deg);
    let diag = ((w * w + h * h) as f64).sqrt().ceil() as usize + 2;
    let nbins = 2 * diag + 1;
    // Rounding half up on a positive value is `floor(v + 0.5)`; fold the 0.5
    // into the offset so the inner loop is a plain truncation.
    let offset = diag as f32 + 0.5;
    let mut acc = vec![0u32; nbins];
    let mut mass = Vec::with_capacity(angles.len());
    for &theta in &angles {
        acc.iter_mut().for_each(|a| *a = 0);
        let (s, c) = theta.to_radians().sin_cos();
        let (s, c) = (s as f32, c as f32);
        for (&x, &y) in xs.iter().zip(&ys) {
            let rho = y * c - x * s + offset;
            acc[rho as usize] += 1;
        }
        let k = TOP_BINS.min(nbins);
        let (larger, kth, _) = acc.select_nth_unstable_by(k - 1, |a, b| b.cmp(a));
        let top_mass = larger.iter().map(|&v| u64::from(v)).sum::<u64>() + u64::from(*kth);
        mass.push(top_mass);
    }

    // Argmax; ties resolve to the smallest |θ|, then the negative side.
    let mut best = 0;
    for i in 1..angles.len() {
        let better = mass[i] > mass[best] || (mass[i] == mass[best] && angles[i].abs() < angles[best].abs());
        if better {
            best = i;
        }
    }
    let peak = mass[best] as f64;
    let mut sorted = mass.clone();
    sorted.sort_unstable();
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
    };
    let confidence = ((peak - median) / (peak + 1e-9)).clamp(0.0, 1.0);
    SkewEstimate {
        angle_deg: angles[best],
        confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_contains_zero() {
        let g = angle_grid(15.0, 0.1);
        assert_eq!(g.len(), 301);
        assert!(g.contains(&0.0));
        assert!((g[0] + 15.0).abs() < 1e-9);
    }

    #[test]
    fn blank_page_has_no_skew() {
        let est = estimate_skew(&RasterImage::filled(200, 200, 250), &PreprocessConfig::default());
        assert_eq!(est.angle_deg, 0.0);
        assert!(est.confidence < 0.1);
    }
}
