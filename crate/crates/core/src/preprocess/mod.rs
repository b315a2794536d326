//! Page image cleanup: content cropping, orientation and skew correction,
//! bicubic re-normalization, CLAHE and Gaussian denoising.
//!
//! Every kernel is a pure function over [`RasterImage`] buffers, so pages can
//! be processed concurrently without coordination.

mod clahe;
mod denoise;
mod edges;
mod geometry;
mod orientation;
mod segment;
mod skew;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::RasterImage;

pub use clahe::clahe;
pub use denoise::{gaussian_blur_f64, gaussian_denoise, gaussian_kernel};
pub use edges::{edge_mask, gray_histogram, ink_mask, otsu_threshold, sobel_magnitude};
pub use geometry::{catmull_rom, rescale_bicubic, resize_bicubic, rotate};
pub use orientation::{classify_orientation, orientation_scores};
pub use segment::{detect_content_region, Rect};
pub use skew::{estimate_skew, estimate_skew_with, SkewEstimate};

/// Skew is corrected only when the Hough peak is this distinct.
pub const MIN_SKEW_CONFIDENCE: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("no connected component passes the area filter")]
    NoContent,
    #[error("invalid preprocess config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub enabled: bool,
    pub min_component_area_frac: f64,
    pub crop_margin_px: usize,
    pub skew_range_deg: f64,
    pub skew_step_deg: f64,
    pub clahe_clip_limit: f64,
    /// Tile grid as `[columns, rows]`.
    pub clahe_tiles: [usize; 2],
    pub denoise_sigma: f64,
    pub target_min_dim_px: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            enabled: true,
            min_component_area_frac: 0.005,
            crop_margin_px: 8,
            skew_range_deg: 15.0,
            skew_step_deg: 0.1,
            clahe_clip_limit: 2.0,
            clahe_tiles: [8, 8],
            denoise_sigma: 0.8,
            target_min_dim_px: 1600,
        }
    }
}

impl PreprocessConfig {
    pub fn disabled() -> Self {
        PreprocessConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        let positive = [
            ("min_component_area_frac", self.min_component_area_frac),
            ("crop_margin_px", self.crop_margin_px as f64),
            ("skew_range_deg", self.skew_range_deg),
            ("skew_step_deg", self.skew_step_deg),
            ("clahe_clip_limit", self.clahe_clip_limit),
            ("clahe_tiles[0]", self.clahe_tiles[0] as f64),
            ("clahe_tiles[1]", self.clahe_tiles[1] as f64),
            ("denoise_sigma", self.denoise_sigma),
            ("target_min_dim_px", self.target_min_dim_px as f64),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PreprocessError::InvalidConfig(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.min_component_area_frac > 1.0 {
            return Err(PreprocessError::InvalidConfig(
                "min_component_area_frac must be ≤ 1".into(),
            ));
        }
        if self.skew_step_deg > self.skew_range_deg {
            return Err(PreprocessError::InvalidConfig(
                "skew_step_deg exceeds skew_range_deg".into(),
            ));
        }
        Ok(())
    }
}

/// What the geometric stages decided for one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    /// `None` when no content region was found and the full page was kept.
    pub crop: Option<Rect>,
    pub rotation_deg: u32,
    pub skew: SkewEstimate,
    pub deskewed: bool,
}

/// Stage-by-stage images, kept for debug dumps.
#[derive(Debug, Clone)]
pub struct PreprocessTrace {
    pub report: PreprocessReport,
    pub stages: Vec<(&'static str, RasterImage)>,
}

/// Runs the full cleanup chain: crop, orientation, deskew, bicubic rescale,
/// CLAHE, denoise. A disabled config returns the input unchanged.
pub fn preprocess_page(img: &RasterImage, cfg: &PreprocessConfig) -> RasterImage {
    run(img, cfg, false).0
}

/// Like [`preprocess_page`], also returning the decisions taken and every
/// intermediate stage image.
pub fn preprocess_page_traced(img: &RasterImage, cfg: &PreprocessConfig) -> (RasterImage, PreprocessTrace) {
    let (out, trace) = run(img, cfg, true);
    (out, trace.expect("trace requested"))
}

/// Geometric stages only: crop, orientation and deskew. Returns the corrected
/// page at its input resolution with the decisions taken.
pub fn correct_geometry(img: &RasterImage, cfg: &PreprocessConfig) -> (RasterImage, PreprocessReport) {
    geometry(img, cfg, None)
}

fn geometry(
    img: &RasterImage,
    cfg: &PreprocessConfig,
    mut stages: Option<&mut Vec<(&'static str, RasterImage)>>,
) -> (RasterImage, PreprocessReport) {
    let mut report = PreprocessReport {
        crop: None,
        rotation_deg: 0,
        skew: SkewEstimate::NONE,
        deskewed: false,
    };
    let mut record = |name: &'static str, im: &RasterImage| {
        if let Some(st) = stages.as_deref_mut() {
            st.push((name, im.clone()));
        }
    };

    let gray = img.to_gray();
    let cropped = match detect_content_region(&gray, cfg) {
        Ok(r) => {
            report.crop = Some(r);
            gray.crop(r.x0, r.y0, r.x1, r.y1)
        }
        Err(_) => gray,
    };
    record("crop", &cropped);

    report.rotation_deg = classify_orientation(&cropped);
    let upright = rotate(&cropped, -f64::from(report.rotation_deg));
    record("orientation", &upright);

    report.skew = estimate_skew(&upright, cfg);
    let deskewed = if report.skew.confidence >= MIN_SKEW_CONFIDENCE && report.skew.angle_deg != 0.0 {
        report.deskewed = true;
        rotate(&upright, -report.skew.angle_deg)
    } else {
        upright
    };
    record("deskew", &deskewed);
    (deskewed, report)
}

fn run(img: &RasterImage, cfg: &PreprocessConfig, keep: bool) -> (RasterImage, Option<PreprocessTrace>) {
    if !cfg.enabled {
        let trace = keep.then(|| PreprocessTrace {
            report: PreprocessReport {
                crop: None,
                rotation_deg: 0,
                skew: SkewEstimate::NONE,
                deskewed: false,
            },
            stages: Vec::new(),
        });
        return (img.clone(), trace);
    }
    let mut stages = Vec::new();
    let (deskewed, report) = geometry(img, cfg, keep.then_some(&mut stages));

    let scaled = rescale_bicubic(&deskewed, cfg.target_min_dim_px);
    let contrast = clahe(&scaled, cfg.clahe_clip_limit, cfg.clahe_tiles[0], cfg.clahe_tiles[1]);
    let out = gaussian_denoise(&contrast, cfg.denoise_sigma);
    if keep {
        stages.push(("rescale", scaled));
        stages.push(("clahe", contrast));
        stages.push(("denoise", out.clone()));
    }
    (out, keep.then_some(PreprocessTrace { report, stages }))
}
