mod common;

use common::{add_noise, scanned_page, text_page};
use pagewise_core::preprocess::{
    classify_orientation, correct_geometry, detect_content_region, estimate_skew, preprocess_page,
    preprocess_page_traced, rotate, PreprocessConfig, PreprocessError, MIN_SKEW_CONFIDENCE,
};
use pagewise_core::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> PreprocessConfig {
    PreprocessConfig::default()
}

/// Bounding box of pixels darker than `thresh`, `[x0, y0, x1, y1)`.
fn dark_bbox(img: &RasterImage, thresh: u8) -> [usize; 4] {
    let mut b = [usize::MAX, usize::MAX, 0, 0];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) < thresh {
                b[0] = b[0].min(x);
                b[1] = b[1].min(y);
                b[2] = b[2].max(x + 1);
                b[3] = b[3].max(y + 1);
            }
        }
    }
    b
}

fn assert_box_near(r: pagewise_core::preprocess::Rect, want: [usize; 4], tol: usize) {
    let got = [r.x0, r.y0, r.x1, r.y1];
    for (g, w) in got.iter().zip(want) {
        assert!(g.abs_diff(w) <= tol, "box {got:?} vs oracle {want:?} (tol {tol})");
    }
}

#[test]
fn uniform_page_has_no_content() {
    let img = RasterImage::filled(300, 400, 128);
    assert_eq!(detect_content_region(&img, &cfg()), Err(PreprocessError::NoContent));
}

#[test]
fn single_rectangle_is_located() {
    let mut img = RasterImage::filled(800, 1000, 240);
    for y in 400..500 {
        for x in 300..500 {
            img.set(x, y, 0);
        }
    }
    let c = cfg();
    let r = detect_content_region(&img, &c).unwrap();
    let m = c.crop_margin_px;
    assert_box_near(r, [300 - m, 400 - m, 500 + m, 500 + m], 2);
}

#[test]
fn small_specks_are_ignored() {
    let mut img = RasterImage::filled(800, 1000, 245);
    // Text block in the middle of the page.
    let block = text_page(400, 300, 11);
    for y in 0..300 {
        for x in 0..400 {
            img.set(200 + x, 350 + y, block.get(x, y));
        }
    }
    let oracle = dark_bbox(&img, 128);
    // 3×3 salt specks far from the block.
    for (sx, sy) in [(20, 20), (760, 40), (30, 950), (700, 900), (400, 80)] {
        for y in sy..sy + 3 {
            for x in sx..sx + 3 {
                img.set(x, y, 0);
            }
        }
    }
    let c = cfg();
    let r = detect_content_region(&img, &c).unwrap();
    let m = c.crop_margin_px;
    assert_box_near(r, [oracle[0] - m, oracle[1] - m, oracle[2] + m, oracle[3] + m], 2 + 2);
}

#[test]
fn orientation_of_text_pages() {
    for seed in 0..4 {
        let page = scanned_page(300, 400, seed);
        assert_eq!(classify_orientation(&page), 0);
        for r in [90u32, 180, 270] {
            let turned = rotate(&page, f64::from(r));
            let got = classify_orientation(&turned);
            // Projection variance cannot tell 180° from 0°; it must still
            // separate the side-lying cases.
            if r % 180 == 90 {
                assert_eq!(got % 180, 90, "seed {seed} rotation {r}");
            }
        }
        assert_eq!(classify_orientation(&rotate(&page, 90.0)), 90);
    }
    assert_eq!(classify_orientation(&RasterImage::filled(100, 100, 200)), 0);
}

#[test]
fn skew_of_straight_and_tilted_pages() {
    let page = scanned_page(600, 800, 4);
    let straight = estimate_skew(&page, &cfg());
    assert!(straight.angle_deg.abs() <= 0.1, "{straight:?}");
    assert!(straight.confidence >= MIN_SKEW_CONFIDENCE);
    for angle in [3.0, -3.0, 7.5] {
        let est = estimate_skew(&rotate(&page, angle), &cfg());
        assert!((est.angle_deg - angle).abs() <= 0.2, "angle {angle}: {est:?}");
    }
    let blank = estimate_skew(&RasterImage::filled(300, 300, 250), &cfg());
    assert_eq!(blank.angle_deg, 0.0);
    assert!(blank.confidence < 0.1);
}

#[test]
fn geometry_correction_removes_skew() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..12 {
        let angle: f64 = rng.random_range(-10.0..10.0);
        let page = rotate(&scanned_page(600, 800, 100 + seed), angle);
        let (upright, report) = correct_geometry(&page, &cfg());
        assert!(report.deskewed || angle.abs() < 0.05);
        assert!(
            (report.skew.angle_deg - angle).abs() <= 0.5,
            "seed {seed}: {angle} vs {:?}",
            report.skew
        );
        let residual = estimate_skew(&upright, &cfg());
        if residual.confidence >= MIN_SKEW_CONFIDENCE {
            assert!(residual.angle_deg.abs() <= 0.3, "seed {seed}: residual {residual:?}");
        }
    }
}

#[test]
fn sideways_page_is_turned_upright() {
    let page = rotate(&scanned_page(400, 500, 8), 90.0);
    let (upright, report) = correct_geometry(&page, &cfg());
    assert_eq!(report.rotation_deg, 90);
    assert!(upright.height() > upright.width());
}

#[test]
fn full_chain_reaches_target_size_and_traces_stages() {
    let page = add_noise(&rotate(&text_page(300, 400, 2), 2.0), 8, 3);
    let mut c = cfg();
    c.target_min_dim_px = 500;
    let (out, trace) = preprocess_page_traced(&page, &c);
    assert_eq!(out.width().min(out.height()), 500);
    let names: Vec<_> = trace.stages.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, ["crop", "orientation", "deskew", "rescale", "clahe", "denoise"]);
    assert_eq!(trace.stages.last().unwrap().1, out);
    assert!(trace.report.crop.is_some());
    assert_eq!(preprocess_page(&page, &c), out);
}

#[test]
fn disabled_config_passes_through() {
    let page = text_page(120, 160, 1);
    assert_eq!(preprocess_page(&page, &PreprocessConfig::disabled()), page);
}

#[test]
fn config_round_trips_and_rejects_unknown_keys() {
    let c = cfg();
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<PreprocessConfig>(&json).unwrap(), c);
    let partial: PreprocessConfig = serde_json::from_str(r#"{"denoise_sigma": 1.5}"#).unwrap();
    assert_eq!(partial.denoise_sigma, 1.5);
    assert_eq!(partial.target_min_dim_px, 1600);
    assert!(serde_json::from_str::<PreprocessConfig>(r#"{"sigma": 1.5}"#).is_err());
}
