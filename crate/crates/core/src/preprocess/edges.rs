//! Sobel gradients and Otsu thresholding.

use crate::raster::RasterImage;

/// Sobel gradient magnitude of a grayscale image, replicate-padded.
pub fn sobel_magnitude(img: &RasterImage) -> Vec<f32> {
    let gray = img.to_gray();
    let (w, h) = (gray.width(), gray.height());
    let px = gray.pixels();
    let at = |x: isize, y: isize| -> f32 {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        f32::from(px[yc * w + xc])
    };
    let mut out = vec![0f32; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (tl, tc, tr) = (at(x - 1, y - 1), at(x, y - 1), at(x + 1, y - 1));
            let (ml, mr) = (at(x - 1, y), at(x + 1, y));
            let (bl, bc, br) = (at(x - 1, y + 1), at(x, y + 1), at(x + 1, y + 1));
            let gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            let gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            out[y as usize * w + x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Otsu's threshold over a 256-bin histogram. Returns the bin `t` maximizing
/// between-class variance when classes are `[0, t]` and `(t, 255]`, or `None`
/// when the histogram has a single occupied bin.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<usize> {
    let total: u64 = hist.iter().sum();
    if total == 0 || hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0f64, 0f64);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (t, &c) in hist.iter().enumerate().take(255) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total_f - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best.0 {
            best = (between, t);
        }
    }
    Some(best.1)
}

pub fn gray_histogram(img: &RasterImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in img.to_gray().pixels() {
        hist[p as usize] += 1;
    }
    hist
}

/// Binary edge mask: Sobel magnitude above its Otsu threshold. Magnitudes are
/// quantized to 256 bins over `[0, max]`. All-false for flat images.
pub fn edge_mask(img: &RasterImage) -> Vec<bool> {
    let mag = sobel_magnitude(img);
    let max = mag.iter().copied().fold(0f32, f32::max);
    if max <= 0.0 {
        return vec![false; mag.len()];
    }
    let scale = 255.0 / max;
    let bins: Vec<u8> = mag.iter().map(|&m| (m * scale).round().min(255.0) as u8).collect();
    let mut hist = [0u64; 256];
    for &b in &bins {
        hist[b as usize] += 1;
    }
    match otsu_threshold(&hist) {
        Some(t) => bins.iter().map(|&b| b as usize > t).collect(),
        None => bins.iter().map(|&b| b > 0).collect(),
    }
}

/// Dark-ink mask via Otsu on intensities. All-false for flat images.
pub fn ink_mask(img: &RasterImage) -> Vec<bool> {
    let gray = img.to_gray();
    match otsu_threshold(&gray_histogram(&gray)) {
        Some(t) => gray.pixels().iter().map(|&p| (p as usize) <= t).collect(),
        None => vec![false; gray.pixels().len()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn otsu_splits_bimodal_histogram() {
        let mut hist = [0u64; 256];
        hist[40] = 100;
        hist[200] = 300;
        let t = otsu_threshold(&hist).unwrap();
        assert!((40..200).contains(&t));
    }

    #[test]
    fn otsu_degenerate() {
        let mut hist = [0u64; 256];
        hist[7] = 10;
        assert_eq!(otsu_threshold(&hist), None);
        assert_eq!(otsu_threshold(&[0; 256]), None);
    }

    #[test]
    fn flat_image_has_no_edges() {
        let img = RasterImage::filled(20, 20, 128);
        assert!(edge_mask(&img).iter().all(|e| !e));
        assert!(ink_mask(&img).iter().all(|e| !e));
    }

    #[test]
    fn step_edge_is_detected() {
        let img = RasterImage::from_fn(20, 10, |x, _| if x < 10 { 0 } else { 255 });
        let mask = edge_mask(&img);
        assert!(mask[5 * 20 + 9] && mask[5 * 20 + 10]);
        assert!(!mask[5 * 20 + 2]);
    }
}
