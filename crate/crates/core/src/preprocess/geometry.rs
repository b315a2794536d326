//! Rotation and bicubic rescaling.

use crate::raster::{to_pixel, to_pixel_f32, RasterImage};

/// Per-channel median of the pixels on the image border.
fn median_border(img: &RasterImage) -> Vec<u8> {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let px = img.pixels();
    let mut per_channel: Vec<Vec<u8>> = vec![Vec::with_capacity(2 * (w + h)); c];
    let mut push = |x: usize, y: usize| {
        for (ch, vals) in per_channel.iter_mut().enumerate() {
            vals.push(px[(y * w + x) * c + ch]);
        }
    };
    for x in 0..w {
        push(x, 0);
        if h > 1 {
            push(x, h - 1);
        }
    }
    for y in 1..h.saturating_sub(1) {
        push(0, y);
        if w > 1 {
            push(w - 1, y);
        }
    }
    per_channel
        .into_iter()
        .map(|mut v| {
            v.sort_unstable();
            v[v.len() / 2]
        })
        .collect()
}

/// Exact quarter-turn rotation, clockwise by `quarters × 90°`.
fn rotate_quarters(img: &RasterImage, quarters: u32) -> RasterImage {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let src = img.pixels();
    let (ow, oh) = if quarters % 2 == 1 { (h, w) } else { (w, h) };
    let mut out = vec![0u8; src.len()];
    for oy in 0..oh {
        for ox in 0..ow {
            let (sx, sy) = match quarters % 4 {
                0 => (ox, oy),
                1 => (oy, h - 1 - ox),
                2 => (w - 1 - ox, h - 1 - oy),
                _ => (w - 1 - oy, ox),
            };
            let (si, oi) = ((sy * w + sx) * c, (oy * ow + ox) * c);
            out[oi..oi + c].copy_from_slice(&src[si..si + c]);
        }
    }
    RasterImage::new(ow, oh, c, out).expect("dimensions preserved")
}

/// Smallest size ≥ `extent` with the same parity as `src`, so that the source
/// and output centers fall on the same pixel grid.
fn frame_len(extent: f64, src: usize) -> usize {
    let mut n = (extent - 1e-6).ceil().max(1.0) as usize;
    if n % 2 != src % 2 {
        n += 1;
    }
    n
}

/// Rotates clockwise by `angle_deg` (image coordinates, y down) about the
/// image center.
///
/// Multiples of 90° are exact pixel permutations. Other angles inverse-map
/// every output pixel into the source with Catmull-Rom bicubic interpolation;
/// the output frame encloses the whole rotated source, keeps the parity of the
/// source dimensions, and uncovered pixels take the median border value.
pub fn rotate(img: &RasterImage, angle_deg: f64) -> RasterImage {
    let turns = angle_deg / 90.0;
    if (turns - turns.round()).abs() < 1e-12 {
        let q = (turns.round() as i64).rem_euclid(4) as u32;
        return if q == 0 { img.clone() } else { rotate_quarters(img, q) };
    }

    let (w, h, c) = (img.width(), img.height(), img.channels());
    let (s, co) = angle_deg.to_radians().sin_cos();
    let ow = frame_len((w as f64) * co.abs() + (h as f64) * s.abs(), w);
    let oh = frame_len((w as f64) * s.abs() + (h as f64) * co.abs(), h);
    let (scx, scy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (ocx, ocy) = ((ow as f64 - 1.0) / 2.0, (oh as f64 - 1.0) / 2.0);
    let fill = median_border(img);
    let src = img.pixels();
    let mut out = vec![0u8; ow * oh * c];

    for oy in 0..oh {
        let dy = oy as f64 - ocy;
        for ox in 0..ow {
            let dx = ox as f64 - ocx;
            // Inverse of the clockwise rotation.
            let sx = dx * co + dy * s + scx;
            let sy = -dx * s + dy * co + scy;
            let oi = (oy * ow + ox) * c;
            if sx < -1e-9 || sy < -1e-9 || sx > w as f64 - 1.0 + 1e-9 || sy > h as f64 - 1.0 + 1e-9 {
                out[oi..oi + c].copy_from_slice(&fill);
                continue;
            }
            let (bx, by) = (sx.floor() as i64, sy.floor() as i64);
            let mut wx = [0f64; 4];
            let mut wy = [0f64; 4];
            for k in 0..4 {
                wx[k] = catmull_rom(sx - (bx - 1 + k as i64) as f64);
                wy[k] = catmull_rom(sy - (by - 1 + k as i64) as f64);
            }
            let interior = bx >= 1 && by >= 1 && bx + 2 < w as i64 && by + 2 < h as i64;
            if interior && c == 1 {
                // All taps in range: index the 4×4 block directly.
                let base = (by as usize - 1) * w + bx as usize - 1;
                let mut v = 0.0;
                for (j, wyj) in wy.iter().enumerate() {
                    let r = &src[base + j * w..base + j * w + 4];
                    v += wyj
                        * (wx[0] * f64::from(r[0])
                            + wx[1] * f64::from(r[1])
                            + wx[2] * f64::from(r[2])
                            + wx[3] * f64::from(r[3]));
                }
                out[oi] = to_pixel(v);
                continue;
            }
            let mut xi = [0usize; 4];
            let mut yi = [0usize; 4];
            for k in 0..4 {
                xi[k] = (bx - 1 + k as i64).clamp(0, w as i64 - 1) as usize;
                yi[k] = (by - 1 + k as i64).clamp(0, h as i64 - 1) as usize;
            }
            for ch in 0..c {
                let mut v = 0.0;
                for (j, &yy) in yi.iter().enumerate() {
                    let row: f64 = (0..4).map(|k| wx[k] * f64::from(src[(yy * w + xi[k]) * c + ch])).sum();
                    v += wy[j] * row;
                }
                out[oi + ch] = to_pixel(v);
            }
        }
    }
    RasterImage::new(ow, oh, c, out).expect("consistent buffer")
}

/// Catmull-Rom cubic convolution kernel (a = -0.5).
pub fn catmull_rom(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t * t * t - (A + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        A * t * t * t - 5.0 * A * t * t + 8.0 * A * t - 4.0 * A
    } else {
        0.0
    }
}

/// Tap indices and weights for resampling `src_len` samples to `dst_len`.
fn taps(src_len: usize, dst_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = dst_len as f64 / src_len as f64;
    (0..dst_len)
        .map(|d| {
            let s = (d as f64 + 0.5) / scale - 0.5;
            let base = s.floor();
            let mut idx = [0usize; 4];
            let mut wts = [0f64; 4];
            for k in 0..4 {
                let pos = base as i64 - 1 + k as i64;
                idx[k] = pos.clamp(0, src_len as i64 - 1) as usize;
                wts[k] = catmull_rom(s - pos as f64);
            }
            (idx, wts)
        })
        .collect()
}

/// Upscales so that `min(width, height)` reaches `target_min_dim_px`, using
/// separable Catmull-Rom bicubic interpolation with clamped edges. Images
/// already large enough are returned unchanged.
pub fn rescale_bicubic(img: &RasterImage, target_min_dim_px: usize) -> RasterImage {
    let (w, h) = (img.width(), img.height());
    let min_dim = w.min(h);
    if min_dim >= target_min_dim_px {
        return img.clone();
    }
    let factor = target_min_dim_px as f64 / min_dim as f64;
    let (ow, oh) = if w <= h {
        (target_min_dim_px, ((h as f64) * factor).round() as usize)
    } else {
        (((w as f64) * factor).round() as usize, target_min_dim_px)
    };
    resize_bicubic(img, ow, oh)
}

/// Separable Catmull-Rom resize to an explicit size.
pub fn resize_bicubic(img: &RasterImage, ow: usize, oh: usize) -> RasterImage {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let src = img.pixels();
    let xt = taps(w, ow);
    let yt = taps(h, oh);

    let mut mid = vec![0f32; ow * h * c];
    for y in 0..h {
        for (ox, (idx, wts)) in xt.iter().enumerate() {
            for ch in 0..c {
                let v: f64 = (0..4).map(|k| wts[k] * f64::from(src[(y * w + idx[k]) * c + ch])).sum();
                mid[(y * ow + ox) * c + ch] = v as f32;
            }
        }
    }
    let stride = ow * c;
    let mut out = vec![0u8; ow * oh * c];
    let mut acc = vec![0f32; stride];
    for (oy, (idx, wts)) in yt.iter().enumerate() {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for k in 0..4 {
            let wk = wts[k] as f32;
            for (a, m) in acc.iter_mut().zip(&mid[idx[k] * stride..(idx[k] + 1) * stride]) {
                *a += wk * m;
            }
        }
        for (o, a) in out[oy * stride..(oy + 1) * stride].iter_mut().zip(&acc) {
            *o = to_pixel_f32(*a);
        }
    }
    RasterImage::new(ow, oh, c, out).expect("consistent buffer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catmull_rom_partition_of_unity() {
        for i in 0..=100 {
            let f = i as f64 / 100.0;
            let sum: f64 = (-1..=2).map(|k| catmull_rom(f - k as f64)).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert_eq!(catmull_rom(0.0), 1.0);
        assert_eq!(catmull_rom(1.0), 0.0);
        assert_eq!(catmull_rom(2.0), 0.0);
    }

    #[test]
    fn zero_rotation_is_identity() {
        let img = RasterImage::from_fn(31, 17, |x, y| (x * 7 + y * 13) as u8);
        assert_eq!(rotate(&img, 0.0), img);
    }

    #[test]
    fn quarter_turn_is_exact_permutation() {
        let (w, h) = (5, 3);
        let img = RasterImage::from_fn(w, h, |x, y| (10 * y + x) as u8);
        let r = rotate(&img, 90.0);
        assert_eq!((r.width(), r.height()), (h, w));
        for y in 0..h {
            for x in 0..w {
                // Clockwise: source (x, y) lands at (h - 1 - y, x).
                assert_eq!(r.get(h - 1 - y, x), img.get(x, y));
            }
        }
        assert_eq!(rotate(&rotate(&img, 90.0), -90.0), img);
        assert_eq!(rotate(&img, 360.0), img);
    }

    #[test]
    fn rotated_frame_encloses_source() {
        let img = RasterImage::filled(100, 50, 9);
        let r = rotate(&img, 30.0);
        let (s, c) = 30f64.to_radians().sin_cos();
        assert!(r.width() >= (100.0 * c + 50.0 * s - 1e-6_f64).ceil() as usize);
        assert!(r.height() >= (100.0 * s + 50.0 * c - 1e-6_f64).ceil() as usize);
        assert_eq!((r.width() % 2, r.height() % 2), (0, 0));
        // Uniform source: the fill value equals the content.
        assert!(r.pixels().iter().all(|&p| p == 9));
    }

    #[test]
    fn no_upscale_when_large_enough() {
        let img = RasterImage::from_fn(40, 60, |x, y| (x + y) as u8);
        assert_eq!(rescale_bicubic(&img, 40), img);
    }

    #[test]
    fn upscale_reaches_target_min_dim() {
        let img = RasterImage::filled(30, 45, 77);
        let out = rescale_bicubic(&img, 60);
        assert_eq!((out.width(), out.height()), (60, 90));
        assert!(out.pixels().iter().all(|&p| p == 77));
    }
}
