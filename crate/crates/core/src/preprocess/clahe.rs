//! Contrast Limited Adaptive Histogram Equalization.

use crate::raster::{to_pixel, RasterImage};

/// Mapping for one tile: clipped, redistributed histogram -> CDF lookup.
///
/// A tile holding a single gray level maps through the identity, which keeps
/// flat regions (blank margins, constant images) unchanged.
fn tile_lut(hist: &[u32; 256], pixels: u32, clip_limit: f64) -> [u8; 256] {
    let occupied = hist.iter().filter(|&&c| c > 0).count();
    let mut lut = [0u8; 256];
    if occupied <= 1 {
        for (v, slot) in lut.iter_mut().enumerate() {
            *slot = v as u8;
        }
        return lut;
    }

    let limit = (clip_limit * f64::from(pixels) / 256.0).max(1.0);
    let mut clipped = [0f64; 256];
    let mut excess = 0f64;
    for (c, &h) in clipped.iter_mut().zip(hist) {
        let h = f64::from(h);
        if h > limit {
            excess += h - limit;
            *c = limit;
        } else {
            *c = h;
        }
    }
    let share = excess / 256.0;
    let mut cdf = 0f64;
    for (v, c) in clipped.iter().enumerate() {
        cdf += c + share;
        lut[v] = to_pixel(255.0 * cdf / f64::from(pixels));
    }
    lut
}

/// CLAHE on the luma channel with a `tiles_x × tiles_y` grid.
///
/// Each tile's histogram is clipped at `clip_limit × tile_pixels / 256`, the
/// clipped excess spread uniformly over all bins, and the resulting CDF used
/// as the tile mapping. Every output pixel blends the mappings of the four
/// nearest tile centers bilinearly (edge tiles extend to the border).
pub fn clahe(img: &RasterImage, clip_limit: f64, tiles_x: usize, tiles_y: usize) -> RasterImage {
    let gray = img.to_gray();
    let (w, h) = (gray.width(), gray.height());
    let tx = tiles_x.clamp(1, w);
    let ty = tiles_y.clamp(1, h);
    let px = gray.pixels();

    let x_edges: Vec<usize> = (0..=tx).map(|i| i * w / tx).collect();
    let y_edges: Vec<usize> = (0..=ty).map(|j| j * h / ty).collect();

    let mut luts = vec![[0u8; 256]; tx * ty];
    for j in 0..ty {
        for i in 0..tx {
            let mut hist = [0u32; 256];
            for y in y_edges[j]..y_edges[j + 1] {
                for &p in &px[y * w + x_edges[i]..y * w + x_edges[i + 1]] {
                    hist[p as usize] += 1;
                }
            }
            let n = ((x_edges[i + 1] - x_edges[i]) * (y_edges[j + 1] - y_edges[j])) as u32;
            luts[j * tx + i] = tile_lut(&hist, n, clip_limit);
        }
    }

    let centers =
        |edges: &[usize]| -> Vec<f64> { edges.windows(2).map(|e| (e[0] + e[1]) as f64 / 2.0 - 0.5).collect() };
    let cx = centers(&x_edges);
    let cy = centers(&y_edges);

    // For a coordinate, the pair of neighbouring tile indices and the weight
    // of the second one.
    let neighbours = |c: &[f64], pos: f64| -> (usize, usize, f64) {
        if pos <= c[0] {
            return (0, 0, 0.0);
        }
        let last = c.len() - 1;
        if pos >= c[last] {
            return (last, last, 0.0);
        }
        let k = c.partition_point(|&v| v <= pos) - 1;
        let t = (pos - c[k]) / (c[k + 1] - c[k]);
        (k, k + 1, t)
    };
    let xn: Vec<_> = (0..w).map(|x| neighbours(&cx, x as f64)).collect();

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let (j0, j1, fy) = neighbours(&cy, y as f64);
        for x in 0..w {
            let (i0, i1, fx) = xn[x];
            let v = px[y * w + x] as usize;
            let m = |i: usize, j: usize| f64::from(luts[j * tx + i][v]);
            let top = m(i0, j0) * (1.0 - fx) + m(i1, j0) * fx;
            let bottom = m(i0, j1) * (1.0 - fx) + m(i1, j1) * fx;
            out[y * w + x] = to_pixel(top * (1.0 - fy) + bottom * fy);
        }
    }
    RasterImage::new(w, h, 1, out).expect("consistent buffer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_fixed_point() {
        for v in [0u8, 17, 128, 255] {
            let img = RasterImage::filled(64, 48, v);
            assert_eq!(clahe(&img, 2.0, 8, 8), img);
        }
    }

    #[test]
    fn clip_redistribution_conserves_mass() {
        let mut hist = [0u32; 256];
        hist[10] = 900;
        hist[200] = 100;
        let lut = tile_lut(&hist, 1000, 2.0);
        assert_eq!(lut[255], 255);
        // Clipping flattens the jump at the dominant bin.
        assert!(lut[10] < 230);
    }
}
