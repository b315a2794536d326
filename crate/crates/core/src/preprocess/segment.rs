//! Content-region detection: edge mask, connected components, area filter.

use serde::{Deserialize, Serialize};

use super::edges::edge_mask;
use super::{PreprocessConfig, PreprocessError};
use crate::raster::RasterImage;

/// Half-open pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }
}

#[derive(Clone, Copy)]
struct Bounds {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

impl Bounds {
    fn point(x: usize, y: usize) -> Self {
        Bounds {
            x0: x,
            y0: y,
            x1: x + 1,
            y1: y + 1,
        }
    }

    fn merge(&mut self, o: &Bounds) {
        self.x0 = self.x0.min(o.x0);
        self.y0 = self.y0.min(o.y0);
        self.x1 = self.x1.max(o.x1);
        self.y1 = self.y1.max(o.y1);
    }

    fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        parent[i as usize] = parent[parent[i as usize] as usize];
        i = parent[i as usize];
    }
    i
}

/// Separable square dilation of a binary mask.
fn dilate(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    if r == 0 {
        return mask.to_vec();
    }
    let mut horiz = vec![false; mask.len()];
    for y in 0..h {
        let row = &mask[y * w..(y + 1) * w];
        // Running count of set pixels in the window.
        let mut count = row[..r.min(w)].iter().filter(|&&b| b).count();
        for x in 0..w {
            if x + r < w && row[x + r] {
                count += 1;
            }
            if x > r && row[x - r - 1] {
                count -= 1;
            }
            horiz[y * w + x] = count > 0;
        }
    }
    let mut out = vec![false; mask.len()];
    for x in 0..w {
        let mut count = (0..r.min(h)).filter(|&y| horiz[y * w + x]).count();
        for y in 0..h {
            if y + r < h && horiz[(y + r) * w + x] {
                count += 1;
            }
            if y > r && horiz[(y - r - 1) * w + x] {
                count -= 1;
            }
            out[y * w + x] = count > 0;
        }
    }
    out
}

/// Bounding box of the page content.
///
/// Edges (Sobel + Otsu) are grouped into 8-connected components after a
/// small dilation that merges glyphs, words and neighbouring lines. Each
/// component's extent is the bounding box of its original edge pixels; those
/// whose extent covers at least `min_component_area_frac` of the page are
/// unioned, padded by `crop_margin_px` and clamped to the image.
pub fn detect_content_region(img: &RasterImage, cfg: &PreprocessConfig) -> Result<Rect, PreprocessError> {
    let (w, h) = (img.width(), img.height());
    let mask = edge_mask(img);
    if !mask.iter().any(|&b| b) {
        return Err(PreprocessError::NoContent);
    }
    // About 1% of the short side: enough to bridge word gaps and the leading
    // between body text lines, small enough to keep isolated specks apart.
    let merge_radius = (w.min(h) / 100).max(1);
    let grown = dilate(&mask, w, h, merge_radius);

    // Two-pass union-find labelling over the dilated mask.
    let mut label = vec![u32::MAX; w * h];
    let mut parent: Vec<u32> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !grown[i] {
                continue;
            }
            let mut neighbours = [u32::MAX; 4];
            if x > 0 {
                neighbours[0] = label[i - 1];
            }
            if y > 0 {
                neighbours[1] = label[i - w];
                if x > 0 {
                    neighbours[2] = label[i - w - 1];
                }
                if x + 1 < w {
                    neighbours[3] = label[i - w + 1];
                }
            }
            let mut root = u32::MAX;
            for n in neighbours.into_iter().filter(|&n| n != u32::MAX) {
                let r = find(&mut parent, n);
                if root == u32::MAX {
                    root = r;
                } else if r != root {
                    let (lo, hi) = (root.min(r), root.max(r));
                    parent[hi as usize] = lo;
                    root = lo;
                }
            }
            if root == u32::MAX {
                root = parent.len() as u32;
                parent.push(root);
            }
            label[i] = root;
        }
    }

    let mut bounds: Vec<Option<Bounds>> = vec![None; parent.len()];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask[i] {
                continue;
            }
            let root = find(&mut parent, label[i]) as usize;
            let p = Bounds::point(x, y);
            match &mut bounds[root] {
                Some(b) => b.merge(&p),
                slot @ None => *slot = Some(p),
            }
        }
    }

    let min_area = cfg.min_component_area_frac * (w * h) as f64;
    let mut union: Option<Bounds> = None;
    for b in bounds.into_iter().flatten() {
        if (b.area() as f64) < min_area {
            continue;
        }
        match &mut union {
            Some(u) => u.merge(&b),
            None => union = Some(b),
        }
    }
    let u = union.ok_or(PreprocessError::NoContent)?;
    let m = cfg.crop_margin_px;
    Ok(Rect {
        x0: u.x0.saturating_sub(m),
        y0: u.y0.saturating_sub(m),
        x1: (u.x1 + m).min(w),
        y1: (u.y1 + m).min(h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_grows_by_radius() {
        let w = 9;
        let mut mask = vec![false; w * w];
        mask[4 * w + 4] = true;
        let d = dilate(&mask, w, w, 2);
        assert_eq!(d.iter().filter(|&&b| b).count(), 25);
        assert!(d[2 * w + 2] && d[6 * w + 6] && !d[w + 4]);
    }

    #[test]
    fn uniform_page_has_no_content() {
        let img = RasterImage::filled(120, 160, 200);
        assert!(matches!(
            detect_content_region(&img, &PreprocessConfig::default()),
            Err(PreprocessError::NoContent)
        ));
    }
}
