//! Separable Gaussian smoothing.

use std::ops::{AddAssign, Mul};

use crate::raster::{to_pixel_f32, RasterImage};

/// Sampled 1-D Gaussian with radius `ceil(3σ)`, normalized to sum 1.
/// `σ = 0` yields the identity kernel `[1.0]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let r = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Half-sample symmetric reflection: `-1 -> 0`, `n -> n-1`.
#[inline]
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable Gaussian convolution of a float field with reflect padding.
pub fn gaussian_blur_f64(data: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return data.to_vec();
    }
    let mut out = vec![0f64; w * h];
    separable(data, w, h, &k, |y, row| out[y * w..(y + 1) * w].copy_from_slice(row));
    out
}

/// Separable convolution; `emit(y, row)` receives each finished output row.
fn separable<T>(data: &[T], w: usize, h: usize, k: &[T], mut emit: impl FnMut(usize, &[T]))
where
    T: Copy + Default + AddAssign + Mul<Output = T>,
{
    let r = (k.len() / 2) as i64;

    // Horizontal: pad each row once, then accumulate tap by tap over
    // contiguous slices.
    let mut mid = vec![T::default(); w * h];
    let mut padded = vec![T::default(); w + 2 * r as usize];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        for (i, p) in padded.iter_mut().enumerate() {
            *p = row[reflect(i as i64 - r, w)];
        }
        let dst = &mut mid[y * w..(y + 1) * w];
        for (t, &kv) in k.iter().enumerate() {
            for (d, &v) in dst.iter_mut().zip(&padded[t..t + w]) {
                *d += kv * v;
            }
        }
    }

    // Vertical: accumulate whole source rows into one output row at a time.
    let mut acc = vec![T::default(); w];
    for y in 0..h {
        acc.iter_mut().for_each(|a| *a = T::default());
        for (t, &kv) in k.iter().enumerate() {
            let sy = reflect(y as i64 + t as i64 - r, h);
            for (d, &s) in acc.iter_mut().zip(&mid[sy * w..(sy + 1) * w]) {
                *d += kv * s;
            }
        }
        emit(y, &acc);
    }
}

/// Gaussian denoising of a grayscale image. `σ = 0` returns the input.
pub fn gaussian_denoise(img: &RasterImage, sigma: f64) -> RasterImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let gray = img.to_gray();
    let (w, h) = (gray.width(), gray.height());
    let k: Vec<f32> = gaussian_kernel(sigma).into_iter().map(|v| v as f32).collect();
    let data: Vec<f32> = gray.pixels().iter().map(|&p| f32::from(p)).collect();
    let mut out = vec![0u8; w * h];
    separable(&data, w, h, &k, |y, row| {
        for (o, &v) in out[y * w..(y + 1) * w].iter_mut().zip(row) {
            *o = to_pixel_f32(v);
        }
    });
    RasterImage::new(w, h, 1, out).expect("consistent buffer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_radius_and_symmetry() {
        let k = gaussian_kernel(0.8);
        assert_eq!(k.len(), 7);
        for i in 0..3 {
            assert_eq!(k[i], k[6 - i]);
        }
        assert!(k[3] > k[2]);
    }

    #[test]
    fn reflect_indices() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(3, 5), 3);
        assert_eq!(reflect(-3, 1), 0);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let img = RasterImage::from_fn(9, 4, |x, y| (x * 30 + y) as u8);
        assert_eq!(gaussian_denoise(&img, 0.0), img);
    }
}
