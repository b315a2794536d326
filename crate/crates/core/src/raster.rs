//! Row-major 8-bit raster buffers and PNG I/O.

use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("buffer length {len} does not match {width}x{height}x{channels}")]
    BadBuffer {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("unsupported channel count {0}; expected 1 or 3")]
    Channels(usize),
    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
}

/// Grayscale (1 channel) or RGB (3 channel) 8-bit image.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

/// Rounds half up and saturates to a pixel value. For non-negative input this
/// equals `round().clamp(0, 255)` without the libm call.
#[inline]
pub(crate) fn to_pixel(v: f64) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5) as u8
}

#[inline]
pub(crate) fn to_pixel_f32(v: f32) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5) as u8
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(RasterError::Channels(channels));
        }
        if pixels.len() != width * height * channels {
            return Err(RasterError::BadBuffer {
                width,
                height,
                channels,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Grayscale image filled with `value`.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            channels: 1,
            pixels: vec![value; width * height],
        }
    }

    /// Grayscale image from a per-pixel function.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut img = Self::filled(width, height, 0);
        for y in 0..height {
            for x in 0..width {
                img.pixels[y * width + x] = f(x, y);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn is_gray(&self) -> bool {
        self.channels == 1
    }

    /// Gray value at (x, y). Only meaningful on grayscale images.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(self.is_gray());
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(self.is_gray());
        self.pixels[y * self.width + x] = v;
    }

    /// Luma conversion (ITU-R BT.601 weights). Grayscale input is cloned.
    pub fn to_gray(&self) -> RasterImage {
        if self.is_gray() {
            return self.clone();
        }
        let pixels = self
            .pixels
            .chunks_exact(3)
            .map(|p| {
                let l = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
                to_pixel(l)
            })
            .collect();
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            pixels,
        }
    }

    /// Sub-image `[x0, x1) × [y0, y1)`, clamped to the image bounds.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> RasterImage {
        let x1 = x1.min(self.width).max(x0 + 1).min(self.width);
        let y1 = y1.min(self.height).max(y0 + 1).min(self.height);
        let x0 = x0.min(x1 - 1);
        let y0 = y0.min(y1 - 1);
        let (w, h, c) = (x1 - x0, y1 - y0, self.channels);
        let mut pixels = Vec::with_capacity(w * h * c);
        for y in y0..y1 {
            let start = (y * self.width + x0) * c;
            pixels.extend_from_slice(&self.pixels[start..start + w * c]);
        }
        RasterImage {
            width: w,
            height: h,
            channels: c,
            pixels,
        }
    }

    /// Box-filter downsample by an integer factor (grayscale).
    pub fn downsample(&self, factor: usize) -> RasterImage {
        let gray = self.to_gray();
        if factor <= 1 {
            return gray;
        }
        let w = (gray.width / factor).max(1);
        let h = (gray.height / factor).max(1);
        RasterImage::from_fn(w, h, |x, y| {
            let mut sum = 0u32;
            let mut n = 0u32;
            for yy in y * factor..((y + 1) * factor).min(gray.height) {
                for xx in x * factor..((x + 1) * factor).min(gray.width) {
                    sum += u32::from(gray.get(xx, yy));
                    n += 1;
                }
            }
            ((sum + n / 2) / n) as u8
        })
    }

    pub fn load_png(path: &Path) -> Result<RasterImage, RasterError> {
        let img = image::open(path)?;
        Self::from_dynamic(img)
    }

    pub fn decode(bytes: &[u8]) -> Result<RasterImage, RasterError> {
        Self::from_dynamic(image::load_from_memory(bytes)?)
    }

    fn from_dynamic(img: image::DynamicImage) -> Result<RasterImage, RasterError> {
        use image::ColorType;
        match img.color() {
            ColorType::L8 => {
                let buf = img.into_luma8();
                let (w, h) = buf.dimensions();
                RasterImage::new(w as usize, h as usize, 1, buf.into_raw())
            }
            ColorType::La8 | ColorType::L16 | ColorType::La16 => {
                let buf = img.into_luma8();
                let (w, h) = buf.dimensions();
                RasterImage::new(w as usize, h as usize, 1, buf.into_raw())
            }
            _ => {
                let buf = img.into_rgb8();
                let (w, h) = buf.dimensions();
                RasterImage::new(w as usize, h as usize, 3, buf.into_raw())
            }
        }
    }

    /// PNG bytes, fast compression.
    pub fn encode_png(&self) -> Result<Vec<u8>, RasterError> {
        let mut out = Vec::new();
        let color = if self.is_gray() {
            ExtendedColorType::L8
        } else {
            ExtendedColorType::Rgb8
        };
        PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Sub).write_image(
            &self.pixels,
            self.width as u32,
            self.height as u32,
            color,
        )?;
        Ok(out)
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| RasterError::Codec(image::ImageError::IoError(e)))
    }
}
