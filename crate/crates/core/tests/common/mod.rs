#![allow(dead_code)]

use pagewise_core::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// White page with dark word blocks laid out in text lines.
pub fn text_page(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = RasterImage::filled(w, h, 245);
    let margin = w / 10;
    let mut y = h / 10;
    while y + 12 < h - h / 10 {
        let mut x = margin;
        let line_end = w - margin - rng.random_range(0..w / 4);
        while x < line_end {
            let word = rng.random_range(15..60).min(line_end - x);
            for yy in y..y + 10 {
                for xx in x..x + word {
                    img.set(xx, yy, 30);
                }
            }
            x += word + rng.random_range(6..12);
        }
        y += 24;
    }
    img
}

/// Adds uniform noise of amplitude `amp` to every pixel.
pub fn add_noise(img: &RasterImage, amp: i32, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px: Vec<u8> = img
        .pixels()
        .iter()
        .map(|&p| (i32::from(p) + rng.random_range(-amp..=amp)).clamp(0, 255) as u8)
        .collect();
    RasterImage::new(img.width(), img.height(), img.channels(), px).unwrap()
}

/// Random grayscale image.
pub fn random_image(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RasterImage::from_fn(w, h, |_, _| rng.random())
}

pub fn mean(img: &RasterImage) -> f64 {
    img.pixels().iter().map(|&p| f64::from(p)).sum::<f64>() / img.pixels().len() as f64
}

pub fn std_dev(img: &RasterImage) -> f64 {
    let m = mean(img);
    (img.pixels().iter().map(|&p| (f64::from(p) - m).powi(2)).sum::<f64>() / img.pixels().len() as f64).sqrt()
}

/// Text page as a scanner delivers it: slight optical blur plus sensor noise.
pub fn scanned_page(w: usize, h: usize, seed: u64) -> RasterImage {
    let blurred = pagewise_core::preprocess::gaussian_denoise(&text_page(w, h, seed), 0.8);
    add_noise(&blurred, 5, seed ^ 0x5eed)
}

/// Serves `router` on an ephemeral local port from a background thread and
/// returns the base URL.
pub fn serve(router: axum::Router) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}
