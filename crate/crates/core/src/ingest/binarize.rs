use super::BinaryContourImage;
use crate::error::{Error, Result};

/// How grayscale values are split into contour and background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinarizePolicy {
    /// Pixels darker than the given gray level are contours.
    Fixed(u8),
    /// Otsu's threshold computed per image; pixels at or below it are contours.
    Adaptive,
}

impl Default for BinarizePolicy {
    fn default() -> Self {
        BinarizePolicy::Fixed(128)
    }
}

/// Decodes a PNG/PGM (or anything the `image` crate's enabled codecs accept),
/// converts to luminance and binarizes with dark-on-light polarity.
pub fn load_line_drawing(bytes: &[u8], policy: BinarizePolicy) -> Result<BinaryContourImage> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Format(e.to_string()))?;
    let gray = decoded.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    binarize(gray.as_raw(), w, h, policy)
}

/// Binarizes a row-major 8-bit luminance buffer.
pub fn binarize(gray: &[u8], width: usize, height: usize, policy: BinarizePolicy) -> Result<BinaryContourImage> {
    if width < 3 || height < 3 {
        return Err(Error::Dimension { width, height });
    }
    // Contours are the pixels strictly below `limit`.
    let limit: u16 = match policy {
        BinarizePolicy::Fixed(t) => u16::from(t),
        BinarizePolicy::Adaptive => otsu_threshold(gray).map_or(0, |t| u16::from(t) + 1),
    };
    BinaryContourImage::from_mask(width, height, gray.iter().map(|&g| u16::from(g) < limit).collect())
}

/// Otsu's threshold: the gray level `t` maximizing the between-class variance of
/// `{g <= t}` versus `{g > t}`. Returns `None` for single-level images.
pub fn otsu_threshold(gray: &[u8]) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &g in gray {
        hist[g as usize] += 1;
    }
    let total = gray.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(g, &c)| g as f64 * c as f64).sum();

    let mut best: Option<(u8, f64)> = None;
    let (mut w0, mut sum0) = (0.0, 0.0);
    for t in 0..255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if best.map_or(true, |(_, b)| between > b) {
            best = Some((t as u8, between));
        }
    }
    best.map(|(t, _)| t)
}
