use crate::error::{param, Result};
use crate::ingest::BinaryContourImage;
use crate::salience::Measure;

/// Contour pixels divided by salience rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub top: BinaryContourImage,
    pub bottom: BinaryContourImage,
    pub measure: Measure,
    pub fraction: f64,
}

/// Puts the `round(fraction * n)` most salient of the `n` contour pixels in
/// `top` and the rest in `bottom`. Equal values keep raster order, so the
/// earlier pixel ranks higher.
///
/// `values` is a row-major plane over the whole image; only contour pixels
/// are read.
pub fn split_by_salience(values: &[f64], img: &BinaryContourImage, measure: Measure, fraction: f64) -> Result<SplitResult> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(param("fraction", format!("must lie in [0, 1], got {fraction}")));
    }
    let (w, h) = (img.width(), img.height());
    if values.len() != w * h {
        return Err(param("values", format!("expected {} values, got {}", w * h, values.len())));
    }
    let mut order: Vec<usize> = img.contour_pixels().map(|(x, y)| y * w + x).collect();
    // Stable sort keeps raster order among ties.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let cut = (fraction * order.len() as f64).round() as usize;
    let mut top = BinaryContourImage::new(w, h)?;
    let mut bottom = BinaryContourImage::new(w, h)?;
    for (rank, &i) in order.iter().enumerate() {
        let target = if rank < cut { &mut top } else { &mut bottom };
        target.set(i % w, i / w, true);
    }
    Ok(SplitResult {
        top,
        bottom,
        measure,
        fraction,
    })
}
