//! Raster ingest: decoding, binarization, unit-width thinning, fragment
//! smoothing and decomposition of the inter-contour space into regions.

mod binarize;
mod fragments;
mod image;
mod regions;
mod thinning;

pub use binarize::{binarize, load_line_drawing, otsu_threshold, BinarizePolicy};
pub use fragments::{
    rasterize_fragments, smooth_cyclic, smooth_fragment, smooth_series, trace_fragments, trace_pixel_chains,
    ContourFragment,
};
pub use image::BinaryContourImage;
pub use regions::{label_regions, BoundingBox, Connectivity, RegionMap};
pub use thinning::thin_to_unit_width;

/// Runs the machine line-drawing preparation: thin to unit width, smooth every
/// fragment with a Gaussian of standard deviation `sigma`, re-rasterize, and thin
/// again so the working image is one pixel wide.
///
/// `sigma == 0` skips smoothing.
pub fn prepare_line_drawing(img: &BinaryContourImage, sigma: f64) -> crate::Result<BinaryContourImage> {
    let thin = thin_to_unit_width(img);
    if sigma == 0.0 {
        return Ok(thin);
    }
    let smoothed = trace_fragments(&thin)
        .iter()
        .map(|f| smooth_fragment(f, sigma))
        .collect::<crate::Result<Vec<_>>>()?;
    let redrawn = rasterize_fragments(&smoothed, thin.width(), thin.height())?;
    Ok(thin_to_unit_width(&redrawn))
}
