use super::BinaryContourImage;
use crate::topology::{degree, is_simple, neighborhood};

// Directional border tests, indexing the E,NE,N,NW,W,SW,S,SE neighborhood.
const PEEL_ORDER: [usize; 4] = [2, 6, 0, 4];

/// Thins contour strokes to unit width by directional peeling of simple points.
///
/// Each sub-iteration removes, in raster order, pixels whose neighbor in the
/// current direction is background, that are simple under (8, 4) topology and
/// that have at least two contour neighbors (end points survive). The result is
/// a fixed point: no simple non-end pixel remains, so the pass is idempotent and
/// the number of 8-connected components never changes.
pub fn thin_to_unit_width(img: &BinaryContourImage) -> BinaryContourImage {
    let (w, h) = (img.width(), img.height());
    let mut mask = img.mask().to_vec();
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for &dir in &PEEL_ORDER {
            candidates.clear();
            for y in 0..h {
                for x in 0..w {
                    if mask[y * w + x] && border_removable(&mask, w, h, x, y, dir) {
                        candidates.push((x, y));
                    }
                }
            }
            for &(x, y) in &candidates {
                if border_removable(&mask, w, h, x, y, dir) {
                    mask[y * w + x] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    BinaryContourImage::from_mask(w, h, mask).expect("dimensions unchanged")
}

#[inline]
fn border_removable(mask: &[bool], w: usize, h: usize, x: usize, y: usize, dir: usize) -> bool {
    // Frame pixels stay: their removal could join regions only through the outside.
    if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
        return false;
    }
    let nb = neighborhood(mask, w, h, x, y);
    !nb[dir] && degree(&nb) >= 2 && is_simple(&nb)
}
