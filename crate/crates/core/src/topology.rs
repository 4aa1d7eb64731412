//! Neighborhood helpers shared by the thinning passes and graph tracing.
//!
//! Neighbors are indexed counter-clockwise starting east:
//! `E, NE, N, NW, W, SW, S, SE`. Image rows grow downward, so north is `y - 1`.

pub(crate) const OFFSETS: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Reads the 8-neighborhood of `(x, y)` from a row-major mask; out-of-bounds is background.
#[inline]
pub(crate) fn neighborhood(mask: &[bool], width: usize, height: usize, x: usize, y: usize) -> [bool; 8] {
    let mut nb = [false; 8];
    for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
            nb[k] = mask[ny as usize * width + nx as usize];
        }
    }
    nb
}

#[inline]
pub(crate) fn degree(nb: &[bool; 8]) -> usize {
    nb.iter().filter(|&&b| b).count()
}

/// Yokoi connectivity number for 8-connected foreground / 4-connected background.
#[inline]
pub(crate) fn connectivity_number(nb: &[bool; 8]) -> u32 {
    let bg = |k: usize| u32::from(!nb[k % 8]);
    [0usize, 2, 4, 6]
        .iter()
        .map(|&k| bg(k) - bg(k) * bg(k + 1) * bg(k + 2))
        .sum()
}

/// A foreground pixel is simple when deleting it changes neither the foreground
/// 8-topology nor the background 4-topology.
#[inline]
pub(crate) fn is_simple(nb: &[bool; 8]) -> bool {
    connectivity_number(nb) == 1
}

/// Iterates in-bounds 8-neighbors of `(x, y)` as row-major indices.
pub(crate) fn neighbor_indices(
    width: usize,
    height: usize,
    x: usize,
    y: usize,
) -> impl Iterator<Item = usize> {
    OFFSETS.iter().filter_map(move |&(dx, dy)| {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height)
            .then(|| ny as usize * width + nx as usize)
    })
}

/// Deterministic Bresenham segment between two pixel positions, endpoints included.
pub(crate) fn line_pixels(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}
