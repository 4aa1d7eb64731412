use super::BinaryContourImage;
use crate::error::{param, Result};
use crate::topology::{degree, line_pixels, neighbor_indices, neighborhood};
use serde::{Deserialize, Serialize};

/// An ordered run of contour points in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourFragment {
    pub points: Vec<[f64; 2]>,
}

impl ContourFragment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of squared second differences of the coordinates.
    pub fn curvature_energy(&self) -> f64 {
        self.points
            .windows(3)
            .map(|w| {
                let ax = w[0][0] - 2.0 * w[1][0] + w[2][0];
                let ay = w[0][1] - 2.0 * w[1][1] + w[2][1];
                ax * ax + ay * ay
            })
            .sum()
    }
}

/// Splits a unit-width contour image into pixel chains.
///
/// Chains start at end points, then at junction pixels (three or more
/// neighbors), then on leftover closed loops. Every contour pixel lands in
/// exactly one chain; a junction pixel belongs to the first chain that reaches
/// it. Isolated pixels form one-pixel chains.
pub fn trace_pixel_chains(img: &BinaryContourImage) -> Vec<Vec<usize>> {
    let (w, h) = (img.width(), img.height());
    let mask = img.mask();
    let deg: Vec<usize> = (0..w * h)
        .map(|i| if mask[i] { degree(&neighborhood(mask, w, h, i % w, i / w)) } else { 0 })
        .collect();
    let mut assigned = vec![false; w * h];
    let mut chains: Vec<Vec<usize>> = Vec::new();

    let ends: Vec<usize> = (0..w * h).filter(|&i| mask[i] && deg[i] <= 1).collect();
    let junctions: Vec<usize> = (0..w * h).filter(|&i| mask[i] && deg[i] >= 3).collect();

    for &t in ends.iter().chain(&junctions) {
        let mut started = false;
        for n in neighbor_indices(w, h, t % w, t / w).collect::<Vec<_>>() {
            // Adjacent junction pixels form one cluster; no chain runs between them.
            if !mask[n] || assigned[n] || (deg[t] >= 3 && deg[n] >= 3) {
                continue;
            }
            let mut chain = Vec::new();
            if !assigned[t] {
                assigned[t] = true;
                chain.push(t);
            }
            walk(n, &mut chain, &mut assigned, mask, &deg, w, h);
            chains.push(chain);
            started = true;
        }
        if !assigned[t] {
            assigned[t] = true;
            if !started && !attach_to_chain_end(t, &mut chains, w) {
                chains.push(vec![t]);
            }
        }
    }

    // Closed loops without end points or junctions.
    for start in 0..w * h {
        if mask[start] && !assigned[start] {
            let mut chain = Vec::new();
            walk(start, &mut chain, &mut assigned, mask, &deg, w, h);
            chains.push(chain);
        }
    }
    chains
}

fn walk(start: usize, chain: &mut Vec<usize>, assigned: &mut [bool], mask: &[bool], deg: &[usize], w: usize, h: usize) {
    let mut cur = start;
    assigned[cur] = true;
    chain.push(cur);
    while deg[cur] == 2 {
        // Prefer 4-neighbors so diagonal shortcuts do not skip a pixel.
        let next = neighbor_indices(w, h, cur % w, cur / w)
            .filter(|&n| mask[n] && !assigned[n])
            .min_by_key(|&n| usize::from(n % w != cur % w && n / w != cur / w));
        match next {
            Some(n) => {
                assigned[n] = true;
                chain.push(n);
                cur = n;
            }
            None => break,
        }
    }
}

fn attach_to_chain_end(p: usize, chains: &mut [Vec<usize>], w: usize) -> bool {
    let adjacent = |a: usize, b: usize| {
        let (ax, ay, bx, by) = ((a % w) as i64, (a / w) as i64, (b % w) as i64, (b / w) as i64);
        (ax - bx).abs() <= 1 && (ay - by).abs() <= 1
    };
    for chain in chains.iter_mut() {
        if adjacent(*chain.last().unwrap(), p) {
            chain.push(p);
            return true;
        }
        if adjacent(chain[0], p) {
            chain.insert(0, p);
            return true;
        }
    }
    false
}

/// Contour fragments of a unit-width image, as ordered pixel-center coordinates.
pub fn trace_fragments(img: &BinaryContourImage) -> Vec<ContourFragment> {
    let w = img.width();
    trace_pixel_chains(img)
        .into_iter()
        .map(|chain| ContourFragment {
            points: chain.iter().map(|&i| [(i % w) as f64, (i / w) as f64]).collect(),
        })
        .collect()
}

/// Convolves a scalar sequence with a Gaussian truncated at `3 * sigma`.
///
/// The sequence is extended past each end by point reflection through the end
/// sample, which keeps both ends fixed and reproduces affine sequences exactly.
pub fn smooth_series(values: &[f64], sigma: f64) -> Vec<f64> {
    let n = values.len();
    if sigma <= 0.0 || n < 3 {
        return values.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let last = n as i64 - 1;
    let at = |j: i64| -> f64 {
        if j < 0 {
            2.0 * values[0] - values[(-j).min(last) as usize]
        } else if j > last {
            2.0 * values[last as usize] - values[(2 * last - j).max(0) as usize]
        } else {
            values[j as usize]
        }
    };
    let mut out: Vec<f64> = (0..n as i64)
        .map(|i| {
            kernel
                .iter()
                .zip(-radius..=radius)
                .map(|(wk, k)| wk * at(i + k))
                .sum::<f64>()
                / norm
        })
        .collect();
    out[0] = values[0];
    out[n - 1] = values[n - 1];
    out
}

/// Gaussian smoothing of a closed sequence (indices wrap around).
pub fn smooth_cyclic(values: &[f64], sigma: f64) -> Vec<f64> {
    let n = values.len() as i64;
    if sigma <= 0.0 || n < 3 {
        return values.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .zip(-radius..=radius)
                .map(|(wk, k)| wk * values[(i + k).rem_euclid(n) as usize])
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Gaussian smoothing of a fragment's coordinates with pinned end points.
pub fn smooth_fragment(frag: &ContourFragment, sigma: f64) -> Result<ContourFragment> {
    if !(sigma >= 0.0) {
        return Err(param("sigma", format!("must be non-negative, got {sigma}")));
    }
    let xs: Vec<f64> = frag.points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = frag.points.iter().map(|p| p[1]).collect();
    let (sx, sy) = (smooth_series(&xs, sigma), smooth_series(&ys, sigma));
    Ok(ContourFragment {
        points: sx.into_iter().zip(sy).map(|(x, y)| [x, y]).collect(),
    })
}

/// Draws fragments back onto a pixel grid: points are rounded and joined with
/// 8-connected segments. Points outside the raster are clipped.
pub fn rasterize_fragments(fragments: &[ContourFragment], width: usize, height: usize) -> Result<BinaryContourImage> {
    let mut img = BinaryContourImage::new(width, height)?;
    for frag in fragments {
        let px: Vec<(i64, i64)> = frag
            .points
            .iter()
            .map(|p| (p[0].round() as i64, p[1].round() as i64))
            .collect();
        if let [only] = px.as_slice() {
            img.set_checked(only.0, only.1, true);
        }
        for seg in px.windows(2) {
            for (x, y) in line_pixels(seg[0].0, seg[0].1, seg[1].0, seg[1].1) {
                img.set_checked(x, y, true);
            }
        }
    }
    Ok(img)
}
