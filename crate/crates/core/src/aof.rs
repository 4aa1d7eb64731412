//! Average outward flux of the distance gradient, skeleton extraction by
//! thresholding and thinning, and boundary reconstruction from spokes.

use crate::distance::{DistanceField, SiteBlock};
use crate::error::{param, Result};
use crate::topology::{degree, is_simple, neighborhood, OFFSETS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

/// Per-pixel average outward flux over one region. Pixels outside the region,
/// or without a single valid sample, hold `None`.
#[derive(Debug, Clone)]
pub struct AofMap {
    region: u32,
    x0: usize,
    y0: usize,
    width: usize,
    height: usize,
    aof: Vec<Option<f64>>,
    disk_radius: f64,
    sample_count: usize,
}

impl AofMap {
    pub fn region(&self) -> u32 {
        self.region
    }

    pub fn disk_radius(&self) -> f64 {
        self.disk_radius
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn get(&self, x: i64, y: i64) -> Option<f64> {
        let lx = x - self.x0 as i64;
        let ly = y - self.y0 as i64;
        if lx < 0 || ly < 0 || lx >= self.width as i64 || ly >= self.height as i64 {
            return None;
        }
        self.aof[ly as usize * self.width + lx as usize]
    }

    /// True when no pixel of the region could place a sampling disk.
    pub fn is_empty(&self) -> bool {
        self.aof.iter().all(Option::is_none)
    }

    /// `(x, y, aof)` for every valued pixel, in raster order.
    pub fn values(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.aof
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|a| (self.x0 + i % self.width, self.y0 + i / self.width, a)))
    }
}

/// Unit directions on the circle. When `n` is a multiple of four the set is
/// built from one quadrant and closed under exact quarter turns, so results
/// do not drift when the image is rotated by 90 degrees.
pub fn sample_directions(n: usize) -> Vec<[f64; 2]> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    if n % 4 != 0 {
        return (0..n).map(|i| [(i as f64 * step).cos(), (i as f64 * step).sin()]).collect();
    }
    let quarter: Vec<[f64; 2]> = (0..n / 4).map(|i| [(i as f64 * step).cos(), (i as f64 * step).sin()]).collect();
    let mut out = quarter.clone();
    let mut cur = quarter;
    for _ in 0..3 {
        cur = cur.iter().map(|&[x, y]| [-y, x]).collect();
        out.extend_from_slice(&cur);
    }
    out
}

/// Average of `<grad D(p + r N_i), N_i>` over the sample directions, for
/// every pixel of the field's region.
///
/// A sample counts when the pixel reached by the rounded offset belongs to
/// the region; the gradient there is the exact distance gradient. Medial
/// pixels get negative values, down to `-2/pi` where the object angle is a
/// right angle.
pub fn compute_aof(field: &DistanceField, disk_radius: f64, sample_count: usize) -> Result<AofMap> {
    if !(disk_radius >= 0.5) || !disk_radius.is_finite() {
        return Err(param("disk_radius", format!("must be at least 0.5, got {disk_radius}")));
    }
    if sample_count < 8 {
        return Err(param("samples", format!("must be at least 8, got {sample_count}")));
    }
    let dirs = sample_directions(sample_count);
    let (half, probes) = SiteBlock::probes(&dirs, disk_radius);
    let (x0, y0) = field.origin();
    let (width, height) = (field.width(), field.height());
    let rows: Vec<Vec<Option<f64>>> = (0..height)
        .into_par_iter()
        .map_init(SiteBlock::default, |block, ly| {
            let y = y0 + ly;
            (0..width)
                .map(|lx| {
                    let x = x0 + lx;
                    let (xi, yi) = (x as i64, y as i64);
                    if !field.contains(xi, yi) {
                        return None;
                    }
                    field.load_block(block, xi, yi, half);
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for probe in &probes {
                        if let Some(f) = block.flux(probe, x as f64, y as f64) {
                            sum += f;
                            count += 1;
                        }
                    }
                    (count > 0).then(|| sum / count as f64)
                })
                .collect()
        })
        .collect();
    let aof: Vec<Option<f64>> = rows.into_iter().flatten().collect();
    Ok(AofMap {
        region: field.region(),
        x0,
        y0,
        width,
        height,
        aof,
        disk_radius,
        sample_count,
    })
}

/// A medial pixel with its radius and object angle (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonPoint {
    pub x: usize,
    pub y: usize,
    pub radius: f64,
    pub aof_value: f64,
    pub object_angle: f64,
}

/// Object angle implied by an AOF value: `asin(|aof| * pi / 2)`, clamped.
pub fn object_angle(aof: f64) -> f64 {
    (aof.abs() * FRAC_PI_2).clamp(0.0, 1.0).asin()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= FRAC_2_PI {
        Ok(())
    } else {
        Err(param("tau", format!("must lie in (0, 2/pi], got {tau}")))
    }
}

/// Pixels whose flux is at most `-tau` and whose radius is at least one
/// pixel, before any thinning. Raster order.
pub fn threshold_points(aof: &AofMap, field: &DistanceField, tau: f64) -> Result<Vec<SkeletonPoint>> {
    check_tau(tau)?;
    Ok(aof
        .values()
        .filter(|&(_, _, a)| -a >= tau)
        .filter_map(|(x, y, a)| {
            let radius = field.dist(x as i64, y as i64);
            (radius >= 1.0).then_some(SkeletonPoint {
                x,
                y,
                radius,
                aof_value: a,
                object_angle: object_angle(a),
            })
        })
        .collect())
}

/// Thresholds the flux map and thins the result to a unit-width set.
///
/// Thinning removes simple points that are not end points, weakest flux
/// first (ties by raster position), until none remain.
pub fn extract_skeleton(aof: &AofMap, field: &DistanceField, tau: f64) -> Result<Vec<SkeletonPoint>> {
    let raw = threshold_points(aof, field, tau)?;
    let (x0, y0) = field.origin();
    let (w, h) = (field.width(), field.height());
    let mut mask = vec![false; w * h];
    let mut strength = vec![0.0; w * h];
    let mut by_index = vec![usize::MAX; w * h];
    for (k, p) in raw.iter().enumerate() {
        let i = (p.y - y0) * w + (p.x - x0);
        mask[i] = true;
        strength[i] = -p.aof_value;
        by_index[i] = k;
    }
    // Flux strengths are positive, so their bit patterns order like the values.
    let key = |i: usize| Reverse((strength[i].to_bits(), i));
    let mut heap: BinaryHeap<_> = (0..w * h).filter(|&i| mask[i]).map(key).collect();
    while let Some(Reverse((_, i))) = heap.pop() {
        if !mask[i] {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let nb = neighborhood(&mask, w, h, x, y);
        if degree(&nb) < 2 || !is_simple(&nb) {
            continue;
        }
        mask[i] = false;
        for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
            if nb[k] {
                let j = (y as i64 + dy) as usize * w + (x as i64 + dx) as usize;
                heap.push(key(j));
            }
        }
    }
    Ok((0..w * h).filter(|&i| mask[i]).map(|i| raw[by_index[i]]).collect())
}

/// Boundary points recovered from spokes, plus the number of skeleton points
/// skipped for lack of a tangent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reconstruction {
    pub points: Vec<[f64; 2]>,
    pub skipped: usize,
}

/// Rotates a unit tangent by `angle` (counter-clockwise in the x-right,
/// y-down frame means toward `-y`; the sign convention cancels because both
/// rotations are used).
pub fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// The two spoke tips of a medial point: `p + R * rotate(t, +-theta)`, where
/// `t` is the tangent oriented toward decreasing radius.
pub fn spoke_tips(x: f64, y: f64, radius: f64, theta: f64, tangent: [f64; 2]) -> [[f64; 2]; 2] {
    let a = rotate(tangent, theta);
    let b = rotate(tangent, -theta);
    [[x + radius * a[0], y + radius * a[1]], [x + radius * b[0], y + radius * b[1]]]
}

/// Union of spoke tips over the skeleton; `tangents[i]` belongs to `skeleton[i]`.
pub fn reconstruct_boundary(skeleton: &[SkeletonPoint], tangents: &[Option<[f64; 2]>]) -> Reconstruction {
    let mut out = Reconstruction::default();
    for (p, t) in skeleton.iter().zip(tangents) {
        match t {
            Some(t) => out
                .points
                .extend(spoke_tips(p.x as f64, p.y as f64, p.radius, p.object_angle, *t)),
            None => out.skipped += 1,
        }
    }
    out.skipped += skeleton.len().saturating_sub(tangents.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{compute_edt, ContourGeometry, DistanceMap, DEFAULT_STROKE_SIGMA};
    use std::sync::Arc;
    use crate::ingest::{label_regions, BinaryContourImage, Connectivity};
    use crate::synth;

    fn field_at(img: &BinaryContourImage, x: usize, y: usize) -> DistanceField {
        let regions = label_regions(img, Connectivity::Four);
        compute_edt(&regions, img, regions.label(x, y)).unwrap()
    }

    #[test]
    fn blocked_kernel_matches_direct_gradients() {
        let img = synth::multi_region_drawing(96, 80, 3);
        let regions = label_regions(&img, Connectivity::Four);
        let geometry = Arc::new(ContourGeometry::new(&img, DEFAULT_STROKE_SIGMA));
        for frame in [true, false] {
            let map = DistanceMap::compute(&img, frame);
            // Without a frame, probes past the border stand on the closest image pixel.
            let clamp = |x: i64, y: i64| if frame { (x, y) } else { (x.clamp(0, 95), y.clamp(0, 79)) };
            for id in regions.ids() {
                let field = DistanceField::from_map(&map, &regions, &img, id).unwrap().with_geometry(Arc::clone(&geometry));
                for r in [1.0, 2.5] {
                    let aof = compute_aof(&field, r, 24).unwrap();
                    let dirs = sample_directions(24);
                    for (x, y) in field.pixels() {
                        let (xi, yi) = (x as i64, y as i64);
                        let mut sum = 0.0;
                        let mut n = 0;
                        for d in &dirs {
                            let (ox, oy) = ((r * d[0]).round() as i64, (r * d[1]).round() as i64);
                            let (cx, cy) = clamp(xi + ox, yi + oy);
                            if !field.contains(cx, cy) {
                                continue;
                            }
                            if let Some(g) = field.exact_gradient(x as f64 + r * d[0], y as f64 + r * d[1]) {
                                sum += g[0] * d[0] + g[1] * d[1];
                                n += 1;
                            }
                        }
                        let direct = (n > 0).then(|| sum / n as f64);
                        assert_eq!(aof.get(xi, yi), direct, "frame {frame}, region {id} at ({x}, {y}), r = {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn open_border_is_not_medial() {
        let img = synth::slab(120, 41, 10, 20);
        let regions = label_regions(&img, Connectivity::Four);
        let map = DistanceMap::compute(&img, false);
        let geometry = Arc::new(ContourGeometry::new(&img, DEFAULT_STROKE_SIGMA));
        for id in regions.ids() {
            let field = DistanceField::from_map(&map, &regions, &img, id).unwrap().with_geometry(Arc::clone(&geometry));
            let skeleton = extract_skeleton(&compute_aof(&field, 1.0, 60).unwrap(), &field, 0.25).unwrap();
            if regions.label(60, 20) == id {
                assert!(skeleton.iter().all(|p| p.y == 20));
                assert!(skeleton.len() >= 110, "{}", skeleton.len());
            } else {
                assert!(skeleton.is_empty(), "region {id}: {} points", skeleton.len());
            }
        }
    }

    #[test]
    fn directions_are_closed_under_quarter_turns() {
        let d = sample_directions(60);
        assert_eq!(d.len(), 60);
        for &[x, y] in &d {
            assert!((x.hypot(y) - 1.0).abs() < 1e-12);
            assert!(d.iter().any(|&[a, b]| a == -y && b == x));
        }
    }

    #[test]
    fn slab_centerline_and_off_axis() {
        // Half-width 10: contour rows 10 and 30, centerline row 20.
        let img = synth::slab(120, 41, 10, 20);
        let f = field_at(&img, 60, 20);
        let m = compute_aof(&f, 1.0, 60).unwrap();
        let c = m.get(60, 20).unwrap();
        assert!((c + FRAC_2_PI).abs() < 0.05, "centerline {c}");
        let off = m.get(60, 23).unwrap();
        assert!(off.abs() < 0.05, "off-axis {off}");
    }

    #[test]
    fn wedge_bisector_follows_closed_form() {
        // Half-angle 67.5 degrees puts the object angle at 22.5 degrees.
        // Bisector points from x = 20 to 90 stay closer to the rays than to the frame.
        let img = synth::wedge(200, 201, 10.0, 67.5);
        let f = field_at(&img, 150, 100);
        let m = compute_aof(&f, 1.0, 60).unwrap();
        let expect = -FRAC_2_PI * 22.5f64.to_radians().sin();
        let mut v: Vec<f64> = (20..90).filter_map(|x| m.get(x, 100)).collect();
        v.sort_by(f64::total_cmp);
        let med = v[v.len() / 2];
        assert!((med - expect).abs() < 0.05, "median {med}, expected {expect}");
    }

    #[test]
    fn parameters_are_validated() {
        let img = synth::slab(30, 21, 5, 10);
        let f = field_at(&img, 15, 10);
        assert!(compute_aof(&f, 0.4, 60).is_err());
        assert!(compute_aof(&f, 1.0, 7).is_err());
        let m = compute_aof(&f, 1.0, 60).unwrap();
        assert!(extract_skeleton(&m, &f, 0.0).is_err());
        assert!(extract_skeleton(&m, &f, 0.7).is_err());
        assert!(extract_skeleton(&m, &f, FRAC_2_PI).is_ok());
    }

    #[test]
    fn thin_region_gives_empty_map() {
        // A single pixel walled in on all sides: every sample lands on contour.
        let img = BinaryContourImage::from_fn(9, 9, |x, y| (3..=5).contains(&x) && (3..=5).contains(&y) && (x, y) != (4, 4)).unwrap();
        let regions = label_regions(&img, Connectivity::Four);
        let f = compute_edt(&regions, &img, regions.label(4, 4)).unwrap();
        let m = compute_aof(&f, 1.0, 60).unwrap();
        assert!(m.is_empty());
        assert!(extract_skeleton(&m, &f, 0.25).unwrap().is_empty());
    }

    #[test]
    fn slab_skeleton_is_the_centerline() {
        let img = synth::slab(100, 31, 5, 20);
        let f = field_at(&img, 50, 15);
        let m = compute_aof(&f, 1.0, 60).unwrap();
        let s = extract_skeleton(&m, &f, 0.25).unwrap();
        let mid: Vec<_> = s.iter().filter(|p| p.x >= 20 && p.x < 80).collect();
        assert_eq!(mid.len(), 60);
        for p in mid {
            assert_eq!(p.y, 15);
            assert!((p.radius - 10.0).abs() <= 0.5);
            assert_eq!(p.radius, f.dist(p.x as i64, p.y as i64));
        }
    }

    #[test]
    fn threshold_admits_only_wide_angles() {
        let img = synth::rectangle(40, 20, 4);
        let f = field_at(&img, 20, 14);
        let m = compute_aof(&f, 1.0, 60).unwrap();
        let min_angle = object_angle(0.25);
        for p in threshold_points(&m, &f, 0.25).unwrap() {
            assert!(p.object_angle >= min_angle - 1e-12);
            assert!(p.radius >= 1.0);
        }
        assert!((min_angle.to_degrees() - 23.1).abs() < 0.1);
    }

    #[test]
    fn raising_tau_never_adds_points() {
        let img = synth::multi_region_drawing(128, 128, 9);
        let regions = label_regions(&img, Connectivity::Four);
        for id in regions.ids() {
            let f = compute_edt(&regions, &img, id).unwrap();
            let m = compute_aof(&f, 1.0, 60).unwrap();
            let mut prev: Option<Vec<(usize, usize)>> = None;
            for tau in [0.1, 0.25, 0.4, 0.6] {
                let cur: Vec<_> = threshold_points(&m, &f, tau).unwrap().iter().map(|p| (p.x, p.y)).collect();
                if let Some(prev) = &prev {
                    assert!(cur.iter().all(|q| prev.contains(q)));
                }
                prev = Some(cur);
            }
        }
    }

    #[test]
    fn slab_reconstruction_hits_both_lines() {
        let img = synth::slab(60, 31, 5, 20);
        let f = field_at(&img, 30, 15);
        let m = compute_aof(&f, 1.0, 60).unwrap();
        let s: Vec<_> = extract_skeleton(&m, &f, 0.25)
            .unwrap()
            .into_iter()
            .filter(|p| p.x > 12 && p.x < 48)
            .map(|p| SkeletonPoint { object_angle: FRAC_PI_2, ..p })
            .collect();
        let t = vec![Some([1.0, 0.0]); s.len()];
        let r = reconstruct_boundary(&s, &t);
        assert_eq!(r.points.len(), 2 * s.len());
        for q in r.points {
            let d = (q[1] - 5.0).abs().min((q[1] - 25.0).abs());
            assert!(d <= 1.0, "{q:?}");
        }
        let r = reconstruct_boundary(&s, &vec![None; s.len()]);
        assert_eq!(r.skipped, s.len());
    }
}
