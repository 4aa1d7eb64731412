//! Windowed medial salience measures and their projection onto contour pixels.

use crate::aof::spoke_tips;
use crate::error::{param, Error, Result};
use crate::graph::{BranchPoint, MedialBranch};
use crate::ingest::{trace_pixel_chains, BinaryContourImage, RegionMap};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// The three medial salience measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Separation,
    Ribbon,
    Taper,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Separation, Measure::Ribbon, Measure::Taper];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Separation => "separation",
            Measure::Ribbon => "ribbon",
            Measure::Taper => "taper",
        }
    }

    /// Evaluates this measure on one window of a unit-speed branch.
    pub fn evaluate(self, window: &[BranchPoint]) -> f64 {
        match self {
            Measure::Separation => separation_salience(window),
            Measure::Ribbon => ribbon_salience(window),
            Measure::Taper => taper_salience(window),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separation" | "separ" => Ok(Measure::Separation),
            "ribbon" => Ok(Measure::Ribbon),
            "taper" => Ok(Measure::Taper),
            other => Err(Error::UnknownMeasure(other.to_string())),
        }
    }
}

/// Parses a comma-separated measure list such as `ribbon,taper`.
pub fn parse_measures(list: &str) -> Result<Vec<Measure>> {
    let mut out: Vec<Measure> = Vec::new();
    for tok in list.split(',').filter(|t| !t.trim().is_empty()) {
        let m: Measure = tok.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(param("measures", "no measure requested"));
    }
    Ok(out)
}

/// How skeleton salience reaches the contour pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Each medial point casts onto the contour pixels its two spokes touch.
    #[default]
    Spoke,
    /// Each contour pixel takes the closest medial point of every adjacent region.
    NearestMedial,
}

/// Parameters of the salience stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SalienceConfig {
    /// Half-window `K`, in samples.
    pub window: usize,
    pub measures: Vec<Measure>,
    pub tau: f64,
    /// Smoothing applied to branch coordinates and radii before derivatives.
    pub sigma: f64,
    pub disk_radius: f64,
    pub samples: usize,
    /// Smoothing along contour strokes used to orient distance gradients.
    pub stroke_sigma: f64,
    pub projection: Projection,
}

impl Default for SalienceConfig {
    fn default() -> Self {
        Self {
            window: 5,
            measures: Measure::ALL.to_vec(),
            tau: 0.25,
            sigma: 1.0,
            disk_radius: 1.0,
            samples: 60,
            stroke_sigma: crate::distance::DEFAULT_STROKE_SIGMA,
            projection: Projection::Spoke,
        }
    }
}

impl SalienceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(param("window", "must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau <= std::f64::consts::FRAC_2_PI) {
            return Err(param("tau", format!("must lie in (0, 2/pi], got {}", self.tau)));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(param("sigma", format!("must be non-negative, got {}", self.sigma)));
        }
        if !(self.stroke_sigma >= 0.0) || !self.stroke_sigma.is_finite() {
            return Err(param("stroke_sigma", format!("must be non-negative, got {}", self.stroke_sigma)));
        }
        if !(self.disk_radius >= 0.5) || !self.disk_radius.is_finite() {
            return Err(param("disk_radius", format!("must be at least 0.5, got {}", self.disk_radius)));
        }
        if self.samples < 8 {
            return Err(param("samples", format!("must be at least 8, got {}", self.samples)));
        }
        if self.measures.is_empty() {
            return Err(param("measures", "no measure requested"));
        }
        Ok(())
    }
}

/// Trapezoid weights: half the length of each adjacent segment.
fn weights(w: &[BranchPoint]) -> Vec<f64> {
    let n = w.len();
    let seg: Vec<f64> = w.windows(2).map(|p| (p[1].x - p[0].x).hypot(p[1].y - p[0].y)).collect();
    (0..n)
        .map(|i| {
            let left = if i > 0 { seg[i - 1] } else { 0.0 };
            let right = if i + 1 < n { seg[i] } else { 0.0 };
            (left + right) / 2.0
        })
        .collect()
}

/// First derivatives of position and radius with respect to the sample
/// index: central differences inside, one-sided at the ends.
fn first_derivatives(w: &[BranchPoint]) -> Vec<(f64, f64)> {
    let n = w.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let span = (b - a) as f64;
            let dc = (w[b].x - w[a].x).hypot(w[b].y - w[a].y) / span;
            let dr = (w[b].radius - w[a].radius) / span;
            (dc, dr)
        })
        .collect()
}

/// Mean step length, the arc-length size of one sample index.
fn step(w: &[BranchPoint]) -> f64 {
    let total: f64 = w.windows(2).map(|p| (p[1].x - p[0].x).hypot(p[1].y - p[0].y)).sum();
    total / (w.len() - 1) as f64
}

/// Contour separation: one minus the length-weighted mean of `1/R`.
/// A single point gives `1 - 1/R`.
pub fn separation_salience(window: &[BranchPoint]) -> f64 {
    match window {
        [] => 0.0,
        [p] => (1.0 - 1.0 / p.radius).clamp(0.0, 1.0),
        _ => {
            let w = weights(window);
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return (1.0 - 1.0 / window[0].radius).clamp(0.0, 1.0);
            }
            let mean_inv: f64 = window.iter().zip(&w).map(|(p, wi)| wi / p.radius).sum::<f64>() / total;
            (1.0 - mean_inv).clamp(0.0, 1.0)
        }
    }
}

/// Ribbon symmetry: planar length over the length of the lifted curve
/// `(x, y, R)`. Constant radius gives 1.
pub fn ribbon_salience(window: &[BranchPoint]) -> f64 {
    if window.len() < 2 {
        return 1.0;
    }
    let w = weights(window);
    let d = first_derivatives(window);
    let plain: f64 = w.iter().zip(&d).map(|(wi, (dc, _))| wi * dc).sum();
    let lifted: f64 = w.iter().zip(&d).map(|(wi, (dc, dr))| wi * dc.hypot(*dr)).sum();
    if lifted <= 0.0 {
        1.0
    } else {
        (plain / lifted).clamp(0.0, 1.0)
    }
}

/// Second derivative, per sample index, of the least-squares parabola
/// through `values` taken at indices `0..n`. Exact for quadratic data.
fn fitted_second_derivative(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mid = (n - 1.0) / 2.0;
    // Moments of the centered index t and the sums against the data.
    let (mut s2, mut s3, mut s4, mut sy, mut sty, mut stty) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let t = i as f64 - mid;
        let t2 = t * t;
        s2 += t2;
        s3 += t2 * t;
        s4 += t2 * t2;
        sy += v;
        sty += t * v;
        stty += t2 * v;
    }
    // Normal equations for a + b t + c t^2 (the odd first moment vanishes).
    let m = [[n, 0.0, s2], [0.0, s2, s3], [s2, s3, s4]];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-12 {
        return 0.0;
    }
    let mut mc = m;
    for (row, rhs) in mc.iter_mut().zip([sy, sty, stty]) {
        row[2] = rhs;
    }
    2.0 * det(mc) / d
}

/// Taper symmetry: planar length over the length of the curve lifted by
/// `R * R''`. Linearly varying radius gives 1. `R''` is the curvature of the
/// least-squares parabola through the window's radii, which keeps pixel-scale
/// ripple in the radius from dominating the product with `R`.
pub fn taper_salience(window: &[BranchPoint]) -> f64 {
    let n = window.len();
    if n < 3 {
        return 1.0;
    }
    let h = step(window);
    if h <= 0.0 {
        return 1.0;
    }
    let w = weights(window);
    let d = first_derivatives(window);
    let radii: Vec<f64> = window.iter().map(|p| p.radius).collect();
    let second = fitted_second_derivative(&radii) / (h * h);
    // Position derivatives are per sample index; scale R R'' to match.
    let plain: f64 = w.iter().zip(&d).map(|(wi, (dc, _))| wi * dc).sum();
    let lifted: f64 = (0..n).map(|i| w[i] * d[i].0.hypot(window[i].radius * second * h)).sum();
    if lifted <= 0.0 {
        1.0
    } else {
        (plain / lifted).clamp(0.0, 1.0)
    }
}

/// Per-point values of `measure` over windows `[i - k, i + k]`, shrunk at
/// the branch ends.
pub fn windowed_salience(branch: &MedialBranch, k: usize, measure: Measure) -> Vec<f64> {
    let n = branch.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(k);
            let hi = (i + k).min(n - 1);
            measure.evaluate(&branch.points[lo..=hi])
        })
        .collect()
}

/// A medial sample ready for projection.
#[derive(Debug, Clone, Copy)]
pub struct MedialSample<'a> {
    pub region: u32,
    pub point: BranchPoint,
    pub tangent: Option<[f64; 2]>,
    pub values: &'a [f64],
}

/// Projection bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub contour_pixels: usize,
    /// Pixels reached directly by at least one medial point.
    pub cast: usize,
    /// Pixels valued by the fill rule along their contour chain.
    pub filled: usize,
    /// Pixels left without any value, defaulted to 0.
    pub defaulted: usize,
}

impl Coverage {
    pub fn fraction(&self) -> f64 {
        if self.contour_pixels == 0 {
            1.0
        } else {
            self.cast as f64 / self.contour_pixels as f64
        }
    }
}

/// Largest distance from a spoke tip to the contour pixel it snaps to.
pub const SNAP_RADIUS: f64 = 2.0;

/// Nearest contour pixel to `(x, y)` within [`SNAP_RADIUS`]; ties go to the
/// first pixel in raster order.
pub fn snap_to_contour(img: &BinaryContourImage, x: f64, y: f64) -> Option<usize> {
    let r = SNAP_RADIUS.ceil() as i64;
    let (cx, cy) = (x.round() as i64, y.round() as i64);
    let mut best: Option<(f64, usize)> = None;
    for py in cy - r..=cy + r {
        for px in cx - r..=cx + r {
            if !img.is_contour(px, py) {
                continue;
            }
            let d = (px as f64 - x).hypot(py as f64 - y);
            let i = py as usize * img.width() + px as usize;
            if d <= SNAP_RADIUS && best.map_or(true, |(bd, bi)| d < bd || (d == bd && i < bi)) {
                best = Some((d, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

/// Per-pixel values for each measure (row-major; 0 off the contour) and the
/// coverage report.
#[derive(Debug, Clone)]
pub struct ContourValues {
    pub values: Vec<Vec<f64>>,
    pub coverage: Coverage,
}

/// Carries medial salience onto contour pixels with a max-reduce, then fills
/// pixels nobody reached from the nearest valued pixel of the same contour
/// chain. `regions` is needed only for [`Projection::NearestMedial`].
pub fn project_to_contours(
    samples: &[MedialSample<'_>],
    measures: usize,
    img: &BinaryContourImage,
    regions: &RegionMap,
    mode: Projection,
) -> ContourValues {
    let (w, h) = (img.width(), img.height());
    let mut acc: Vec<Option<Vec<f64>>> = vec![None; w * h];
    let mut cast = |i: usize, vals: &[f64]| match &mut acc[i] {
        Some(cur) => cur.iter_mut().zip(vals).for_each(|(c, v)| *c = c.max(*v)),
        slot @ None => *slot = Some(vals.to_vec()),
    };
    match mode {
        Projection::Spoke => {
            for s in samples {
                let Some(t) = s.tangent else { continue };
                let p = s.point;
                for tip in spoke_tips(p.x, p.y, p.radius, p.object_angle, t) {
                    if let Some(i) = snap_to_contour(img, tip[0], tip[1]) {
                        cast(i, s.values);
                    }
                }
            }
        }
        Projection::NearestMedial => {
            let hash = SpatialHash::new(samples);
            for (x, y) in img.contour_pixels() {
                let mut seen: Vec<u32> = Vec::new();
                for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let r = regions.label(nx as usize, ny as usize);
                    if r == 0 || seen.contains(&r) {
                        continue;
                    }
                    seen.push(r);
                    if let Some(k) = hash.nearest(samples, r, x as f64, y as f64) {
                        cast(y * w + x, samples[k].values);
                    }
                }
            }
        }
    }

    let mut coverage = Coverage {
        contour_pixels: img.count(),
        cast: acc.iter().filter(|v| v.is_some()).count(),
        ..Coverage::default()
    };
    // Only contour pixels can hold values.
    let direct: Vec<Option<Vec<f64>>> = acc;
    let mut filled = direct.clone();
    for chain in trace_pixel_chains(img) {
        fill_chain(&chain, &direct, &mut filled);
    }
    let mut values = vec![vec![0.0; w * h]; measures];
    for (x, y) in img.contour_pixels() {
        let i = y * w + x;
        match (&direct[i], &filled[i]) {
            (Some(_), _) => {}
            (None, Some(_)) => coverage.filled += 1,
            (None, None) => coverage.defaulted += 1,
        }
        if let Some(v) = &filled[i] {
            for (m, val) in v.iter().enumerate() {
                values[m][i] = *val;
            }
        }
    }
    ContourValues { values, coverage }
}

/// Gives each unvalued chain pixel the value of the nearest directly valued
/// pixel along the chain (ties toward the chain start).
fn fill_chain(chain: &[usize], direct: &[Option<Vec<f64>>], out: &mut [Option<Vec<f64>>]) {
    let n = chain.len();
    let mut nearest: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut last: Option<usize> = None;
    for k in 0..n {
        if direct[chain[k]].is_some() {
            last = Some(k);
        }
        if let Some(j) = last {
            nearest[k] = Some((k - j, j));
        }
    }
    let mut last: Option<usize> = None;
    for k in (0..n).rev() {
        if direct[chain[k]].is_some() {
            last = Some(k);
        }
        if let Some(j) = last {
            let d = j - k;
            if nearest[k].map_or(true, |(bd, _)| d < bd) {
                nearest[k] = Some((d, j));
            }
        }
    }
    for k in 0..n {
        if direct[chain[k]].is_none() {
            if let Some((_, j)) = nearest[k] {
                out[chain[k]] = direct[chain[j]].clone();
            }
        }
    }
}

struct SpatialHash {
    cell: f64,
    buckets: HashMap<(u32, i64, i64), Vec<usize>>,
    extent: HashMap<u32, i64>,
}

impl SpatialHash {
    fn new(samples: &[MedialSample<'_>]) -> Self {
        let cell = 8.0;
        let mut buckets: HashMap<(u32, i64, i64), Vec<usize>> = HashMap::new();
        let mut extent: HashMap<u32, i64> = HashMap::new();
        for (k, s) in samples.iter().enumerate() {
            let key = (s.region, (s.point.x / cell).floor() as i64, (s.point.y / cell).floor() as i64);
            buckets.entry(key).or_default().push(k);
            extent.entry(s.region).or_insert(0);
        }
        // Search radius bound per region: enough rings to reach any bucket.
        for &(r, cx, cy) in buckets.keys() {
            let e = extent.get_mut(&r).unwrap();
            *e = (*e).max(cx.abs()).max(cy.abs());
        }
        Self { cell, buckets, extent }
    }

    fn nearest(&self, samples: &[MedialSample<'_>], region: u32, x: f64, y: f64) -> Option<usize> {
        let max_ring = *self.extent.get(&region)? * 2 + 2;
        let (cx, cy) = ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=max_ring {
            // Anything in a farther ring is at least (ring - 1) cells away.
            if let Some((d, _)) = best {
                if d < (ring as f64 - 1.0) * self.cell {
                    break;
                }
            }
            for by in cy - ring..=cy + ring {
                for bx in cx - ring..=cx + ring {
                    if (by - cy).abs() != ring && (bx - cx).abs() != ring {
                        continue;
                    }
                    let Some(list) = self.buckets.get(&(region, bx, by)) else { continue };
                    for &k in list {
                        let p = samples[k].point;
                        let d = (p.x - x).hypot(p.y - y);
                        if best.map_or(true, |(bd, bk)| d < bd || (d == bd && k < bk)) {
                            best = Some((d, k));
                        }
                    }
                }
            }
        }
        best.map(|(_, k)| k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn straight(radii: &[f64]) -> Vec<BranchPoint> {
        radii
            .iter()
            .enumerate()
            .map(|(i, &r)| BranchPoint {
                x: i as f64,
                y: 0.0,
                radius: r,
                object_angle: 1.0,
            })
            .collect()
    }

    fn ramp(n: usize, f: impl Fn(f64) -> f64) -> Vec<BranchPoint> {
        straight(&(0..n).map(|i| f(i as f64)).collect::<Vec<_>>())
    }

    #[test]
    fn separation_closed_forms() {
        assert_eq!(separation_salience(&ramp(11, |_| 10.0)), 0.9);
        assert_eq!(separation_salience(&ramp(11, |_| 1.0)), 0.0);
        assert_abs_diff_eq!(separation_salience(&ramp(1, |_| 4.0)), 0.75);
        // 1 - (1/10) * integral of 1/(5 + s) over [0, 10].
        let expect = 1.0 - 3f64.ln() / 10.0;
        assert_abs_diff_eq!(separation_salience(&ramp(11, |s| 5.0 + s)), expect, epsilon = 0.01);
    }

    #[test]
    fn ribbon_closed_forms() {
        assert_eq!(ribbon_salience(&ramp(11, |_| 7.0)), 1.0);
        for b in [0.5, 1.0, 3.0] {
            let got = ribbon_salience(&ramp(11, |s| 40.0 + b * s));
            assert_abs_diff_eq!(got, 1.0 / (1.0 + b * b).sqrt(), epsilon = 0.01);
        }
        assert_eq!(ribbon_salience(&ramp(1, |_| 2.0)), 1.0);
    }

    fn taper_quadrature(r: impl Fn(f64) -> f64, rpp: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let n = ((b - a) / 1e-3).round() as usize;
        let h = (b - a) / n as f64;
        let lifted: f64 = (0..=n)
            .map(|i| {
                let s = a + i as f64 * h;
                let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
                wgt * h * (1.0 + (r(s) * rpp(s)).powi(2)).sqrt()
            })
            .sum();
        (b - a) / lifted
    }

    #[test]
    fn parabola_fit_recovers_curvature() {
        let q: Vec<f64> = (0..7).map(|i| 3.0 - 0.5 * i as f64 + 0.25 * (i * i) as f64).collect();
        assert_abs_diff_eq!(fitted_second_derivative(&q), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fitted_second_derivative(&[1.0, 4.0, 2.0]), -5.0, epsilon = 1e-12);
        let line: Vec<f64> = (0..11).map(|i| 2.0 + 0.3 * i as f64).collect();
        assert_abs_diff_eq!(fitted_second_derivative(&line), 0.0, epsilon = 1e-12);
        // Alternating ripple mostly cancels in the fit.
        let ripple: Vec<f64> = (0..11).map(|i| if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        assert!(fitted_second_derivative(&ripple).abs() < 0.02);
    }

    #[test]
    fn taper_closed_forms() {
        assert_abs_diff_eq!(taper_salience(&ramp(11, |s| 2.0 + 0.5 * s)), 1.0, epsilon = 0.02);
        assert_eq!(taper_salience(&ramp(11, |_| 3.0)), 1.0);
        assert_eq!(taper_salience(&ramp(2, |s| s + 3.0)), 1.0);
        let r = |s: f64| 10.0 + s * s / 8.0;
        let expect = taper_quadrature(r, |_| 0.25, -5.0, 5.0);
        let got = taper_salience(&ramp(11, |i| r(i - 5.0)));
        assert_abs_diff_eq!(got, expect, epsilon = 0.02);
    }

    #[test]
    fn windows_shrink_at_the_ends() {
        let b = MedialBranch::new(ramp(20, |_| 5.0), false);
        assert!(windowed_salience(&b, 5, Measure::Ribbon).iter().all(|&v| v == 1.0));
        assert!(windowed_salience(&b, 5, Measure::Taper).iter().all(|&v| v == 1.0));
        let b = MedialBranch::new(ramp(4, |s| 2.0 + s), false);
        assert_eq!(windowed_salience(&b, 5, Measure::Separation).len(), 4);
    }

    #[test]
    fn separation_grows_with_radii() {
        let b = MedialBranch::new(ramp(15, |s| 3.0 + 0.2 * s), false);
        let wider = MedialBranch::new(ramp(15, |s| 3.5 + 0.2 * s), false);
        let a = windowed_salience(&b, 5, Measure::Separation);
        let c = windowed_salience(&wider, 5, Measure::Separation);
        assert!(a.iter().zip(&c).all(|(x, y)| y > x));
    }

    #[test]
    fn measure_parsing() {
        assert_eq!(parse_measures("ribbon, taper,ribbon").unwrap(), vec![Measure::Ribbon, Measure::Taper]);
        assert!(matches!(parse_measures("ribbon,area"), Err(Error::UnknownMeasure(_))));
        assert!(parse_measures("").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SalienceConfig::default().validate().is_ok());
        let bad = |f: fn(&mut SalienceConfig)| {
            let mut c = SalienceConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.window = 0));
        assert!(bad(|c| c.tau = 0.0));
        assert!(bad(|c| c.tau = 0.7));
        assert!(bad(|c| c.sigma = -1.0));
        assert!(bad(|c| c.samples = 4));
        assert!(bad(|c| c.measures.clear()));
    }

    #[test]
    fn snapping_prefers_the_closest_pixel() {
        let img = BinaryContourImage::from_fn(10, 10, |x, y| y == 5 && x > 1).unwrap();
        assert_eq!(snap_to_contour(&img, 4.2, 6.1), Some(5 * 10 + 4));
        assert_eq!(snap_to_contour(&img, 4.0, 8.5), None);
        assert_eq!(snap_to_contour(&img, -0.4, 5.0), None);
    }

    fn sample(region: u32, x: f64, y: f64, tangent: Option<[f64; 2]>, values: &[f64]) -> MedialSample<'_> {
        MedialSample {
            region,
            point: BranchPoint {
                x,
                y,
                radius: 3.0,
                object_angle: std::f64::consts::FRAC_PI_2,
            },
            tangent,
            values,
        }
    }

    #[test]
    fn max_rule_and_fill() {
        // A horizontal contour; two casts land on pixel (5, 5) and one on (8, 5).
        let img = BinaryContourImage::from_fn(12, 11, |x, y| y == 5 && (2..10).contains(&x)).unwrap();
        let regions = crate::ingest::label_regions(&img, crate::ingest::Connectivity::Four);
        let t = Some([1.0, 0.0]);
        let samples = [
            sample(1, 5.0, 2.0, t, &[0.2]),
            sample(1, 5.0, 8.0, t, &[0.7]),
            sample(1, 8.0, 2.0, t, &[0.4]),
        ];
        let cv = project_to_contours(&samples, 1, &img, &regions, Projection::Spoke);
        let at = |x: usize| cv.values[0][5 * 12 + x];
        assert_eq!(at(5), 0.7);
        assert_eq!(at(8), 0.4);
        // Unreached pixels copy the nearest reached pixel along the chain.
        assert_eq!(at(2), 0.7);
        assert_eq!(at(7), 0.4);
        assert_eq!(at(6), 0.7);
        assert_eq!(cv.coverage.cast, 2);
        assert_eq!(cv.coverage.filled, 6);
        assert_eq!(cv.coverage.defaulted, 0);
    }

    #[test]
    fn nearest_medial_mode_takes_max_over_sides() {
        let img = BinaryContourImage::from_fn(12, 11, |_, y| y == 5).unwrap();
        let regions = crate::ingest::label_regions(&img, crate::ingest::Connectivity::Four);
        let (above, below) = (regions.label(0, 0), regions.label(0, 10));
        let samples = [sample(above, 6.0, 2.5, None, &[0.3]), sample(below, 6.0, 7.5, None, &[0.6])];
        let cv = project_to_contours(&samples, 1, &img, &regions, Projection::NearestMedial);
        assert!(img.contour_pixels().all(|(x, y)| cv.values[0][y * 12 + x] == 0.6));
        assert_eq!(cv.coverage.cast, 12);
    }

    proptest! {
        #[test]
        fn values_stay_in_unit_interval(radii in proptest::collection::vec(1.0f64..60.0, 1..30), k in 1usize..8) {
            let b = MedialBranch::new(straight(&radii), false);
            for m in Measure::ALL {
                for v in windowed_salience(&b, k, m) {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }

        #[test]
        fn reversal_leaves_values_unchanged(radii in proptest::collection::vec(1.0f64..30.0, 2..25)) {
            let b = MedialBranch::new(straight(&radii), false);
            let r = b.reversed();
            for m in Measure::ALL {
                let mut back = windowed_salience(&r, 5, m);
                back.reverse();
                for (x, y) in windowed_salience(&b, 5, m).iter().zip(&back) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
